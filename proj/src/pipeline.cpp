#include "disparity/pipeline.hpp"

#include <stdexcept>

namespace disparity {

ScoringModels fit_scoring_models(const ScoredCohort& train, const PipelineConfig& config) {
  train.validate();
  ScoringModels models;
  models.base = train_logistic(train.base_features, train.label, config.train);
  models.base.feature_names = train.base_names;

  const ScoredCohort low = train.subset(train.rows_of(Group::low));
  if (low.size() < 10) throw std::invalid_argument("too few L training rows for the enriched model");
  TrainConfig l1 = config.train;
  if (config.enriched_lambda) {
    l1.l1_lambda = *config.enriched_lambda;
  } else {
    const CohortSplit inner = split(low, config.lambda_fit_fraction, config.split_seed ^ 0x9e3779b97f4a7c15ULL);
    models.selection = select_l1_lambda(inner.train.enriched_features, inner.train.label, inner.holdout.enriched_features,
                                        inner.holdout.label, l1, config.lambda_grid_points, config.lambda_min_ratio);
    l1.l1_lambda = models.selection.chosen;
  }
  models.enriched = train_logistic_l1(low.enriched_features, low.label, l1);
  models.enriched.feature_names = train.enriched_names;
  return models;
}

void attach_scores(ScoredCohort& cohort, const ScoringModels& models) {
  cohort.base_score = predict_scores(models.base, cohort.base_features);
  cohort.enriched_score = predict_scores(models.enriched, cohort.enriched_features);
}

}  // namespace disparity
