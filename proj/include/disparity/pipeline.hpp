#pragma once

#include <cstdint>
#include <optional>

#include "disparity/predictor.hpp"
#include "disparity/synthetic_data.hpp"

namespace disparity {

struct PipelineConfig {
  double train_fraction = 0.5;
  std::uint64_t split_seed = 1;
  /// Share of L train rows used to fit each lambda candidate; the rest score it.
  double lambda_fit_fraction = 0.8;
  int lambda_grid_points = 20;
  double lambda_min_ratio = 1e-3;
  /// When set, skips selection and uses this penalty for the enriched model.
  std::optional<double> enriched_lambda;
  TrainConfig train;
};

struct ScoringModels {
  LinearModel base;      // logistic on base features, all groups
  LinearModel enriched;  // L1 logistic on enriched features, L rows only
  LambdaSelection selection;
};

/// Fits both scoring models on `train`.
ScoringModels fit_scoring_models(const ScoredCohort& train, const PipelineConfig& config);

/// Fills base_score and enriched_score for every row.
void attach_scores(ScoredCohort& cohort, const ScoringModels& models);

}  // namespace disparity
