#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace disparity {

struct TrainConfig {
  int max_iterations = 200;
  /// Stop once an iteration lowers the objective by less than this.
  double tolerance = 1e-12;
  double l1_lambda = 0.0;
  bool standardize = true;
  /// Cap on the L2 norm of the (standardized) weights; reaching it flags separation.
  double weight_cap = 50.0;

  void validate() const;
};

struct TrainDiagnostics {
  int iterations = 0;
  double objective = 0.0;
  bool converged = false;
  bool separation_capped = false;
  std::vector<std::size_t> dropped_features;  // constant columns, weight fixed at 0
  std::vector<double> objective_trace;        // objective after each iteration, starting value first
};

/// Column centering and scaling applied before optimization.
struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
};

/// Logistic scoring rule sigmoid(intercept + weights . x) on raw features.
struct LinearModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  std::vector<std::string> feature_names;
  Standardization standardization;
  TrainConfig config;
  TrainDiagnostics diagnostics;

  double score(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  std::size_t dimension() const { return static_cast<std::size_t>(weights.size()); }
};

double sigmoid(double t);

/// Mean Bernoulli negative log-likelihood over (intercept, weights), with its
/// gradient and Hessian. Parameters are laid out as [intercept, w_1..w_p].
class LogisticLoss {
 public:
  LogisticLoss(const Eigen::MatrixXd& features, std::span<const std::uint8_t> labels);

  double value(const Eigen::VectorXd& params) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& params) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& params) const;

  Eigen::Index dimension() const { return features_.cols() + 1; }

 private:
  Eigen::VectorXd linear_predictor(const Eigen::VectorXd& params) const;

  const Eigen::MatrixXd& features_;
  Eigen::VectorXd labels_;
};

/// Maximum-likelihood logistic regression by damped Newton (IRLS) steps.
/// `config.l1_lambda` is ignored. Throws std::invalid_argument when only one
/// label value is present or a feature is not finite.
LinearModel train_logistic(const Eigen::MatrixXd& features, std::span<const std::uint8_t> labels,
                           const TrainConfig& config = {});

/// Minimizes mean NLL + lambda * ||w||_1 (intercept unpenalized; penalty on
/// standardized weights when standardizing) by proximal Newton steps: each
/// iteration solves the penalized quadratic model by coordinate descent and
/// backtracks on the true objective, so the trace never increases.
/// `warm_start`, if given, must come from the same features.
LinearModel train_logistic_l1(const Eigen::MatrixXd& features, std::span<const std::uint8_t> labels,
                              const TrainConfig& config, const LinearModel* warm_start = nullptr);

/// Smallest lambda at which every weight is zero.
double lambda_max(const Eigen::MatrixXd& features, std::span<const std::uint8_t> labels, bool standardize = true);

/// Fits a warm-started path over `lambdas` (expected in decreasing order).
std::vector<LinearModel> l1_path(const Eigen::MatrixXd& features, std::span<const std::uint8_t> labels,
                                 std::span<const double> lambdas, const TrainConfig& config);

struct LambdaSelection {
  std::vector<double> lambdas;
  std::vector<double> validation_brier;
  double chosen = 0.0;
};

/// Picks lambda from a log grid of `grid_points` values between lambda_max and
/// min_ratio * lambda_max by validation Brier score; ties favor the larger lambda.
LambdaSelection select_l1_lambda(const Eigen::MatrixXd& train_features, std::span<const std::uint8_t> train_labels,
                                 const Eigen::MatrixXd& valid_features, std::span<const std::uint8_t> valid_labels,
                                 const TrainConfig& config, int grid_points = 20, double min_ratio = 1e-3);

/// Throws std::invalid_argument on a dimension mismatch.
std::vector<double> predict_scores(const LinearModel& model, const Eigen::MatrixXd& features);

/// Mean squared difference between scores and binary labels.
double brier_mse(std::span<const double> scores, std::span<const std::uint8_t> labels);

void to_json(nlohmann::json& j, const LinearModel& m);
void from_json(const nlohmann::json& j, LinearModel& m);

}  // namespace disparity
