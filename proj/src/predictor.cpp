#include "disparity/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace disparity {

void TrainConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!(l1_lambda >= 0.0)) throw std::invalid_argument("l1_lambda must be non-negative");
  if (!(weight_cap > 0.0)) throw std::invalid_argument("weight_cap must be positive");
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

}  // namespace

double LinearModel::score(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (x.size() != weights.size()) throw std::invalid_argument("feature dimension does not match model");
  return sigmoid(intercept + x.dot(weights));
}

LogisticLoss::LogisticLoss(const Eigen::MatrixXd& features, std::span<const std::uint8_t> labels)
    : features_(features), labels_(static_cast<Eigen::Index>(labels.size())) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw std::invalid_argument("features and labels differ in length");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) labels_(static_cast<Eigen::Index>(i)) = labels[i];
}

Eigen::VectorXd LogisticLoss::linear_predictor(const Eigen::VectorXd& params) const {
  return (features_ * params.tail(features_.cols())).array() + params(0);
}

double LogisticLoss::value(const Eigen::VectorXd& params) const {
  const Eigen::VectorXd eta = linear_predictor(params);
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) total += softplus(eta(i)) - labels_(i) * eta(i);
  return total / static_cast<double>(eta.size());
}

Eigen::VectorXd LogisticLoss::gradient(const Eigen::VectorXd& params) const {
  const Eigen::VectorXd eta = linear_predictor(params);
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) resid(i) = sigmoid(eta(i)) - labels_(i);
  const double n = static_cast<double>(eta.size());
  Eigen::VectorXd g(dimension());
  g(0) = resid.sum() / n;
  g.tail(features_.cols()) = features_.transpose() * resid / n;
  return g;
}

Eigen::MatrixXd LogisticLoss::hessian(const Eigen::VectorXd& params) const {
  const Eigen::VectorXd eta = linear_predictor(params);
  const auto n = eta.size();
  const auto p = features_.cols();
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = sigmoid(eta(i));
    w(i) = mu * (1.0 - mu);
  }
  Eigen::MatrixXd h(p + 1, p + 1);
  const Eigen::MatrixXd weighted = features_.array().colwise() * w.array();
  h(0, 0) = w.sum();
  h.block(1, 0, p, 1) = weighted.colwise().sum().transpose();
  h.block(0, 1, 1, p) = h.block(1, 0, p, 1).transpose();
  h.block(1, 1, p, p) = features_.transpose() * weighted;
  return h / static_cast<double>(n);
}

namespace {

struct Prepared {
  Eigen::MatrixXd design;  // active columns, standardized if requested
  std::vector<Eigen::Index> active;
  Standardization standardization;
  std::vector<std::size_t> dropped;
};

void check_inputs(const Eigen::MatrixXd& features, std::span<const std::uint8_t> labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw std::invalid_argument("features and labels differ in length");
  }
  if (labels.empty()) throw std::invalid_argument("no training rows");
  bool seen[2] = {false, false};
  for (const auto y : labels) {
    if (y > 1) throw std::invalid_argument("labels must be 0 or 1");
    seen[y] = true;
  }
  if (!seen[0] || !seen[1]) throw std::invalid_argument("training labels must contain both classes");
  if (!features.allFinite()) throw std::invalid_argument("features must be finite");
}

Prepared prepare(const Eigen::MatrixXd& features, bool standardize) {
  Prepared p;
  const auto n = static_cast<double>(features.rows());
  const auto cols = features.cols();
  p.standardization.mean = Eigen::VectorXd::Zero(cols);
  p.standardization.scale = Eigen::VectorXd::Ones(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double mean = features.col(j).mean();
    const double sd = std::sqrt((features.col(j).array() - mean).square().sum() / n);
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      p.dropped.push_back(static_cast<std::size_t>(j));
      continue;
    }
    p.active.push_back(j);
    if (standardize) {
      p.standardization.mean(j) = mean;
      p.standardization.scale(j) = sd;
    }
  }
  p.design.resize(features.rows(), static_cast<Eigen::Index>(p.active.size()));
  for (std::size_t k = 0; k < p.active.size(); ++k) {
    const auto j = p.active[k];
    p.design.col(static_cast<Eigen::Index>(k)) =
        (features.col(j).array() - p.standardization.mean(j)) / p.standardization.scale(j);
  }
  return p;
}

double l1_norm_weights(const Eigen::VectorXd& theta) { return theta.tail(theta.size() - 1).lpNorm<1>(); }

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

// Minimizes g'(z - theta) + 0.5 (z - theta)' H (z - theta) + lambda * ||z_w||_1
// by cyclic coordinate descent, starting from theta.
Eigen::VectorXd solve_penalized_quadratic(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                                          const Eigen::VectorXd& theta, double lambda) {
  const auto q = theta.size();
  Eigen::VectorXd z = theta;
  Eigen::VectorXd hd = Eigen::VectorXd::Zero(q);  // H (z - theta)
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < q; ++j) {
      const double a = std::max(h(j, j), 1e-12);
      // Gradient of the smooth part at z, less the diagonal contribution of z_j.
      const double b = g(j) + hd(j) - a * (z(j) - theta(j));
      const double target = a * theta(j) - b;
      const double next = j == 0 ? target / a : soft_threshold(target, lambda) / a;
      const double delta = next - z(j);
      if (delta != 0.0) {
        hd += h.col(j) * delta;
        z(j) = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < 1e-14) break;
  }
  return z;
}

struct FitOutput {
  Eigen::VectorXd theta;
  TrainDiagnostics diagnostics;
};

FitOutput fit(const Prepared& prep, std::span<const std::uint8_t> labels, const TrainConfig& config, bool penalized,
              const Eigen::VectorXd& start) {
  const LogisticLoss loss(prep.design, labels);
  const double lambda = penalized ? config.l1_lambda : 0.0;
  auto objective = [&](const Eigen::VectorXd& t) { return loss.value(t) + lambda * l1_norm_weights(t); };

  FitOutput out;
  Eigen::VectorXd theta = start;
  double f = objective(theta);
  out.diagnostics.objective_trace.push_back(f);
  const auto q = theta.size();

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    out.diagnostics.iterations = iter;
    const Eigen::VectorXd g = loss.gradient(theta);
    const Eigen::MatrixXd h = loss.hessian(theta);
    Eigen::VectorXd direction;
    if (!penalized) {
      const Eigen::MatrixXd damped = h + 1e-12 * Eigen::MatrixXd::Identity(q, q);
      direction = -damped.ldlt().solve(g);
    } else {
      direction = solve_penalized_quadratic(h, g, theta, lambda) - theta;
    }
    const double predicted =
        g.dot(direction) + lambda * (l1_norm_weights(theta + direction) - l1_norm_weights(theta));
    if (!(predicted < 0.0)) {
      out.diagnostics.converged = true;
      break;
    }
    double step = 1.0;
    Eigen::VectorXd candidate = theta + direction;
    double f_candidate = objective(candidate);
    while (f_candidate > f + 1e-4 * step * predicted && step > 1e-10) {
      step *= 0.5;
      candidate = theta + step * direction;
      f_candidate = objective(candidate);
    }
    if (!(f_candidate <= f)) {
      out.diagnostics.converged = true;  // no further decrease at working precision
      break;
    }
    const double norm = candidate.tail(q - 1).norm();
    if (norm > config.weight_cap) {
      // Largest t in [0, step] keeping ||w + t d_w|| <= cap; the objective is
      // convex along the ray, so this point is no worse than theta.
      const Eigen::VectorXd w = theta.tail(q - 1);
      const Eigen::VectorXd dw = direction.tail(q - 1);
      const double a = dw.squaredNorm();
      const double b = 2.0 * w.dot(dw);
      const double c = w.squaredNorm() - config.weight_cap * config.weight_cap;
      const double t = a > 0.0 ? std::clamp((-b + std::sqrt(std::max(0.0, b * b - 4 * a * c))) / (2 * a), 0.0, step) : 0.0;
      candidate = theta + t * direction;
      f_candidate = std::min(objective(candidate), f);
      if (objective(candidate) <= f) theta = candidate;
      f = f_candidate;
      out.diagnostics.objective_trace.push_back(f);
      out.diagnostics.separation_capped = true;
      break;
    }
    const double improvement = f - f_candidate;
    theta = candidate;
    f = f_candidate;
    out.diagnostics.objective_trace.push_back(f);
    if (improvement < config.tolerance) {
      out.diagnostics.converged = true;
      break;
    }
  }
  out.theta = theta;
  out.diagnostics.objective = f;
  return out;
}

LinearModel finish(const Prepared& prep, const FitOutput& fitted, Eigen::Index cols, const TrainConfig& config) {
  LinearModel m;
  m.weights = Eigen::VectorXd::Zero(cols);
  m.intercept = fitted.theta(0);
  for (std::size_t k = 0; k < prep.active.size(); ++k) {
    const auto j = prep.active[k];
    const double w = fitted.theta(static_cast<Eigen::Index>(k) + 1) / prep.standardization.scale(j);
    m.weights(j) = w;
    m.intercept -= w * prep.standardization.mean(j);
  }
  m.standardization = prep.standardization;
  m.config = config;
  m.diagnostics = fitted.diagnostics;
  m.diagnostics.dropped_features = prep.dropped;
  return m;
}

Eigen::VectorXd cold_start(const Prepared& prep, std::span<const std::uint8_t> labels) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(prep.active.size()) + 1);
  double positives = 0.0;
  for (const auto y : labels) positives += y;
  const double rate = positives / static_cast<double>(labels.size());
  theta(0) = std::log(rate / (1.0 - rate));
  return theta;
}

Eigen::VectorXd warm_start_theta(const Prepared& prep, const LinearModel& warm) {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(prep.active.size()) + 1);
  theta(0) = warm.intercept;
  for (std::size_t k = 0; k < prep.active.size(); ++k) {
    const auto j = prep.active[k];
    theta(static_cast<Eigen::Index>(k) + 1) = warm.weights(j) * prep.standardization.scale(j);
    theta(0) += warm.weights(j) * prep.standardization.mean(j);
  }
  return theta;
}

}  // namespace

LinearModel train_logistic(const Eigen::MatrixXd& features, std::span<const std::uint8_t> labels,
                           const TrainConfig& config) {
  config.validate();
  check_inputs(features, labels);
  const Prepared prep = prepare(features, config.standardize);
  TrainConfig used = config;
  used.l1_lambda = 0.0;
  return finish(prep, fit(prep, labels, used, false, cold_start(prep, labels)), features.cols(), used);
}

LinearModel train_logistic_l1(const Eigen::MatrixXd& features, std::span<const std::uint8_t> labels,
                              const TrainConfig& config, const LinearModel* warm_start) {
  config.validate();
  check_inputs(features, labels);
  const Prepared prep = prepare(features, config.standardize);
  Eigen::VectorXd start = cold_start(prep, labels);
  if (warm_start != nullptr) {
    if (warm_start->weights.size() != features.cols()) throw std::invalid_argument("warm start has the wrong dimension");
    start = warm_start_theta(prep, *warm_start);
  }
  return finish(prep, fit(prep, labels, config, true, start), features.cols(), config);
}

double lambda_max(const Eigen::MatrixXd& features, std::span<const std::uint8_t> labels, bool standardize) {
  check_inputs(features, labels);
  const Prepared prep = prepare(features, standardize);
  const LogisticLoss loss(prep.design, labels);
  const Eigen::VectorXd g = loss.gradient(cold_start(prep, labels));
  return g.size() > 1 ? g.tail(g.size() - 1).cwiseAbs().maxCoeff() : 0.0;
}

std::vector<LinearModel> l1_path(const Eigen::MatrixXd& features, std::span<const std::uint8_t> labels,
                                 std::span<const double> lambdas, const TrainConfig& config) {
  std::vector<LinearModel> path;
  path.reserve(lambdas.size());
  for (const double lambda : lambdas) {
    TrainConfig c = config;
    c.l1_lambda = lambda;
    path.push_back(train_logistic_l1(features, labels, c, path.empty() ? nullptr : &path.back()));
  }
  return path;
}

LambdaSelection select_l1_lambda(const Eigen::MatrixXd& train_features, std::span<const std::uint8_t> train_labels,
                                 const Eigen::MatrixXd& valid_features, std::span<const std::uint8_t> valid_labels,
                                 const TrainConfig& config, int grid_points, double min_ratio) {
  if (grid_points < 2) throw std::invalid_argument("lambda grid needs at least two points");
  if (!(min_ratio > 0.0 && min_ratio < 1.0)) throw std::invalid_argument("min_ratio must lie in (0, 1)");
  LambdaSelection sel;
  const double top = lambda_max(train_features, train_labels, config.standardize);
  for (int i = 0; i < grid_points; ++i) {
    sel.lambdas.push_back(top * std::pow(min_ratio, static_cast<double>(i) / (grid_points - 1)));
  }
  const auto path = l1_path(train_features, train_labels, sel.lambdas, config);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double b = brier_mse(predict_scores(path[i], valid_features), valid_labels);
    sel.validation_brier.push_back(b);
    if (b < best) {
      best = b;
      sel.chosen = sel.lambdas[i];
    }
  }
  return sel;
}

std::vector<double> predict_scores(const LinearModel& model, const Eigen::MatrixXd& features) {
  if (features.cols() != model.weights.size()) {
    throw std::invalid_argument("feature dimension " + std::to_string(features.cols()) + " does not match model dimension " +
                                std::to_string(model.weights.size()));
  }
  const Eigen::VectorXd eta = (features * model.weights).array() + model.intercept;
  std::vector<double> scores(static_cast<std::size_t>(eta.size()));
  for (Eigen::Index i = 0; i < eta.size(); ++i) scores[static_cast<std::size_t>(i)] = sigmoid(eta(i));
  return scores;
}

double brier_mse(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.empty()) throw std::invalid_argument("brier_mse: empty input");
  if (scores.size() != labels.size()) throw std::invalid_argument("brier_mse: scores and labels differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double d = scores[i] - labels[i];
    total += d * d;
  }
  return total / static_cast<double>(scores.size());
}

namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void to_json(nlohmann::json& j, const LinearModel& m) {
  j = nlohmann::json{
      {"weights", to_vector(m.weights)},
      {"intercept", m.intercept},
      {"feature_names", m.feature_names},
      {"standardization", {{"mean", to_vector(m.standardization.mean)}, {"scale", to_vector(m.standardization.scale)}}},
      {"config",
       {{"max_iterations", m.config.max_iterations},
        {"tolerance", m.config.tolerance},
        {"l1_lambda", m.config.l1_lambda},
        {"standardize", m.config.standardize},
        {"weight_cap", m.config.weight_cap}}},
      {"diagnostics",
       {{"iterations", m.diagnostics.iterations},
        {"objective", m.diagnostics.objective},
        {"converged", m.diagnostics.converged},
        {"separation_capped", m.diagnostics.separation_capped},
        {"dropped_features", m.diagnostics.dropped_features}}},
  };
}

void from_json(const nlohmann::json& j, LinearModel& m) {
  m.weights = from_vector(j.at("weights").get<std::vector<double>>());
  m.intercept = j.at("intercept").get<double>();
  m.feature_names = j.value("feature_names", std::vector<std::string>{});
  if (j.contains("standardization")) {
    m.standardization.mean = from_vector(j["standardization"].at("mean").get<std::vector<double>>());
    m.standardization.scale = from_vector(j["standardization"].at("scale").get<std::vector<double>>());
  }
  if (j.contains("config")) {
    const auto& c = j["config"];
    m.config.max_iterations = c.value("max_iterations", m.config.max_iterations);
    m.config.tolerance = c.value("tolerance", m.config.tolerance);
    m.config.l1_lambda = c.value("l1_lambda", m.config.l1_lambda);
    m.config.standardize = c.value("standardize", m.config.standardize);
    m.config.weight_cap = c.value("weight_cap", m.config.weight_cap);
  }
  if (j.contains("diagnostics")) {
    const auto& d = j["diagnostics"];
    m.diagnostics.iterations = d.value("iterations", 0);
    m.diagnostics.objective = d.value("objective", 0.0);
    m.diagnostics.converged = d.value("converged", false);
    m.diagnostics.separation_capped = d.value("separation_capped", false);
    m.diagnostics.dropped_features = d.value("dropped_features", std::vector<std::size_t>{});
  }
  if (!m.feature_names.empty() && m.feature_names.size() != static_cast<std::size_t>(m.weights.size())) {
    throw std::invalid_argument("model JSON: feature_names and weights differ in length");
  }
}

}  // namespace disparity
