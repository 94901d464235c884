#include <doctest.h>

#include <cmath>

#include "disparity/pipeline.hpp"
#include "disparity/predictor.hpp"
#include "disparity/random.hpp"

using namespace disparity;

namespace {

struct Data {
  Eigen::MatrixXd x;
  std::vector<std::uint8_t> y;
};

// Labels drawn from a logistic model with the given intercept and weights.
Data logistic_data(std::size_t n, double b, const Eigen::VectorXd& w, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Data d{Eigen::MatrixXd(static_cast<Eigen::Index>(n), w.size()), {}};
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.size(); ++j) d.x(i, j) = scale * rng.normal() + 0.3 * static_cast<double>(j);
    const double p = 1.0 / (1.0 + std::exp(-(b + d.x.row(i).dot(w))));
    d.y.push_back(rng.uniform() < p ? 1 : 0);
  }
  return d;
}

double objective(const LinearModel& m, const Data& d) {
  const LogisticLoss loss(d.x, d.y);
  Eigen::VectorXd theta(m.weights.size() + 1);
  theta << m.intercept, m.weights;
  return loss.value(theta) + m.config.l1_lambda * m.weights.cwiseProduct(m.standardization.scale).lpNorm<1>();
}

bool non_increasing(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] > trace[i - 1] + 1e-12) return false;
  return true;
}

}  // namespace

TEST_SUITE("predictor") {
  TEST_CASE("gradient and Hessian match central differences") {
    Eigen::VectorXd w(3);
    w << 0.8, -0.5, 0.2;
    const Data d = logistic_data(400, -0.3, w, 1);
    const LogisticLoss loss(d.x, d.y);
    Rng rng(2);
    double worst_grad = 0.0, worst_hess = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd theta(4);
      for (Eigen::Index j = 0; j < 4; ++j) theta(j) = 2.0 * rng.normal();
      const Eigen::VectorXd g = loss.gradient(theta);
      const Eigen::MatrixXd h = loss.hessian(theta);
      Eigen::VectorXd fd(4);
      Eigen::MatrixXd fdh(4, 4);
      for (Eigen::Index j = 0; j < 4; ++j) {
        const double step = 1e-5;
        Eigen::VectorXd up = theta, dn = theta;
        up(j) += step;
        dn(j) -= step;
        fd(j) = (loss.value(up) - loss.value(dn)) / (2 * step);
        fdh.col(j) = (loss.gradient(up) - loss.gradient(dn)) / (2 * step);
      }
      worst_grad = std::max(worst_grad, (g - fd).norm() / std::max(g.norm(), 1e-8));
      worst_hess = std::max(worst_hess, (h - fdh).norm() / std::max(h.norm(), 1e-8));
    }
    CHECK(worst_grad < 1e-6);
    CHECK(worst_hess < 1e-6);
  }

  TEST_CASE("recovers a known coefficient within four standard errors") {
    Eigen::VectorXd w(1);
    w << 1.3;
    const Data d = logistic_data(100000, -0.4, w, 3);
    TrainConfig cfg;
    cfg.standardize = false;
    const LinearModel m = train_logistic(d.x, d.y, cfg);
    CHECK(m.diagnostics.converged);
    const LogisticLoss loss(d.x, d.y);
    Eigen::VectorXd theta(2);
    theta << m.intercept, m.weights(0);
    const Eigen::MatrixXd cov = (loss.hessian(theta) * static_cast<double>(d.y.size())).inverse();
    CHECK(std::abs(m.weights(0) - 1.3) < 4.0 * std::sqrt(cov(1, 1)));
    CHECK(std::abs(m.intercept + 0.4) < 4.0 * std::sqrt(cov(0, 0)));
  }

  TEST_CASE("precondition failures") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 2);
    const std::vector<std::uint8_t> same(10, 1);
    CHECK_THROWS_AS(train_logistic(x, same), std::invalid_argument);
    std::vector<std::uint8_t> mixed(10, 0);
    mixed[3] = 1;
    x(2, 1) = std::nan("");
    CHECK_THROWS_AS(train_logistic(x, mixed), std::invalid_argument);
    TrainConfig bad;
    bad.tolerance = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = TrainConfig{};
    bad.max_iterations = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }

  TEST_CASE("objective trace never increases") {
    Eigen::VectorXd w(4);
    w << 1.0, -1.0, 0.5, 0.0;
    const Data d = logistic_data(3000, 0.2, w, 4);
    const LinearModel plain = train_logistic(d.x, d.y);
    CHECK(non_increasing(plain.diagnostics.objective_trace));
    CHECK(plain.diagnostics.objective_trace.size() >= 2);
    for (const double lambda : {0.001, 0.02, 0.1}) {
      TrainConfig cfg;
      cfg.l1_lambda = lambda;
      const LinearModel m = train_logistic_l1(d.x, d.y, cfg);
      CHECK(non_increasing(m.diagnostics.objective_trace));
      CHECK(m.diagnostics.converged);
      CHECK(objective(m, d) == doctest::Approx(m.diagnostics.objective).epsilon(1e-10));
    }
  }

  TEST_CASE("full shrinkage and the unpenalized boundary") {
    Eigen::VectorXd w(3);
    w << 0.7, 0.0, -0.4;
    const Data d = logistic_data(2000, 0.5, w, 5);
    TrainConfig big;
    big.l1_lambda = 1.01 * lambda_max(d.x, d.y);
    const LinearModel shrunk = train_logistic_l1(d.x, d.y, big);
    CHECK(shrunk.weights.cwiseAbs().maxCoeff() == 0.0);
    double rate = 0;
    for (const auto y : d.y) rate += y;
    rate /= static_cast<double>(d.y.size());
    CHECK(shrunk.intercept == doctest::Approx(std::log(rate / (1 - rate))).epsilon(1e-8));
    TrainConfig below = big;
    below.l1_lambda = 0.9 * lambda_max(d.x, d.y);
    CHECK(train_logistic_l1(d.x, d.y, below).weights.cwiseAbs().maxCoeff() > 0.0);

    const LinearModel plain = train_logistic(d.x, d.y);
    const LinearModel zero = train_logistic_l1(d.x, d.y, TrainConfig{});
    CHECK(std::abs(zero.diagnostics.objective - plain.diagnostics.objective) < 1e-6);
  }

  TEST_CASE("lambda path shrinks monotonically and finds the true support") {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(50);
    w.head(5) << 1.5, -1.2, 1.0, -0.8, 0.9;
    const Data d = logistic_data(5000, 0.1, w, 6);
    const double top = lambda_max(d.x, d.y);
    std::vector<double> lambdas;
    for (int i = 0; i < 30; ++i) lambdas.push_back(top * std::pow(1e-3, i / 29.0));
    const auto path = l1_path(d.x, d.y, lambdas, TrainConfig{});
    double prev = 0.0;
    bool exact_support = false;
    for (const auto& m : path) {
      const double norm = m.weights.cwiseProduct(m.standardization.scale).lpNorm<1>();
      CHECK(norm >= prev - 1e-8);
      prev = norm;
      bool match = true;
      for (Eigen::Index j = 0; j < 50; ++j) match = match && ((m.weights(j) != 0.0) == (j < 5));
      exact_support = exact_support || match;
    }
    CHECK(exact_support);
  }

  TEST_CASE("standardization does not change unpenalized predictions") {
    Eigen::VectorXd w(3);
    w << 0.02, -0.5, 3.0;
    Data d = logistic_data(3000, 1.0, w, 7);
    d.x.col(0) *= 100.0;
    d.x.col(2) = d.x.col(2) * 0.2 + Eigen::VectorXd::Constant(d.x.rows(), 5.0);
    TrainConfig on, off;
    off.standardize = false;
    const auto a = predict_scores(train_logistic(d.x, d.y, on), d.x);
    const auto b = predict_scores(train_logistic(d.x, d.y, off), d.x);
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    CHECK(worst < 1e-8);
  }

  TEST_CASE("separable data is capped and flagged") {
    Eigen::MatrixXd x(40, 1);
    std::vector<std::uint8_t> y;
    for (int i = 0; i < 40; ++i) {
      x(i, 0) = i - 19.5;
      y.push_back(i >= 20);
    }
    const LinearModel m = train_logistic(x, y);
    CHECK(m.diagnostics.separation_capped);
    CHECK(std::isfinite(m.weights(0)));
    CHECK(std::abs(m.weights(0) * m.standardization.scale(0)) <= 50.0 + 1e-9);
    CHECK(non_increasing(m.diagnostics.objective_trace));
    const auto s = predict_scores(m, x);
    CHECK(s.front() < 0.01);
    CHECK(s.back() > 0.99);
  }

  TEST_CASE("constant features are dropped") {
    Eigen::VectorXd w(2);
    w << 1.0, 0.0;
    Data d = logistic_data(500, 0.0, w, 8);
    d.x.col(1).setConstant(3.0);
    const LinearModel m = train_logistic(d.x, d.y);
    CHECK(m.diagnostics.dropped_features == std::vector<std::size_t>{1});
    CHECK(m.weights(1) == 0.0);
    CHECK(m.weights(0) > 0.0);
  }

  TEST_CASE("scoring and serialization") {
    LinearModel zero;
    zero.weights = Eigen::VectorXd::Zero(3);
    const auto half = predict_scores(zero, Eigen::MatrixXd::Random(4, 3));
    for (const double s : half) CHECK(s == 0.5);
    CHECK_THROWS_AS(predict_scores(zero, Eigen::MatrixXd::Zero(2, 2)), std::invalid_argument);

    Eigen::VectorXd w(2);
    w << 0.9, -0.3;
    const Data d = logistic_data(1000, 0.2, w, 9);
    TrainConfig cfg;
    cfg.l1_lambda = 0.01;
    LinearModel m = train_logistic_l1(d.x, d.y, cfg);
    m.feature_names = {"a", "b"};
    Eigen::RowVectorXd row(2);
    row << 0.0, 0.0;
    const double base = m.score(row);
    row(0) = 1.0;
    CHECK(m.score(row) > base);

    const LinearModel back = nlohmann::json::parse(nlohmann::json(m).dump()).get<LinearModel>();
    const auto s1 = predict_scores(m, d.x), s2 = predict_scores(back, d.x);
    for (std::size_t i = 0; i < s1.size(); ++i) CHECK(std::abs(s1[i] - s2[i]) <= 1e-15);
    CHECK(back.feature_names == m.feature_names);
    CHECK(back.config.l1_lambda == m.config.l1_lambda);
    CHECK(back.diagnostics.iterations == m.diagnostics.iterations);
  }

  TEST_CASE("brier score") {
    const std::vector<std::uint8_t> y{1, 0, 1, 0};
    CHECK(brier_mse(std::vector<double>{1, 0, 1, 0}, y) == 0.0);
    CHECK(brier_mse(std::vector<double>(4, 0.5), y) == 0.25);
    CHECK_THROWS_AS(brier_mse(std::vector<double>{}, std::vector<std::uint8_t>{}), std::invalid_argument);
    CHECK_THROWS_AS(brier_mse(std::vector<double>{0.5}, y), std::invalid_argument);
  }

  TEST_CASE("enriched scores are more accurate for the low group") {
    CohortSpec spec;
    spec.n = 40000;
    const ScoredCohort c = generate(spec);
    CohortSplit parts = split(c, 0.5, 3);
    const ScoringModels models = fit_scoring_models(parts.train, PipelineConfig{});
    CHECK(models.selection.lambdas.size() == 20);
    CHECK(models.enriched.config.l1_lambda == models.selection.chosen);
    attach_scores(parts.holdout, models);
    const ScoredCohort low = parts.holdout.subset(parts.holdout.rows_of(Group::low));
    CHECK(brier_mse(low.enriched_score, low.label) < brier_mse(low.base_score, low.label));
  }
}
