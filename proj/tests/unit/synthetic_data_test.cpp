#include <doctest.h>

#include <cmath>
#include <sstream>

#include "disparity/regression.hpp"
#include "disparity/synthetic_data.hpp"
#include "disparity/text_io.hpp"

using namespace disparity;

namespace {

const ScoredCohort& default_cohort() {
  static const ScoredCohort c = generate(CohortSpec{});
  return c;
}

double base_rate(const ScoredCohort& c, Group g) {
  double pos = 0, n = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.group[i] != g) continue;
    n += 1;
    pos += c.label[i];
  }
  return pos / n;
}

// R^2 of latent ability on the given features (plus intercept) within one group.
double r_squared(const ScoredCohort& c, const Eigen::MatrixXd& features, Group g) {
  const auto rows = c.rows_of(g);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), features.cols() + 1);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = 1.0;
    x.row(r).tail(features.cols()) = features.row(static_cast<Eigen::Index>(rows[i]));
    y(r) = c.ability[rows[i]];
  }
  return ols(x, y).r_squared;
}

// Large-sample standard error of a squared correlation.
double r2_se(double rho2, double n) { return std::sqrt(4.0 * rho2 * (1 - rho2) * (1 - rho2) / n); }

}  // namespace

TEST_SUITE("synthetic_data") {
  TEST_CASE("calibration hits requested base rates") {
    for (const double rate : {0.5, 0.89, 0.93}) {
      const double mu = calibrate_mean_for_base_rate(rate, 2.0);
      CHECK(1.0 - std::erfc(mu / std::sqrt(2.0) / std::sqrt(2.0)) / 2.0 == doctest::Approx(rate).epsilon(1e-10));
    }
    const CohortSpec spec;
    CHECK(spec.implied_base_rate(Group::high) == doctest::Approx(0.93).epsilon(1e-9));
    CHECK(spec.implied_base_rate(Group::low) == doctest::Approx(0.89).epsilon(1e-9));
  }

  TEST_CASE("default cohort realizes the calibrated base rates") {
    const ScoredCohort& c = default_cohort();
    CHECK(c.size() == 100000);
    CHECK(std::abs(base_rate(c, Group::high) - 0.93) < 0.005);
    CHECK(std::abs(base_rate(c, Group::low) - 0.89) < 0.005);
    CHECK(std::abs(static_cast<double>(c.count(Group::high)) / 1e5 - 0.55) < 4 * std::sqrt(0.55 * 0.45 / 1e5));
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c.label[i] != (c.ability[i] > 0.0 ? 1 : 0)) FAIL("label inconsistent with ability at row " << i);
    }
    CHECK(c.base_features.allFinite());
    CHECK(c.enriched_features.allFinite());
    CHECK(c.base_features.cols() == 5);
    CHECK(c.enriched_features.cols() == 5 + 1 + 10);
  }

  TEST_CASE("generation is deterministic in the seed") {
    CohortSpec spec;
    spec.n = 2000;
    const ScoredCohort a = generate(spec), b = generate(spec);
    CHECK(a == b);
    std::ostringstream sa, sb;
    write_cohort_csv(a, sa);
    write_cohort_csv(b, sb);
    CHECK(sa.str() == sb.str());
    spec.seed += 1;
    CHECK_FALSE(generate(spec) == a);
  }

  TEST_CASE("base features carry exactly the score's share of ability variance") {
    const ScoredCohort& c = default_cohort();
    const CohortSpec spec;
    for (const Group g : kGroups) {
      const double target = gamma(g == Group::low ? spec.low : spec.high);
      const double n = static_cast<double>(c.count(g));
      CHECK(std::abs(r_squared(c, c.base_features, g) - target) < 4.0 * r2_se(target, n) + 6.0 / n);
    }
  }

  TEST_CASE("enrichment raises only the low group's explained variance") {
    const ScoredCohort& c = default_cohort();
    const CohortSpec spec;
    const double nl = static_cast<double>(c.count(Group::low));
    CHECK(std::abs(r_squared(c, c.enriched_features, Group::low) - spec.enriched_gamma_low) <
          4.0 * r2_se(spec.enriched_gamma_low, nl) + 17.0 / nl);
    const double gh = gamma(spec.high);
    const double nh = static_cast<double>(c.count(Group::high));
    CHECK(std::abs(r_squared(c, c.enriched_features, Group::high) - gh) < 4.0 * r2_se(gh, nh) + 17.0 / nh);
  }

  TEST_CASE("ability is mean independent of group given the score") {
    const ScoredCohort& c = default_cohort();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(c.size()), 3);
    Eigen::VectorXd y(static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      x(r, 0) = 1.0;
      x(r, 1) = c.signal[i];
      x(r, 2) = c.group[i] == Group::high ? 1.0 : 0.0;
      y(r) = c.ability[i];
    }
    const OlsFit f = ols(x, y);
    CHECK(std::abs(f.coef(2)) < 4.0 * f.se(2));
    CHECK(std::abs(f.coef(1) - 1.0) < 4.0 * f.se(1));
  }

  TEST_CASE("spec validation and config round trip") {
    CohortSpec bad;
    bad.high_share = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = CohortSpec{};
    bad.low.var_s = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = CohortSpec{};
    std::swap(bad.low, bad.high);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(cohort_spec_from_config({{"bogus", "1"}}), std::invalid_argument);

    CohortSpec s;
    s.n = 1234;
    s.seed = 77;
    s.low.var_eps = 0.9;
    const CohortSpec back = cohort_spec_from_config(parse_key_values(cohort_spec_to_config(s), "t"));
    CHECK(cohort_spec_to_config(back) == cohort_spec_to_config(s));
    const CohortSpec rate = cohort_spec_from_config({{"low.base_rate", "0.8"}});
    CHECK(rate.implied_base_rate(Group::low) == doctest::Approx(0.8).epsilon(1e-9));
  }

  TEST_CASE("stratified split") {
    CohortSpec spec;
    spec.n = 1000;
    const ScoredCohort c = generate(spec);
    const CohortSplit s = split(c, 0.5, 9);
    CHECK(s.train.size() + s.holdout.size() == 1000);
    CHECK(std::abs(static_cast<int>(s.train.size()) - 500) <= 1);
    const double share = static_cast<double>(c.count(Group::low)) / 1000.0;
    CHECK(std::abs(static_cast<double>(s.train.count(Group::low)) / s.train.size() - share) < 0.02);
    CHECK(std::abs(static_cast<double>(s.holdout.count(Group::low)) / s.holdout.size() - share) < 0.02);
    std::vector<int> seen(1000, 0);
    for (const auto r : s.train_rows) seen[r] += 1;
    for (const auto r : s.holdout_rows) seen[r] += 1;
    CHECK(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
    CHECK(std::is_sorted(s.train_rows.begin(), s.train_rows.end()));
    CHECK(s.train == c.subset(s.train_rows));
    const CohortSplit again = split(c, 0.5, 9);
    CHECK(again.train_rows == s.train_rows);
    CHECK_THROWS_AS(split(c, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(split(c, 1.0, 1), std::invalid_argument);
  }

  TEST_CASE("csv ingest") {
    const std::string text =
        "group,label,x1,x2\n"
        "L,1,0.5,1\n"
        "H,0,-2,3.25\n"
        "H,1,0,0\n"
        "L,0,1e-3,-inf\n";
    const CohortSchema schema = CohortSchema::infer(std::vector<std::string>{"group", "label", "x1", "x2"});
    const ScoredCohort c = read_cohort_csv(text, schema);
    CHECK(c.size() == 4);
    CHECK(c.base_features(1, 1) == 3.25);
    CHECK(c.group[1] == Group::high);
    CHECK_FALSE(c.has_latent());

    try {
      read_cohort_csv("group,label,x1,x2\nL,1,0,0\nH,2,0,0\n", schema, "f.csv");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("f.csv:3") != std::string::npos);
    }
    CHECK_THROWS_AS(read_cohort_csv("group,label,x1,x2\nL,1,abc,0\n", schema), ParseError);
    CHECK_THROWS_AS(read_cohort_csv("group,label,x1,x2\nQ,1,0,0\n", schema), ParseError);
    CHECK_THROWS_AS(read_cohort_csv("group,label,x1\nL,1,0\n", schema), std::runtime_error);
    CHECK_THROWS_AS(read_cohort_csv("", schema), std::runtime_error);
  }

  TEST_CASE("export and ingest round trip") {
    CohortSpec spec;
    spec.n = 500;
    ScoredCohort c = generate(spec);
    c.base_score.assign(c.size(), 0.25);
    c.enriched_score.assign(c.size(), 1.0 / 3.0);
    std::ostringstream out;
    write_cohort_csv(c, out);
    const std::string text = out.str();
    const std::string first = text.substr(0, text.find('\n'));
    std::vector<std::string> header;
    for (const auto f : split_csv(first)) header.emplace_back(f);
    const ScoredCohort back = read_cohort_csv(text, CohortSchema::infer(header));
    CHECK(back == c);
  }
}
