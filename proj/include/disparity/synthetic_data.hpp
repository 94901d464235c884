#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "disparity/gaussian_model.hpp"
#include "disparity/metrics.hpp"

namespace disparity {

/// Mean that puts `base_rate` of a N(mean, var_ability) ability above
/// `threshold`, found by bisection on the normal CDF.
double calibrate_mean_for_base_rate(double base_rate, double var_ability, double threshold = 0.0);

/// Parameters of a synthetic lending cohort.
///
/// Each group draws S ~ N(mu, var_s) and eps ~ N(0, var_eps); ability is
/// A = S + eps and the label is 1{A > 0}. Base features are an invertible
/// linear transform of (S, n1, n2) with n1, n2 standard normal nuisance, plus
/// `base_noise_dims` distractor columns. Enriched features append a column
/// revealing part of eps for L members, so that the best L score built from
/// them has signal strength `enriched_gamma_low`, plus `enriched_noise_dims`
/// distractors.
struct CohortSpec {
  static constexpr double kDefaultVarS = 0.05;
  static constexpr double kDefaultVarEps = 0.95;

  std::size_t n = 100000;
  double high_share = 0.55;
  GaussianGroupSpec low{calibrate_mean_for_base_rate(0.89, kDefaultVarS + kDefaultVarEps), kDefaultVarS,
                        kDefaultVarEps};
  GaussianGroupSpec high{calibrate_mean_for_base_rate(0.93, kDefaultVarS + kDefaultVarEps), kDefaultVarS,
                         kDefaultVarEps};
  std::size_t base_noise_dims = 2;
  std::size_t enriched_noise_dims = 10;
  double enriched_gamma_low = 0.30;
  std::uint64_t seed = 20160401;

  /// Throws std::invalid_argument on an inconsistent spec.
  void validate() const;
  /// Population base rate P[A > 0 | G] implied by the latent model.
  double implied_base_rate(Group g) const;
};

/// Applies `key = value` overrides (n, high_share, seed, base_noise_dims,
/// enriched_noise_dims, enriched_gamma_low, {low,high}.{mu,var_s,var_eps,base_rate}).
/// `base_rate` recalibrates the group mean. Unknown keys throw std::invalid_argument.
CohortSpec cohort_spec_from_config(const std::map<std::string, std::string>& kv, CohortSpec base = {});
std::string cohort_spec_to_config(const CohortSpec& spec);

struct ScoredCohort {
  std::vector<Group> group;
  std::vector<std::uint8_t> label;
  std::vector<double> ability;  // empty when unknown
  std::vector<double> signal;   // Bayes score S; empty when unknown
  Eigen::MatrixXd base_features;
  Eigen::MatrixXd enriched_features;  // base columns first, then enrichment columns
  std::vector<std::string> base_names;
  std::vector<std::string> enriched_names;
  std::vector<double> base_score;      // empty until scored
  std::vector<double> enriched_score;  // empty until scored

  std::size_t size() const { return label.size(); }
  bool has_latent() const { return !ability.empty(); }
  std::size_t count(Group g) const;
  std::vector<std::size_t> rows_of(Group g) const;

  /// Throws std::invalid_argument when column lengths disagree or a label is not binary.
  void validate() const;
  ScoredCohort subset(std::span<const std::size_t> rows) const;

  friend bool operator==(const ScoredCohort& a, const ScoredCohort& b);
};

/// Deterministic in `spec` (seed included).
ScoredCohort generate(const CohortSpec& spec);

struct CohortSplit {
  ScoredCohort train;
  ScoredCohort holdout;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> holdout_rows;
};

/// Group-stratified split; each side keeps the original row order.
CohortSplit split(const ScoredCohort& cohort, double train_fraction, std::uint64_t seed);

/// Which CSV columns carry what. Enriched columns are the extra columns only.
struct CohortSchema {
  std::string group_column = "group";
  std::string label_column = "label";
  std::vector<std::string> base_columns;
  std::vector<std::string> enrichment_columns;
  std::optional<std::string> ability_column;
  std::optional<std::string> signal_column;
  std::optional<std::string> base_score_column;
  std::optional<std::string> enriched_score_column;

  /// Naming convention used by write_cohort_csv: `enr_*` enrichment,
  /// `latent_ability`, `latent_signal`, `score_base`, `score_enriched`;
  /// every other column after group/label is a base feature.
  static CohortSchema infer(std::span<const std::string> header);
};

void write_cohort_csv(const ScoredCohort& cohort, std::ostream& out);
void write_cohort_csv(const ScoredCohort& cohort, const std::filesystem::path& path);

/// Throws ParseError (with line number) on malformed rows, std::runtime_error
/// on missing columns or an empty file.
ScoredCohort read_cohort_csv(std::string_view text, const CohortSchema& schema, const std::string& source = "<csv>");
ScoredCohort ingest_csv(const std::filesystem::path& path, const std::optional<CohortSchema>& schema = std::nullopt);

}  // namespace disparity
