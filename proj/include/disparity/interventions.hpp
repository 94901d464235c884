#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "disparity/metrics.hpp"
#include "disparity/synthetic_data.hpp"

namespace disparity {

enum class Scheme : std::uint8_t { blind, affirmative_action, affirmative_information };
enum class ScoreSource : std::uint8_t { base, enriched };

inline constexpr Scheme kSchemes[] = {Scheme::blind, Scheme::affirmative_action, Scheme::affirmative_information};

std::string_view scheme_name(Scheme s);
/// Accepts the names produced by scheme_name; throws std::invalid_argument otherwise.
Scheme parse_scheme(std::string_view name);

struct PolicySpec {
  Scheme scheme = Scheme::blind;
  double cutoff_h = 0.0;
  double cutoff_l = 0.0;

  static PolicySpec blind(double cutoff);
  static PolicySpec affirmative_action(double cutoff_h, double cutoff_l);
  static PolicySpec affirmative_information(double cutoff);

  double cutoff(Group g) const { return g == Group::low ? cutoff_l : cutoff_h; }
  ScoreSource source(Group g) const;
  /// Throws std::invalid_argument when the cutoffs break the scheme's contract.
  void validate() const;
};

struct ProfitSpec {
  double k = 1.0;
  void validate() const;
};

/// Score each row is judged on under `scheme`.
std::vector<double> scheme_scores(const ScoredCohort& cohort, Scheme scheme);

/// Accept iff the row's group score is strictly above the group cutoff.
/// Throws std::invalid_argument when a required score column is missing.
std::vector<std::uint8_t> apply_policy(const ScoredCohort& cohort, const PolicySpec& policy);

double profit(std::span<const std::uint8_t> decisions, std::span<const std::uint8_t> labels, const ProfitSpec& p);

/// -inf, midpoints of consecutive distinct sorted scores, +inf.
std::vector<double> candidate_cutoffs(std::span<const double> scores);

/// Positive/negative counts above every candidate cutoff of one score sample.
class CutoffTable {
 public:
  CutoffTable(std::span<const double> scores, std::span<const std::uint8_t> labels);

  std::size_t size() const { return cutoffs_.size(); }
  double cutoff(std::size_t i) const { return cutoffs_[i]; }
  const std::vector<double>& cutoffs() const { return cutoffs_; }
  std::uint64_t tp(std::size_t i) const { return tp_[i]; }
  std::uint64_t fp(std::size_t i) const { return fp_[i]; }
  std::uint64_t positives() const { return tp_.front(); }
  std::uint64_t negatives() const { return fp_.front(); }
  /// Distinct scores, ascending.
  const std::vector<double>& scores() const { return unique_; }

  /// Counts strictly above an arbitrary cutoff.
  std::uint64_t tp_above(double cutoff) const;
  std::uint64_t fp_above(double cutoff) const;

 private:
  std::size_t index_above(double cutoff) const;

  std::vector<double> unique_;
  std::vector<double> cutoffs_;
  std::vector<std::uint64_t> tp_;
  std::vector<std::uint64_t> fp_;
};

struct CutoffChoice {
  double cutoff = 0.0;
  double profit = 0.0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
};

/// Candidate maximizing TP - k FP; ties go to the higher cutoff.
CutoffChoice optimal_cutoff(std::span<const double> scores, std::span<const std::uint8_t> labels, const ProfitSpec& p);
CutoffChoice optimal_cutoff(const CutoffTable& table, const ProfitSpec& p);

struct ParityCutoff {
  double cutoff_l = 0.0;
  /// False when L has no creditworthy members; cutoff_l is then -inf.
  bool reachable = true;
};

/// Largest L candidate cutoff <= cutoff_h whose L TPR reaches the H TPR at
/// cutoff_h, judged on base scores. Returns cutoff_h itself when L already
/// matches H there.
ParityCutoff aa_cutoff_for_parity(const ScoredCohort& train, double cutoff_h);
ParityCutoff aa_cutoff_for_parity(const CutoffTable& low, const CutoffTable& high, double cutoff_h);

struct AaPair {
  double cutoff_h = 0.0;
  double cutoff_l = 0.0;
  double profit = 0.0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  bool feasible = true;
};

/// Every candidate cutoff of the pooled scores, used as the H cutoff and paired
/// with its parity L cutoff; built once and reused across profit weights.
class AffirmativeActionFrontier {
 public:
  explicit AffirmativeActionFrontier(const ScoredCohort& train);
  AffirmativeActionFrontier(const CutoffTable& low, const CutoffTable& high);

  /// Profit-maximizing pair; ties go to the higher cutoff_h. Returns the
  /// closed-market pair (+inf, +inf) flagged infeasible when no pair exists.
  AaPair best(const ProfitSpec& p) const;
  const std::vector<AaPair>& pairs() const { return pairs_; }

 private:
  std::vector<AaPair> pairs_;
};

AaPair optimal_aa_pair(const ScoredCohort& train, const ProfitSpec& p);

/// Holdout outcome of one policy.
struct PolicyEvaluation {
  std::optional<double> tpr_l;
  std::optional<double> tpr_h;
  std::optional<double> fpr_l;
  std::optional<double> fpr_h;
  std::optional<double> repaid_share;  // TP / approvals, pooled over groups
  std::uint64_t approved = 0;
};

PolicyEvaluation evaluate_policy(const ScoredCohort& cohort, const PolicySpec& policy);

struct IntendedCutoffRow {
  double intended_cutoff = 0.0;
  Scheme scheme = Scheme::blind;
  PolicySpec policy;
  bool parity_reachable = true;
  PolicyEvaluation holdout;
};

/// Fixed-cutoff comparison: blind and affirmative information use the
/// intended cutoff for everyone; affirmative action keeps it for H and takes
/// the train-parity cutoff for L. Outcomes are measured on holdout.
std::vector<IntendedCutoffRow> intended_cutoff_sweep(const ScoredCohort& train, const ScoredCohort& holdout,
                                                     std::span<const double> intended_cutoffs);

struct ExperimentRow {
  double k = 0.0;
  Scheme scheme = Scheme::blind;
  PolicySpec policy;
  bool market_open = false;
  bool feasible = true;
  double train_profit = 0.0;
  double holdout_profit = 0.0;
  PolicyEvaluation holdout;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;  // k-major, schemes in kSchemes order

  const ExperimentRow& at(std::size_t k_index, Scheme s) const;
  std::size_t k_count() const { return rows.size() / std::size(kSchemes); }
  /// Smallest k from which the scheme's market stays closed through the end
  /// of the grid; nullopt when it is open at the last k.
  std::optional<double> market_closing_k(Scheme s) const;
};

/// Lender re-optimizes cutoffs on train for each k and scheme; outcomes are
/// measured on holdout. Both splits need base and enriched scores.
ExperimentResult run_endogenous_experiment(const ScoredCohort& train, const ScoredCohort& holdout,
                                           std::span<const double> k_grid, unsigned threads = 0);

/// `points` evenly spaced quantiles from `lo` to `hi` (linear interpolation
/// between order statistics).
std::vector<double> quantile_grid(std::span<const double> values, double lo, double hi, std::size_t points);

/// Parses "start:stop:step" (inclusive stop) or a comma-separated list.
std::vector<double> parse_grid(std::string_view text);

}  // namespace disparity
