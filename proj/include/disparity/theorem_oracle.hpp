#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "disparity/metrics.hpp"

namespace disparity {

/// Eight cell counts over {L, H} x {Y=0, 1} x {y_hat=0, 1}.
///
/// A population is valid when both groups have TPR and FPR strictly inside
/// (0, 1), which forces every cell to be at least 1, and mu_L < mu_H.
struct CellPopulation {
  CellCounts low;
  CellCounts high;

  bool is_valid() const;
  GroupConfusion confusion() const { return {low, high, false}; }
  CellPopulation scaled(std::uint64_t factor) const { return {low.scaled(factor), high.scaled(factor)}; }

  friend bool operator==(const CellPopulation&, const CellPopulation&) = default;
};

/// Which parts of a theorem's statement hold for one population. All
/// comparisons are exact on counts.
struct ImplicationVerdict {
  bool antecedent = false;
  bool over_represented = false;  // condition (i)
  bool more_informative = false;  // condition (ii), Theorem only
  bool holds = true;
};

/// TPR_L >= TPR_H and FPR_L >= FPR_H imply P[L | y_hat=1] > P[L | Y=1].
ImplicationVerdict check_proposition1(const CellPopulation& p);

/// TPR_L >= TPR_H implies (i) over-representation or
/// (ii) NPV_L > NPV_H and PPV_L >= PPV_H.
ImplicationVerdict check_theorem1(const CellPopulation& p);

/// NPV_L == NPV_H with PPV_L > PPV_H: the boundary the Theorem's strict/weak
/// pairing leaves undiscussed. Counted, not interpreted.
bool is_npv_tie_boundary(const CellPopulation& p);

/// Visits every valid population with cells in [0, max_cell], in
/// lexicographic order of (L.tp, L.fp, L.fn, L.tn, H.tp, H.fp, H.fn, H.tn).
void for_each_population(std::uint32_t max_cell, const std::function<void(const CellPopulation&)>& visit);

/// Materialized form of for_each_population; use for small bounds only.
std::vector<CellPopulation> enumerate_populations(std::uint32_t max_cell);

struct SweepReport {
  std::uint64_t populations = 0;
  std::uint64_t prop1_antecedent = 0;
  std::uint64_t thm1_antecedent = 0;
  std::uint64_t npv_tie_boundary = 0;
  std::uint64_t prop1_violations = 0;
  std::uint64_t thm1_violations = 0;
  // At most kMaxStoredCounterexamples of each are kept.
  std::vector<CellPopulation> prop1_counterexamples;
  std::vector<CellPopulation> thm1_counterexamples;

  static constexpr std::size_t kMaxStoredCounterexamples = 64;

  bool clean() const { return prop1_violations == 0 && thm1_violations == 0; }
  void record(const CellPopulation& p);
  void merge(const SweepReport& other);
};

/// Checks both results over the full enumeration. Work is split across
/// `threads` workers by the value of the first cell.
SweepReport exhaustive_sweep(std::uint32_t max_cell, unsigned threads = 0);

/// Checks both results on `trials` random valid populations with cells
/// drawn uniformly from [1, max_cell].
SweepReport random_sweep(std::uint64_t trials, std::uint32_t max_cell, std::uint64_t seed);

struct WitnessSet {
  /// TPR_L >= TPR_H with (i) true and (ii) false.
  std::optional<CellPopulation> over_represented_only;
  /// TPR_L >= TPR_H with (ii) true and (i) false.
  std::optional<CellPopulation> informative_only;
  /// TPR_L < TPR_H with neither (i) nor (ii).
  std::optional<CellPopulation> neither;

  bool complete() const { return over_represented_only && informative_only && neither; }
};

/// Searches the enumeration up to `max_cell` for one witness of each class,
/// returning the first in enumeration order. Throws std::runtime_error when a
/// class is empty.
WitnessSet find_witnesses(std::uint32_t max_cell = 6);

}  // namespace disparity
