#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace disparity {

/// Protected attribute. `low` is the group with the smaller base rate.
enum class Group : std::uint8_t { low = 0, high = 1 };

inline constexpr std::array<Group, 2> kGroups{Group::low, Group::high};

char group_tag(Group g);
/// Parses "L" / "H" (case-sensitive). Throws std::invalid_argument otherwise.
Group parse_group(std::string_view tag);

/// Counts over the (Y, y_hat) cells for one group.
struct CellCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  std::uint64_t positives() const { return tp + fn; }
  std::uint64_t negatives() const { return fp + tn; }
  std::uint64_t predicted_positive() const { return tp + fp; }
  std::uint64_t predicted_negative() const { return fn + tn; }

  CellCounts scaled(std::uint64_t factor) const {
    return {tp * factor, fp * factor, fn * factor, tn * factor};
  }

  friend bool operator==(const CellCounts&, const CellCounts&) = default;
};

/// Per-group confusion counts. `swapped` records that the input's L/H tags
/// were exchanged to restore the mu_L < mu_H convention.
struct GroupConfusion {
  CellCounts low;
  CellCounts high;
  bool swapped = false;

  const CellCounts& operator[](Group g) const { return g == Group::low ? low : high; }
  CellCounts& operator[](Group g) { return g == Group::low ? low : high; }

  std::uint64_t total() const { return low.total() + high.total(); }

  friend bool operator==(const GroupConfusion&, const GroupConfusion&) = default;
};

/// Rates for one group. An empty optional means the conditioning cell is
/// empty and the rate is undefined.
struct GroupRates {
  std::optional<double> tpr;
  std::optional<double> fpr;
  std::optional<double> ppv;
  std::optional<double> npv;
  std::optional<double> base_rate;
  std::optional<double> positive_rate;
  double share = 0.0;

  std::optional<double> fnr() const {
    if (!tpr) return std::nullopt;
    return 1.0 - *tpr;
  }
};

struct GroupMetrics {
  GroupRates low;
  GroupRates high;

  const GroupRates& operator[](Group g) const { return g == Group::low ? low : high; }
};

/// |TPR - PPV*mu_hat/mu|, |FPR - (1-PPV)*mu_hat/(1-mu)|, |FNR - (1-NPV)*(1-mu_hat)/mu|.
struct IdentityResiduals {
  double tpr = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;

  double max() const;
};

struct ResidualsByGroup {
  std::optional<IdentityResiduals> low;
  std::optional<IdentityResiduals> high;
};

/// Tallies the confusion cells of each group. Throws std::invalid_argument on
/// empty input, length mismatch, or a label/prediction outside {0, 1}.
GroupConfusion confusion_counts(std::span<const std::uint8_t> labels,
                                std::span<const std::uint8_t> predictions,
                                std::span<const Group> groups);

/// Returns the confusion with L/H exchanged when the low group has the larger
/// base rate; `swapped` is toggled in that case.
GroupConfusion normalize_group_order(const GroupConfusion& c);

GroupRates rates_for(const CellCounts& cells, std::uint64_t population);
GroupMetrics group_rates(const GroupConfusion& c);

/// P[G=L | y_hat=1] - P[G=L | Y=1]. Empty when there are no positive
/// classifications or no positive types.
std::optional<double> over_representation_gap(const GroupConfusion& c);

/// Exact sign of the over-representation gap by integer cross-multiplication:
/// +1 when L is over-represented, 0 at equality, -1 otherwise. Empty when undefined.
std::optional<int> over_representation_sign(const GroupConfusion& c);

std::optional<IdentityResiduals> bayes_identity_residuals(const GroupRates& r);
ResidualsByGroup bayes_identity_residuals(const GroupMetrics& m);

}  // namespace disparity
