#include "disparity/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "disparity/rational.hpp"

namespace disparity {

char group_tag(Group g) { return g == Group::low ? 'L' : 'H'; }

Group parse_group(std::string_view tag) {
  if (tag == "L") return Group::low;
  if (tag == "H") return Group::high;
  throw std::invalid_argument("unknown group tag '" + std::string(tag) + "' (expected L or H)");
}

double IdentityResiduals::max() const { return std::max({tpr, fpr, fnr}); }

GroupConfusion confusion_counts(std::span<const std::uint8_t> labels,
                                std::span<const std::uint8_t> predictions,
                                std::span<const Group> groups) {
  if (labels.empty()) throw std::invalid_argument("confusion_counts: empty input");
  if (labels.size() != predictions.size() || labels.size() != groups.size()) {
    throw std::invalid_argument("confusion_counts: labels, predictions and groups differ in length");
  }
  GroupConfusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 1 || predictions[i] > 1) {
      throw std::invalid_argument("confusion_counts: non-binary value at row " + std::to_string(i));
    }
    if (groups[i] != Group::low && groups[i] != Group::high) {
      throw std::invalid_argument("confusion_counts: unknown group at row " + std::to_string(i));
    }
    CellCounts& cells = c[groups[i]];
    if (labels[i] == 1) {
      ++(predictions[i] == 1 ? cells.tp : cells.fn);
    } else {
      ++(predictions[i] == 1 ? cells.fp : cells.tn);
    }
  }
  return c;
}

GroupConfusion normalize_group_order(const GroupConfusion& c) {
  if (c.low.total() == 0 || c.high.total() == 0) return c;
  const Ratio mu_low{c.low.positives(), c.low.total()};
  const Ratio mu_high{c.high.positives(), c.high.total()};
  if (compare(mu_low, mu_high) <= 0) return c;
  return GroupConfusion{c.high, c.low, !c.swapped};
}

namespace {

std::optional<double> safe_ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

GroupRates rates_for(const CellCounts& cells, std::uint64_t population) {
  GroupRates r;
  r.tpr = safe_ratio(cells.tp, cells.positives());
  r.fpr = safe_ratio(cells.fp, cells.negatives());
  r.ppv = safe_ratio(cells.tp, cells.predicted_positive());
  r.npv = safe_ratio(cells.tn, cells.predicted_negative());
  r.base_rate = safe_ratio(cells.positives(), cells.total());
  r.positive_rate = safe_ratio(cells.predicted_positive(), cells.total());
  r.share = population == 0 ? 0.0 : static_cast<double>(cells.total()) / static_cast<double>(population);
  return r;
}

GroupMetrics group_rates(const GroupConfusion& c) {
  const auto n = c.total();
  return {rates_for(c.low, n), rates_for(c.high, n)};
}

std::optional<double> over_representation_gap(const GroupConfusion& c) {
  const auto predicted = c.low.predicted_positive() + c.high.predicted_positive();
  const auto positives = c.low.positives() + c.high.positives();
  if (predicted == 0 || positives == 0) return std::nullopt;
  return static_cast<double>(c.low.predicted_positive()) / static_cast<double>(predicted) -
         static_cast<double>(c.low.positives()) / static_cast<double>(positives);
}

std::optional<int> over_representation_sign(const GroupConfusion& c) {
  const auto predicted = c.low.predicted_positive() + c.high.predicted_positive();
  const auto positives = c.low.positives() + c.high.positives();
  if (predicted == 0 || positives == 0) return std::nullopt;
  return compare(Ratio{c.low.predicted_positive(), predicted}, Ratio{c.low.positives(), positives});
}

std::optional<IdentityResiduals> bayes_identity_residuals(const GroupRates& r) {
  if (!r.tpr || !r.fpr || !r.ppv || !r.npv || !r.base_rate || !r.positive_rate) return std::nullopt;
  const double mu = *r.base_rate;
  const double mu_hat = *r.positive_rate;
  // tpr/fpr defined already rules out mu in {0, 1}.
  IdentityResiduals res;
  res.tpr = std::abs(*r.tpr - *r.ppv * mu_hat / mu);
  res.fpr = std::abs(*r.fpr - (1.0 - *r.ppv) * mu_hat / (1.0 - mu));
  res.fnr = std::abs(*r.fnr() - (1.0 - *r.npv) * (1.0 - mu_hat) / mu);
  return res;
}

ResidualsByGroup bayes_identity_residuals(const GroupMetrics& m) {
  return {bayes_identity_residuals(m.low), bayes_identity_residuals(m.high)};
}

}  // namespace disparity
