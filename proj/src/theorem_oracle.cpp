#include "disparity/theorem_oracle.hpp"

#include <algorithm>
#include <future>
#include <stdexcept>
#include <thread>

#include "disparity/random.hpp"
#include "disparity/rational.hpp"

namespace disparity {

namespace {

Ratio tpr(const CellCounts& c) { return {c.tp, c.positives()}; }
Ratio fpr(const CellCounts& c) { return {c.fp, c.negatives()}; }
Ratio ppv(const CellCounts& c) { return {c.tp, c.predicted_positive()}; }
Ratio npv(const CellCounts& c) { return {c.tn, c.predicted_negative()}; }
Ratio base_rate(const CellCounts& c) { return {c.positives(), c.total()}; }

bool strictly_inside_unit(Ratio r) { return r.num > 0 && r.num < r.den; }

bool over_represented(const CellPopulation& p) {
  const auto sign = over_representation_sign(p.confusion());
  return sign && *sign > 0;
}

}  // namespace

bool CellPopulation::is_valid() const {
  for (const CellCounts* c : {&low, &high}) {
    if (c->positives() == 0 || c->negatives() == 0) return false;
    if (!strictly_inside_unit(tpr(*c)) || !strictly_inside_unit(fpr(*c))) return false;
  }
  return compare(base_rate(low), base_rate(high)) < 0;
}

ImplicationVerdict check_proposition1(const CellPopulation& p) {
  ImplicationVerdict v;
  v.antecedent = compare(tpr(p.low), tpr(p.high)) >= 0 && compare(fpr(p.low), fpr(p.high)) >= 0;
  v.over_represented = over_represented(p);
  v.holds = !v.antecedent || v.over_represented;
  return v;
}

ImplicationVerdict check_theorem1(const CellPopulation& p) {
  ImplicationVerdict v;
  v.antecedent = compare(tpr(p.low), tpr(p.high)) >= 0;
  v.over_represented = over_represented(p);
  v.more_informative = compare(npv(p.low), npv(p.high)) > 0 && compare(ppv(p.low), ppv(p.high)) >= 0;
  v.holds = !v.antecedent || v.over_represented || v.more_informative;
  return v;
}

bool is_npv_tie_boundary(const CellPopulation& p) {
  return compare(npv(p.low), npv(p.high)) == 0 && compare(ppv(p.low), ppv(p.high)) > 0;
}

namespace {

// Cells of a valid population are all >= 1, so values below 1 are never visited.
void visit_with_first_cell(std::uint32_t first, std::uint32_t max_cell,
                           const std::function<void(const CellPopulation&)>& visit) {
  CellPopulation p;
  p.low.tp = first;
  for (p.low.fp = 1; p.low.fp <= max_cell; ++p.low.fp)
    for (p.low.fn = 1; p.low.fn <= max_cell; ++p.low.fn)
      for (p.low.tn = 1; p.low.tn <= max_cell; ++p.low.tn)
        for (p.high.tp = 1; p.high.tp <= max_cell; ++p.high.tp)
          for (p.high.fp = 1; p.high.fp <= max_cell; ++p.high.fp)
            for (p.high.fn = 1; p.high.fn <= max_cell; ++p.high.fn)
              for (p.high.tn = 1; p.high.tn <= max_cell; ++p.high.tn)
                if (p.is_valid()) visit(p);
}

void check_into(SweepReport& report, const CellPopulation& p) {
  ++report.populations;
  const auto prop = check_proposition1(p);
  const auto thm = check_theorem1(p);
  if (prop.antecedent) ++report.prop1_antecedent;
  if (thm.antecedent) ++report.thm1_antecedent;
  if (is_npv_tie_boundary(p)) ++report.npv_tie_boundary;
  if (!prop.holds) {
    ++report.prop1_violations;
    if (report.prop1_counterexamples.size() < SweepReport::kMaxStoredCounterexamples)
      report.prop1_counterexamples.push_back(p);
  }
  if (!thm.holds) {
    ++report.thm1_violations;
    if (report.thm1_counterexamples.size() < SweepReport::kMaxStoredCounterexamples)
      report.thm1_counterexamples.push_back(p);
  }
}

}  // namespace

void SweepReport::record(const CellPopulation& p) { check_into(*this, p); }

void SweepReport::merge(const SweepReport& other) {
  populations += other.populations;
  prop1_antecedent += other.prop1_antecedent;
  thm1_antecedent += other.thm1_antecedent;
  npv_tie_boundary += other.npv_tie_boundary;
  prop1_violations += other.prop1_violations;
  thm1_violations += other.thm1_violations;
  for (const auto& p : other.prop1_counterexamples)
    if (prop1_counterexamples.size() < kMaxStoredCounterexamples) prop1_counterexamples.push_back(p);
  for (const auto& p : other.thm1_counterexamples)
    if (thm1_counterexamples.size() < kMaxStoredCounterexamples) thm1_counterexamples.push_back(p);
}

void for_each_population(std::uint32_t max_cell, const std::function<void(const CellPopulation&)>& visit) {
  for (std::uint32_t first = 1; first <= max_cell; ++first) visit_with_first_cell(first, max_cell, visit);
}

std::vector<CellPopulation> enumerate_populations(std::uint32_t max_cell) {
  std::vector<CellPopulation> out;
  for_each_population(max_cell, [&](const CellPopulation& p) { out.push_back(p); });
  return out;
}

SweepReport exhaustive_sweep(std::uint32_t max_cell, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<SweepReport> results(max_cell);
  // Slices are keyed by the first cell and merged in slice order, so the
  // report does not depend on scheduling.
  for (std::uint32_t begin = 1; begin <= max_cell; begin += threads) {
    const std::uint32_t end = std::min<std::uint32_t>(max_cell, begin + threads - 1);
    std::vector<std::future<SweepReport>> batch;
    for (std::uint32_t first = begin; first <= end; ++first) {
      batch.push_back(std::async(std::launch::async, [first, max_cell] {
        SweepReport r;
        visit_with_first_cell(first, max_cell, [&](const CellPopulation& p) { check_into(r, p); });
        return r;
      }));
    }
    for (std::uint32_t first = begin; first <= end; ++first) results[first - 1] = batch[first - begin].get();
  }
  SweepReport total;
  for (const auto& r : results) total.merge(r);
  return total;
}

SweepReport random_sweep(std::uint64_t trials, std::uint32_t max_cell, std::uint64_t seed) {
  if (max_cell < 2) throw std::invalid_argument("random_sweep: max_cell must be at least 2");
  Rng rng(seed);
  SweepReport report;
  std::uint64_t done = 0;
  while (done < trials) {
    CellPopulation p;
    for (CellCounts* c : {&p.low, &p.high}) {
      c->tp = rng.uniform_int(1, max_cell);
      c->fp = rng.uniform_int(1, max_cell);
      c->fn = rng.uniform_int(1, max_cell);
      c->tn = rng.uniform_int(1, max_cell);
    }
    if (!p.is_valid()) {
      std::swap(p.low, p.high);
      if (!p.is_valid()) continue;  // equal base rates
    }
    check_into(report, p);
    ++done;
  }
  return report;
}

WitnessSet find_witnesses(std::uint32_t max_cell) {
  WitnessSet w;
  for_each_population(max_cell, [&](const CellPopulation& p) {
    if (w.complete()) return;
    const auto v = check_theorem1(p);
    if (v.antecedent) {
      if (v.over_represented && !v.more_informative && !w.over_represented_only) w.over_represented_only = p;
      if (v.more_informative && !v.over_represented && !w.informative_only) w.informative_only = p;
    } else if (!v.over_represented && !v.more_informative && !w.neither) {
      w.neither = p;
    }
  });
  if (!w.complete()) {
    throw std::runtime_error("find_witnesses: a witness class is empty up to max_cell=" + std::to_string(max_cell));
  }
  return w;
}

}  // namespace disparity
