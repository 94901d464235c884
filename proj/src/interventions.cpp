#include "disparity/interventions.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iterator>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "disparity/rational.hpp"
#include "disparity/text_io.hpp"

namespace disparity {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::size_t> rows_where(const ScoredCohort& c, Group g) { return c.rows_of(g); }

template <class T>
std::vector<T> gather(const std::vector<T>& v, const std::vector<std::size_t>& rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (const auto r : rows) out.push_back(v[r]);
  return out;
}

void require_scores(const ScoredCohort& c, bool enriched) {
  if (c.base_score.size() != c.size()) throw std::invalid_argument("cohort has no base scores");
  if (enriched && c.enriched_score.size() != c.size()) {
    throw std::invalid_argument("affirmative information needs enriched scores");
  }
}

}  // namespace

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::blind:
      return "blind";
    case Scheme::affirmative_action:
      return "affirmative_action";
    case Scheme::affirmative_information:
      return "affirmative_information";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  for (const Scheme s : kSchemes) {
    if (scheme_name(s) == name) return s;
  }
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

PolicySpec PolicySpec::blind(double cutoff) { return {Scheme::blind, cutoff, cutoff}; }
PolicySpec PolicySpec::affirmative_action(double cutoff_h, double cutoff_l) {
  return {Scheme::affirmative_action, cutoff_h, cutoff_l};
}
PolicySpec PolicySpec::affirmative_information(double cutoff) {
  return {Scheme::affirmative_information, cutoff, cutoff};
}

ScoreSource PolicySpec::source(Group g) const {
  return scheme == Scheme::affirmative_information && g == Group::low ? ScoreSource::enriched : ScoreSource::base;
}

void PolicySpec::validate() const {
  if (std::isnan(cutoff_h) || std::isnan(cutoff_l)) throw std::invalid_argument("cutoffs must not be NaN");
  if (scheme != Scheme::affirmative_action && cutoff_h != cutoff_l) {
    throw std::invalid_argument(std::string(scheme_name(scheme)) + " uses one common cutoff");
  }
}

void ProfitSpec::validate() const {
  if (!(k >= 0.0) || !std::isfinite(k)) throw std::invalid_argument("k must be a finite non-negative number");
}

std::vector<double> scheme_scores(const ScoredCohort& cohort, Scheme scheme) {
  const bool enriched = scheme == Scheme::affirmative_information;
  require_scores(cohort, enriched);
  std::vector<double> out = cohort.base_score;
  if (enriched) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (cohort.group[i] == Group::low) out[i] = cohort.enriched_score[i];
    }
  }
  return out;
}

std::vector<std::uint8_t> apply_policy(const ScoredCohort& cohort, const PolicySpec& policy) {
  policy.validate();
  const std::vector<double> scores = scheme_scores(cohort, policy.scheme);
  std::vector<std::uint8_t> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > policy.cutoff(cohort.group[i]) ? 1 : 0;
  return out;
}

double profit(std::span<const std::uint8_t> decisions, std::span<const std::uint8_t> labels, const ProfitSpec& p) {
  p.validate();
  if (decisions.size() != labels.size()) throw std::invalid_argument("decisions and labels differ in length");
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (!decisions[i]) continue;
    if (labels[i]) {
      ++tp;
    } else {
      ++fp;
    }
  }
  return static_cast<double>(tp) - p.k * static_cast<double>(fp);
}

namespace {

std::vector<double> sorted_unique(std::span<const double> scores) {
  std::vector<double> u(scores.begin(), scores.end());
  for (const double s : u) {
    if (std::isnan(s)) throw std::invalid_argument("scores must not be NaN");
  }
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

std::vector<double> cutoffs_from_unique(const std::vector<double>& u) {
  std::vector<double> c;
  c.reserve(u.size() + 1);
  c.push_back(-kInf);
  for (std::size_t i = 1; i < u.size(); ++i) {
    const double a = u[i - 1];
    const double b = u[i];
    const double mid = a + 0.5 * (b - a);
    // Adjacent doubles have no midpoint; a itself separates them under '>'.
    c.push_back(mid > a && mid < b ? mid : a);
  }
  c.push_back(kInf);
  return c;
}

}  // namespace

std::vector<double> candidate_cutoffs(std::span<const double> scores) {
  return cutoffs_from_unique(sorted_unique(scores));
}

CutoffTable::CutoffTable(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  unique_ = sorted_unique(scores);
  cutoffs_ = cutoffs_from_unique(unique_);
  const std::size_t m = unique_.size();
  // Candidate i (0 <= i < m) accepts unique scores with index >= i; candidate m accepts none.
  std::vector<std::uint64_t> pos(m, 0), neg(m, 0);
  for (std::size_t r = 0; r < scores.size(); ++r) {
    const auto j = static_cast<std::size_t>(std::lower_bound(unique_.begin(), unique_.end(), scores[r]) - unique_.begin());
    if (labels[r] > 1) throw std::invalid_argument("labels must be 0 or 1");
    (labels[r] ? pos : neg)[j] += 1;
  }
  tp_.assign(m + 1, 0);
  fp_.assign(m + 1, 0);
  for (std::size_t i = m; i-- > 0;) {
    tp_[i] = tp_[i + 1] + pos[i];
    fp_[i] = fp_[i + 1] + neg[i];
  }
}

std::size_t CutoffTable::index_above(double cutoff) const {
  if (std::isnan(cutoff)) throw std::invalid_argument("cutoff must not be NaN");
  return static_cast<std::size_t>(std::upper_bound(unique_.begin(), unique_.end(), cutoff) - unique_.begin());
}

std::uint64_t CutoffTable::tp_above(double cutoff) const { return tp_[index_above(cutoff)]; }
std::uint64_t CutoffTable::fp_above(double cutoff) const { return fp_[index_above(cutoff)]; }

CutoffChoice optimal_cutoff(const CutoffTable& table, const ProfitSpec& p) {
  p.validate();
  CutoffChoice best{kInf, -kInf, 0, 0};
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double value = static_cast<double>(table.tp(i)) - p.k * static_cast<double>(table.fp(i));
    if (value >= best.profit) best = {table.cutoff(i), value, table.tp(i), table.fp(i)};
  }
  return best;
}

CutoffChoice optimal_cutoff(std::span<const double> scores, std::span<const std::uint8_t> labels, const ProfitSpec& p) {
  if (scores.empty()) throw std::invalid_argument("optimal_cutoff: no training rows");
  return optimal_cutoff(CutoffTable(scores, labels), p);
}

ParityCutoff aa_cutoff_for_parity(const CutoffTable& low, const CutoffTable& high, double cutoff_h) {
  const std::uint64_t pos_l = low.positives();
  const std::uint64_t pos_h = high.positives();
  if (pos_l == 0) return {-kInf, false};
  const std::uint64_t tp_h = high.tp_above(cutoff_h);
  // TPR_L >= TPR_H  <=>  tp_l * P_H >= tp_h * P_L (with TPR_H = 0 when H has no positives).
  auto reaches = [&](std::uint64_t tp_l) {
    if (pos_h == 0) return true;
    return static_cast<uint128>(tp_l) * pos_h >= static_cast<uint128>(tp_h) * pos_l;
  };
  if (reaches(low.tp_above(cutoff_h))) return {cutoff_h, true};
  // TPR_L is non-increasing along the candidates; find the last one <= cutoff_h that still reaches.
  const auto& cuts = low.cutoffs();
  std::size_t hi = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), cutoff_h) - cuts.begin());
  std::size_t lo = 0;  // candidate 0 is -inf and always reaches
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (reaches(low.tp(mid))) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {cuts[lo], true};
}

namespace {

struct GroupTables {
  CutoffTable low;
  CutoffTable high;
};

GroupTables base_tables(const ScoredCohort& c) {
  require_scores(c, false);
  const auto rl = rows_where(c, Group::low);
  const auto rh = rows_where(c, Group::high);
  if (rl.empty() || rh.empty()) throw std::invalid_argument("both groups need training rows");
  return {CutoffTable(gather(c.base_score, rl), gather(c.label, rl)),
          CutoffTable(gather(c.base_score, rh), gather(c.label, rh))};
}

}  // namespace

ParityCutoff aa_cutoff_for_parity(const ScoredCohort& train, double cutoff_h) {
  const GroupTables t = base_tables(train);
  return aa_cutoff_for_parity(t.low, t.high, cutoff_h);
}

AffirmativeActionFrontier::AffirmativeActionFrontier(const CutoffTable& low, const CutoffTable& high) {
  std::vector<double> pooled;
  pooled.reserve(low.scores().size() + high.scores().size());
  std::merge(low.scores().begin(), low.scores().end(), high.scores().begin(), high.scores().end(),
             std::back_inserter(pooled));
  const std::vector<double> cuts = candidate_cutoffs(pooled);
  pairs_.reserve(cuts.size());
  for (const double ch : cuts) {
    const ParityCutoff pc = aa_cutoff_for_parity(low, high, ch);
    if (!pc.reachable) continue;
    AaPair pair;
    pair.cutoff_h = ch;
    pair.cutoff_l = pc.cutoff_l;
    pair.tp = high.tp_above(ch) + low.tp_above(pc.cutoff_l);
    pair.fp = high.fp_above(ch) + low.fp_above(pc.cutoff_l);
    pairs_.push_back(pair);
  }
}

AffirmativeActionFrontier::AffirmativeActionFrontier(const ScoredCohort& train)
    : AffirmativeActionFrontier(base_tables(train).low, base_tables(train).high) {}

AaPair AffirmativeActionFrontier::best(const ProfitSpec& p) const {
  p.validate();
  if (pairs_.empty()) return {kInf, kInf, 0.0, 0, 0, false};
  AaPair out;
  out.profit = -kInf;
  for (const AaPair& pair : pairs_) {
    const double value = static_cast<double>(pair.tp) - p.k * static_cast<double>(pair.fp);
    if (value >= out.profit) {
      out = pair;
      out.profit = value;
    }
  }
  return out;
}

AaPair optimal_aa_pair(const ScoredCohort& train, const ProfitSpec& p) {
  return AffirmativeActionFrontier(train).best(p);
}

PolicyEvaluation evaluate_policy(const ScoredCohort& cohort, const PolicySpec& policy) {
  const std::vector<std::uint8_t> decisions = apply_policy(cohort, policy);
  std::uint64_t tp = 0;
  CellCounts cells[2];
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    CellCounts& c = cells[static_cast<int>(cohort.group[i])];
    if (decisions[i]) {
      (cohort.label[i] ? c.tp : c.fp) += 1;
    } else {
      (cohort.label[i] ? c.fn : c.tn) += 1;
    }
  }
  PolicyEvaluation e;
  const CellCounts& l = cells[static_cast<int>(Group::low)];
  const CellCounts& h = cells[static_cast<int>(Group::high)];
  auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  e.tpr_l = ratio(l.tp, l.positives());
  e.tpr_h = ratio(h.tp, h.positives());
  e.fpr_l = ratio(l.fp, l.negatives());
  e.fpr_h = ratio(h.fp, h.negatives());
  tp = l.tp + h.tp;
  e.approved = l.predicted_positive() + h.predicted_positive();
  e.repaid_share = ratio(tp, e.approved);
  return e;
}

std::vector<IntendedCutoffRow> intended_cutoff_sweep(const ScoredCohort& train, const ScoredCohort& holdout,
                                                     std::span<const double> intended_cutoffs) {
  const GroupTables t = base_tables(train);
  std::vector<IntendedCutoffRow> rows;
  rows.reserve(intended_cutoffs.size() * std::size(kSchemes));
  for (const double c : intended_cutoffs) {
    for (const Scheme s : kSchemes) {
      IntendedCutoffRow row;
      row.intended_cutoff = c;
      row.scheme = s;
      switch (s) {
        case Scheme::blind:
          row.policy = PolicySpec::blind(c);
          break;
        case Scheme::affirmative_action: {
          const ParityCutoff pc = aa_cutoff_for_parity(t.low, t.high, c);
          row.parity_reachable = pc.reachable;
          row.policy = PolicySpec::affirmative_action(c, pc.cutoff_l);
          break;
        }
        case Scheme::affirmative_information:
          row.policy = PolicySpec::affirmative_information(c);
          break;
      }
      row.holdout = evaluate_policy(holdout, row.policy);
      rows.push_back(row);
    }
  }
  return rows;
}

const ExperimentRow& ExperimentResult::at(std::size_t k_index, Scheme s) const {
  return rows.at(k_index * std::size(kSchemes) + static_cast<std::size_t>(s));
}

std::optional<double> ExperimentResult::market_closing_k(Scheme s) const {
  std::optional<double> closing;
  for (std::size_t i = 0; i < k_count(); ++i) {
    const ExperimentRow& r = at(i, s);
    if (r.market_open) {
      closing.reset();
    } else if (!closing) {
      closing = r.k;
    }
  }
  return closing;
}

ExperimentResult run_endogenous_experiment(const ScoredCohort& train, const ScoredCohort& holdout,
                                           std::span<const double> k_grid, unsigned threads) {
  require_scores(train, true);
  require_scores(holdout, true);
  for (const double k : k_grid) ProfitSpec{k}.validate();

  const CutoffTable blind_table(train.base_score, train.label);
  const std::vector<double> ai_scores = scheme_scores(train, Scheme::affirmative_information);
  const CutoffTable ai_table(ai_scores, train.label);
  const GroupTables groups = base_tables(train);
  const AffirmativeActionFrontier frontier(groups.low, groups.high);

  auto evaluate_k = [&](double k) {
    std::vector<ExperimentRow> out;
    const ProfitSpec p{k};
    for (const Scheme s : kSchemes) {
      ExperimentRow row;
      row.k = k;
      row.scheme = s;
      std::uint64_t approved = 0;
      if (s == Scheme::affirmative_action) {
        const AaPair pair = frontier.best(p);
        row.policy = PolicySpec::affirmative_action(pair.cutoff_h, pair.cutoff_l);
        row.feasible = pair.feasible;
        row.train_profit = pair.feasible ? pair.profit : 0.0;
        approved = pair.tp + pair.fp;
      } else {
        const CutoffChoice choice = optimal_cutoff(s == Scheme::blind ? blind_table : ai_table, p);
        row.policy = s == Scheme::blind ? PolicySpec::blind(choice.cutoff)
                                        : PolicySpec::affirmative_information(choice.cutoff);
        row.train_profit = choice.profit;
        approved = choice.tp + choice.fp;
      }
      row.market_open = approved > 0;
      row.holdout = evaluate_policy(holdout, row.policy);
      const auto decisions = apply_policy(holdout, row.policy);
      row.holdout_profit = profit(decisions, holdout.label, p);
      out.push_back(row);
    }
    return out;
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(threads ? threads : std::max(1u, std::thread::hardware_concurrency()),
                                      static_cast<unsigned>(k_grid.size())));
  std::vector<std::vector<ExperimentRow>> per_k(k_grid.size());
  std::vector<std::future<void>> jobs;
  for (unsigned w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < k_grid.size(); i += workers) per_k[i] = evaluate_k(k_grid[i]);
    }));
  }
  for (auto& j : jobs) j.get();

  ExperimentResult result;
  for (auto& rows : per_k) {
    for (auto& r : rows) result.rows.push_back(std::move(r));
  }
  return result;
}

std::vector<double> quantile_grid(std::span<const double> values, double lo, double hi, std::size_t points) {
  if (values.empty()) throw std::invalid_argument("quantile_grid: no values");
  if (points < 2 || !(0.0 <= lo && lo < hi && hi <= 1.0)) throw std::invalid_argument("quantile_grid: bad range");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (std::size_t i = 0; i < points; ++i) {
    const double q = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto j = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(j);
    out.push_back(j + 1 < v.size() ? v[j] + frac * (v[j + 1] - v[j]) : v[j]);
  }
  return out;
}

std::vector<double> parse_grid(std::string_view text) {
  auto number = [&](std::string_view field) {
    double x = 0.0;
    if (!parse_double(trim(field), x) || !std::isfinite(x)) {
      throw std::invalid_argument("bad grid value '" + std::string(field) + "'");
    }
    return x;
  };
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (std::size_t pos; (pos = text.find(':', start)) != std::string_view::npos; start = pos + 1) {
      parts.push_back(text.substr(start, pos - start));
    }
    parts.push_back(text.substr(start));
    if (parts.size() != 3) throw std::invalid_argument("grid range must be start:stop:step");
    const double a = number(parts[0]), b = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || b < a) throw std::invalid_argument("grid range needs step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * step);
    return out;
  }
  for (const auto field : split_csv(text)) out.push_back(number(field));
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

}  // namespace disparity
