#include <doctest.h>

#include <algorithm>
#include <array>

#include "disparity/theorem_oracle.hpp"

using namespace disparity;

namespace {

// Brute-force reference written directly from the definitions, using
// cross-multiplied integer comparisons on small counts.
struct Frac {
  long long n, d;
};
int cmp(Frac a, Frac b) {
  const long long l = a.n * b.d, r = b.n * a.d;
  return (l > r) - (l < r);
}

struct Reference {
  bool valid, prop_antecedent, thm_antecedent, over, informative;
};

Reference reference(const std::array<long long, 8>& x) {
  // x = L.tp, L.fp, L.fn, L.tn, H.tp, H.fp, H.fn, H.tn
  const long long ltp = x[0], lfp = x[1], lfn = x[2], ltn = x[3];
  const long long htp = x[4], hfp = x[5], hfn = x[6], htn = x[7];
  Reference r{};
  auto inside = [](long long num, long long den) { return den > 0 && num > 0 && num < den; };
  const bool rates_ok = inside(ltp, ltp + lfn) && inside(lfp, lfp + ltn) && inside(htp, htp + hfn) && inside(hfp, hfp + htn);
  const long long nl = ltp + lfp + lfn + ltn, nh = htp + hfp + hfn + htn;
  r.valid = rates_ok && cmp({ltp + lfn, nl}, {htp + hfn, nh}) < 0;
  if (!r.valid) return r;
  const int tpr = cmp({ltp, ltp + lfn}, {htp, htp + hfn});
  const int fpr = cmp({lfp, lfp + ltn}, {hfp, hfp + htn});
  r.prop_antecedent = tpr >= 0 && fpr >= 0;
  r.thm_antecedent = tpr >= 0;
  r.over = cmp({ltp + lfp, ltp + lfp + htp + hfp}, {ltp + lfn, ltp + lfn + htp + hfn}) > 0;
  r.informative = cmp({ltn, ltn + lfn}, {htn, htn + hfn}) > 0 && cmp({ltp, ltp + lfp}, {htp, htp + hfp}) >= 0;
  return r;
}

CellPopulation from_array(const std::array<long long, 8>& x) {
  auto u = [](long long v) { return static_cast<std::uint64_t>(v); };
  return {{u(x[0]), u(x[1]), u(x[2]), u(x[3])}, {u(x[4]), u(x[5]), u(x[6]), u(x[7])}};
}

template <class F>
void for_each_tuple(long long max_cell, F&& f) {
  std::array<long long, 8> x{};
  std::function<void(int)> rec = [&](int i) {
    if (i == 8) {
      f(x);
      return;
    }
    for (long long v = 0; v <= max_cell; ++v) {
      x[static_cast<std::size_t>(i)] = v;
      rec(i + 1);
    }
  };
  rec(0);
}

}  // namespace

TEST_SUITE("theorem_oracle") {
  TEST_CASE("no valid population with unit cells") {
    CHECK(enumerate_populations(1).empty());
    CHECK(enumerate_populations(0).empty());
  }

  TEST_CASE("enumeration matches brute force over [0, max_cell]") {
    for (long long m = 2; m <= 3; ++m) {
      std::vector<CellPopulation> expected;
      for_each_tuple(m, [&](const std::array<long long, 8>& x) {
        if (reference(x).valid) expected.push_back(from_array(x));
      });
      const auto got = enumerate_populations(static_cast<std::uint32_t>(m));
      CHECK(got.size() == expected.size());
      CHECK(got == expected);
      CHECK(enumerate_populations(static_cast<std::uint32_t>(m)).size() == got.size());
    }
  }

  TEST_CASE("max_cell 2 rates come from one or two cells on each side") {
    const auto pops = enumerate_populations(2);
    for (const auto& p : pops) {
      for (const CellCounts* c : {&p.low, &p.high}) {
        CHECK((c->tp >= 1 && c->fn >= 1 && c->fp >= 1 && c->tn >= 1));
        for (const auto [num, den] : {std::pair{c->tp, c->positives()}, std::pair{c->fp, c->negatives()}}) {
          // Each rate is 1/3, 1/2 or 2/3.
          CHECK(6 * num % den == 0);
          CHECK((6 * num / den >= 2 && 6 * num / den <= 4));
        }
      }
    }
    const CellPopulation half{{1, 2, 1, 2}, {2, 1, 2, 1}};
    CHECK(std::find(pops.begin(), pops.end(), half) != pops.end());
    CHECK_FALSE((CellPopulation{{1, 1, 1, 1}, {1, 1, 1, 1}}.is_valid()));
  }

  TEST_CASE("verdicts agree with the reference at max_cell 4") {
    std::uint64_t checked = 0;
    for_each_tuple(4, [&](const std::array<long long, 8>& x) {
      const Reference r = reference(x);
      if (!r.valid) return;
      const CellPopulation p = from_array(x);
      const ImplicationVerdict v1 = check_proposition1(p);
      const ImplicationVerdict v2 = check_theorem1(p);
      CHECK(v1.antecedent == r.prop_antecedent);
      CHECK(v1.over_represented == r.over);
      CHECK(v1.holds == (!r.prop_antecedent || r.over));
      CHECK(v2.antecedent == r.thm_antecedent);
      CHECK(v2.more_informative == r.informative);
      CHECK(v2.holds == (!r.thm_antecedent || r.over || r.informative));
      ++checked;
    });
    CHECK(checked == exhaustive_sweep(4).populations);
  }

  TEST_CASE("vacuous antecedent") {
    // TPR_L = 1/3 < TPR_H = 2/3.
    const CellPopulation p{{1, 1, 2, 3}, {2, 1, 1, 1}};
    REQUIRE(p.is_valid());
    CHECK_FALSE(check_proposition1(p).antecedent);
    CHECK(check_proposition1(p).holds);
    CHECK_FALSE(check_theorem1(p).antecedent);
  }

  TEST_CASE("equal rates with lower base rate force over-representation") {
    // Both groups: TPR = 1/2, FPR = 1/4; L has fewer positive types.
    const CellPopulation p{{1, 2, 1, 6}, {3, 1, 3, 3}};
    REQUIRE(p.is_valid());
    const auto v = check_proposition1(p);
    CHECK(v.antecedent);
    CHECK(v.over_represented);
    CHECK(v.holds);
  }

  TEST_CASE("each disjunct can carry the theorem") {
    const WitnessSet w = find_witnesses(6);
    REQUIRE(w.complete());
    const auto a = check_theorem1(*w.over_represented_only);
    CHECK((a.antecedent && a.over_represented && !a.more_informative));
    const auto b = check_theorem1(*w.informative_only);
    CHECK((b.antecedent && !b.over_represented && b.more_informative));
    const auto c = check_theorem1(*w.neither);
    CHECK((!c.antecedent && !c.over_represented && !c.more_informative));
    CHECK(find_witnesses(4).neither.has_value());
  }

  TEST_CASE("verdicts are scale invariant") {
    for (const auto& p : enumerate_populations(3)) {
      for (const std::uint64_t k : {2ULL, 7ULL, 1000ULL}) {
        const auto s = p.scaled(k);
        const auto a = check_theorem1(p), b = check_theorem1(s);
        CHECK(a.antecedent == b.antecedent);
        CHECK(a.over_represented == b.over_represented);
        CHECK(a.more_informative == b.more_informative);
        CHECK(check_proposition1(p).antecedent == check_proposition1(s).antecedent);
        CHECK(is_npv_tie_boundary(p) == is_npv_tie_boundary(s));
      }
    }
  }

  TEST_CASE("sweeps are clean and deterministic") {
    const SweepReport e = exhaustive_sweep(5, 3);
    CHECK(e.clean());
    CHECK(e.populations == exhaustive_sweep(5, 1).populations);
    CHECK(e.npv_tie_boundary == exhaustive_sweep(5, 1).npv_tie_boundary);
    const SweepReport r = random_sweep(20000, 10000, 42);
    CHECK(r.clean());
    CHECK(r.populations == 20000);
    CHECK(r.thm1_antecedent == random_sweep(20000, 10000, 42).thm1_antecedent);
  }

  TEST_CASE("report merge adds counts") {
    SweepReport a = exhaustive_sweep(3);
    const SweepReport b = exhaustive_sweep(3);
    a.merge(b);
    CHECK(a.populations == 2 * b.populations);
    CHECK(a.prop1_antecedent == 2 * b.prop1_antecedent);
  }
}
