#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "disparity/metrics.hpp"
#include "disparity/random.hpp"

using namespace disparity;

namespace {

// Independent row-by-row tally used as the counting oracle.
struct Tally {
  std::uint64_t cells[2][2][2] = {};  // [group][label][prediction]
};

Tally tally(const std::vector<std::uint8_t>& y, const std::vector<std::uint8_t>& p, const std::vector<Group>& g) {
  Tally t;
  for (std::size_t i = 0; i < y.size(); ++i) t.cells[static_cast<int>(g[i])][y[i]][p[i]] += 1;
  return t;
}

GroupConfusion make(CellCounts low, CellCounts high) { return {low, high, false}; }

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("one individual per cell") {
    const std::vector<std::uint8_t> labels{1, 1, 0, 0}, preds{1, 0, 1, 0};
    const std::vector<Group> groups{Group::low, Group::low, Group::high, Group::high};
    const GroupConfusion c = confusion_counts(labels, preds, groups);
    CHECK(c.low.tp == 1);
    CHECK(c.low.fn == 1);
    CHECK(c.low.fp == 0);
    CHECK(c.low.tn == 0);
    CHECK(c.high.fp == 1);
    CHECK(c.high.tn == 1);
    CHECK(c.high.tp == 0);
    CHECK(c.high.fn == 0);
  }

  TEST_CASE("perfect single-group classifier") {
    const std::vector<std::uint8_t> ones(7, 1);
    const std::vector<Group> groups(7, Group::low);
    const GroupConfusion c = confusion_counts(ones, ones, groups);
    CHECK(c.low.tp == 7);
    CHECK(c.low.fp + c.low.fn + c.low.tn == 0);
    CHECK(c.high.total() == 0);
  }

  TEST_CASE("random cohort matches row tally") {
    Rng rng(7);
    std::vector<std::uint8_t> y, p;
    std::vector<Group> g;
    for (int i = 0; i < 1000; ++i) {
      y.push_back(rng.uniform() < 0.4);
      p.push_back(rng.uniform() < 0.5);
      g.push_back(rng.uniform() < 0.3 ? Group::low : Group::high);
    }
    const GroupConfusion c = confusion_counts(y, p, g);
    const Tally t = tally(y, p, g);
    CHECK(c.total() == 1000);
    for (const Group grp : kGroups) {
      const int k = static_cast<int>(grp);
      CHECK(c[grp].tp == t.cells[k][1][1]);
      CHECK(c[grp].fn == t.cells[k][1][0]);
      CHECK(c[grp].fp == t.cells[k][0][1]);
      CHECK(c[grp].tn == t.cells[k][0][0]);
    }
  }

  TEST_CASE("input validation") {
    const std::vector<std::uint8_t> a{1, 0}, b{1};
    const std::vector<Group> g2{Group::low, Group::high};
    CHECK_THROWS_AS(confusion_counts(a, b, g2), std::invalid_argument);
    CHECK_THROWS_AS(confusion_counts({}, {}, {}), std::invalid_argument);
    const std::vector<std::uint8_t> bad{2, 0};
    CHECK_THROWS_AS(confusion_counts(bad, a, g2), std::invalid_argument);
    CHECK_THROWS_AS(parse_group("X"), std::invalid_argument);
    CHECK(parse_group("L") == Group::low);
    CHECK(parse_group("H") == Group::high);
  }

  TEST_CASE("hand-counted rates") {
    const GroupMetrics m = group_rates(make({3, 1, 1, 5}, {1, 1, 1, 1}));
    CHECK(*m.low.tpr == doctest::Approx(0.75));
    CHECK(*m.low.fpr == doctest::Approx(1.0 / 6.0));
    CHECK(*m.low.ppv == doctest::Approx(0.75));
    CHECK(*m.low.npv == doctest::Approx(5.0 / 6.0));
    CHECK(*m.low.base_rate == doctest::Approx(0.4));
    CHECK(*m.low.positive_rate == doctest::Approx(0.4));
    CHECK(m.low.share == doctest::Approx(10.0 / 14.0));
  }

  TEST_CASE("undefined rates are flagged") {
    const GroupMetrics m = group_rates(make({0, 0, 3, 2}, {1, 1, 1, 1}));
    CHECK_FALSE(m.low.ppv.has_value());
    CHECK(m.low.npv.has_value());
    CHECK(*m.low.tpr == 0.0);
    const GroupMetrics none = group_rates(make({0, 2, 0, 3}, {1, 1, 1, 1}));
    CHECK_FALSE(none.low.tpr.has_value());
    CHECK_FALSE(none.low.fnr().has_value());
  }

  TEST_CASE("perfect classifier rates") {
    const GroupMetrics m = group_rates(make({4, 0, 0, 6}, {2, 0, 0, 2}));
    CHECK(*m.low.tpr == 1.0);
    CHECK(*m.low.fpr == 0.0);
    CHECK(*m.low.ppv == 1.0);
    CHECK(*m.low.npv == 1.0);
  }

  TEST_CASE("partition identity on counts") {
    Rng rng(11);
    for (int trial = 0; trial < 500; ++trial) {
      const CellCounts c{rng.uniform_int(1, 50), rng.uniform_int(1, 50), rng.uniform_int(1, 50), rng.uniform_int(1, 50)};
      const GroupRates r = rates_for(c, c.total());
      CHECK(*r.tpr * *r.base_rate + *r.fpr * (1.0 - *r.base_rate) == doctest::Approx(*r.positive_rate).epsilon(1e-14));
    }
  }

  TEST_CASE("over-representation gap") {
    // Perfect classifier: positive classifications are exactly the positive types.
    CHECK(*over_representation_gap(make({3, 0, 0, 2}, {5, 0, 0, 1})) == 0.0);
    CHECK(*over_representation_sign(make({3, 0, 0, 2}, {5, 0, 0, 1})) == 0);
    // P[L | y_hat=1] = 4/8 and P[L | Y=1] = 4/8.
    const GroupConfusion hand = make({2, 2, 2, 4}, {4, 0, 0, 6});
    CHECK(*over_representation_gap(hand) == doctest::Approx(0.0));
    CHECK(*over_representation_sign(hand) == 0);
    // Flipping one L false negative to a true positive raises the gap.
    const GroupConfusion flipped = make({3, 2, 1, 4}, {4, 0, 0, 6});
    CHECK(*over_representation_gap(flipped) > *over_representation_gap(hand));
    CHECK(*over_representation_sign(flipped) == 1);
    CHECK_FALSE(over_representation_gap(make({0, 0, 2, 2}, {0, 0, 1, 1})).has_value());
    CHECK_FALSE(over_representation_gap(make({0, 0, 0, 2}, {0, 0, 0, 1})).has_value());
  }

  TEST_CASE("gap antisymmetry and fn-to-tp monotonicity") {
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
      auto draw = [&] {
        return CellCounts{rng.uniform_int(1, 20), rng.uniform_int(0, 20), rng.uniform_int(1, 20), rng.uniform_int(0, 20)};
      };
      const GroupConfusion c = make(draw(), draw());
      const GroupConfusion swapped = make(c.high, c.low);
      CHECK(*over_representation_gap(c) == doctest::Approx(-*over_representation_gap(swapped)).epsilon(1e-12));
      GroupConfusion step = c;
      step.low.fn -= 1;
      step.low.tp += 1;
      CHECK(*over_representation_sign(step) >= *over_representation_sign(c));
      CHECK(*over_representation_gap(step) >= *over_representation_gap(c) - 1e-15);
    }
  }

  TEST_CASE("group order normalization") {
    const GroupConfusion c = make({5, 1, 1, 1}, {1, 1, 1, 5});
    const GroupConfusion n = normalize_group_order(c);
    CHECK(n.swapped);
    CHECK(n.low == c.high);
    CHECK(n.high == c.low);
    CHECK(normalize_group_order(n).swapped == n.swapped);
    CHECK(normalize_group_order(n).low == n.low);
    const GroupConfusion empty_high = make({1, 0, 0, 0}, {});
    CHECK_FALSE(normalize_group_order(empty_high).swapped);
  }

  TEST_CASE("identity residuals") {
    const GroupMetrics m = group_rates(make({3, 1, 1, 5}, {2, 3, 4, 5}));
    CHECK(*m.low.ppv * *m.low.positive_rate / *m.low.base_rate == doctest::Approx(0.75));
    const ResidualsByGroup r = bayes_identity_residuals(m);
    REQUIRE(r.low.has_value());
    REQUIRE(r.high.has_value());
    CHECK(r.low->max() <= 1e-12);
    CHECK(r.high->max() <= 1e-12);

    GroupRates perturbed = m.low;
    *perturbed.ppv += 0.01;
    const auto p = bayes_identity_residuals(perturbed);
    CHECK(p->tpr == doctest::Approx(0.01 * *m.low.positive_rate / *m.low.base_rate).epsilon(1e-9));

    const GroupMetrics undefined = group_rates(make({0, 0, 2, 2}, {1, 1, 1, 1}));
    CHECK_FALSE(bayes_identity_residuals(undefined).low.has_value());
  }

  TEST_CASE("identity residuals on random exact confusions") {
    Rng rng(99);
    double worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
      const CellCounts c{rng.uniform_int(1, 100000), rng.uniform_int(1, 100000), rng.uniform_int(1, 100000),
                         rng.uniform_int(1, 100000)};
      worst = std::max(worst, bayes_identity_residuals(rates_for(c, c.total()))->max());
    }
    CHECK(worst <= 1e-12);
  }
}
