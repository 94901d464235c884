#include <doctest.h>

#include "disparity/audit.hpp"
#include "disparity/text_io.hpp"

using namespace disparity;

TEST_SUITE("audit") {
  TEST_CASE("report on a small table") {
    // L: tp 1, fp 1, fn 1, tn 1.  H: tp 3, fp 0, fn 1, tn 0.
    const std::string text =
        "group,label,prediction\n"
        "L,1,1\nL,0,1\nL,1,0\nL,0,0\n"
        "H,1,1\nH,1,1\nH,1,1\nH,1,0\n";
    const AuditReport r = audit(read_audit_csv(text));
    CHECK(r.confusion.low.tp == 1);
    CHECK(r.confusion.high.tp == 3);
    CHECK_FALSE(r.confusion.swapped);
    CHECK(*r.metrics.low.tpr == 0.5);
    CHECK(*r.metrics.high.tpr == 0.75);
    CHECK_FALSE(r.metrics.high.fpr.has_value());
    const auto j = to_json(r);
    CHECK(j["L"]["tp"] == 1);
    CHECK(j["H"]["fpr"].is_null());
    CHECK(j["L"]["input_tag"] == "L");
    CHECK(j["groups_swapped"] == false);
    CHECK(j["L"]["identity_residual_max"].get<double>() <= 1e-12);
    // Approval shares 0.4 vs positive shares 2/6.
    CHECK(j["over_representation_gap"].get<double>() == doctest::Approx(2.0 / 5.0 - 2.0 / 6.0));
  }

  TEST_CASE("groups are reordered so L has the lower base rate") {
    const std::string text =
        "prediction,group,label\n"
        "1,L,1\n1,L,1\n0,L,0\n"
        "1,H,1\n0,H,0\n0,H,0\n";
    const AuditReport r = audit(read_audit_csv(text));
    CHECK(r.confusion.swapped);
    CHECK(r.confusion.low.positives() == 1);
    const auto j = to_json(r);
    CHECK(j["groups_swapped"] == true);
    CHECK(j["L"]["input_tag"] == "H");
    CHECK(j["H"]["input_tag"] == "L");
  }

  TEST_CASE("malformed input") {
    try {
      read_audit_csv("group,label,prediction\nL,1,1\nH,1,2\n", "a.csv");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(read_audit_csv("group,label,prediction\nX,1,1\n"), ParseError);
    CHECK_THROWS_AS(read_audit_csv("group,label,prediction\nL,1\n"), ParseError);
    CHECK_THROWS_AS(read_audit_csv("group,label\nL,1\n"), std::runtime_error);
    CHECK_THROWS_AS(read_audit_csv("group,label,prediction\n"), std::runtime_error);
    CHECK_THROWS_AS(read_audit_csv(""), std::runtime_error);
  }
}
