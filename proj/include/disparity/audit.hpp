#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "disparity/metrics.hpp"

namespace disparity {

/// Rows of a `group,label,prediction` file.
struct AuditTable {
  std::vector<Group> group;
  std::vector<std::uint8_t> label;
  std::vector<std::uint8_t> prediction;
};

/// Throws ParseError naming the offending line.
AuditTable read_audit_csv(std::string_view text, const std::string& source = "<csv>");

struct AuditReport {
  GroupConfusion confusion;  // L/H order normalized so that mu_L <= mu_H
  GroupMetrics metrics;
  std::optional<double> gap;
  ResidualsByGroup residuals;
};

AuditReport audit(const AuditTable& table);
nlohmann::json to_json(const AuditReport& r);

}  // namespace disparity
