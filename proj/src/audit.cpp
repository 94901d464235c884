#include "disparity/audit.hpp"

#include <stdexcept>
#include <unordered_map>

#include "disparity/text_io.hpp"

namespace disparity {

AuditTable read_audit_csv(std::string_view text, const std::string& source) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    lines.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw std::runtime_error(source + ": empty file");

  std::unordered_map<std::string, std::size_t> index;
  const auto header = split_csv(lines[0]);
  for (std::size_t j = 0; j < header.size(); ++j) index.emplace(std::string(trim(header[j])), j);
  auto column = [&](const char* name) {
    const auto it = index.find(name);
    if (it == index.end()) throw std::runtime_error(source + ": missing column '" + name + "'");
    return it->second;
  };
  const std::size_t gc = column("group"), lc = column("label"), pc = column("prediction");

  AuditTable t;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv(lines[i]);
    if (fields.size() != header.size()) {
      throw ParseError(source, i + 1, "expected " + std::to_string(header.size()) + " fields, got " +
                                          std::to_string(fields.size()));
    }
    auto binary = [&](std::size_t col, const char* what) -> std::uint8_t {
      const auto v = trim(fields[col]);
      if (v == "0") return 0;
      if (v == "1") return 1;
      throw ParseError(source, i + 1, std::string(what) + " must be 0 or 1, got '" + std::string(v) + "'");
    };
    try {
      t.group.push_back(parse_group(trim(fields[gc])));
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, i + 1, e.what());
    }
    t.label.push_back(binary(lc, "label"));
    t.prediction.push_back(binary(pc, "prediction"));
  }
  if (t.label.empty()) throw std::runtime_error(source + ": no data rows");
  return t;
}

AuditReport audit(const AuditTable& table) {
  AuditReport r;
  r.confusion = normalize_group_order(confusion_counts(table.label, table.prediction, table.group));
  r.metrics = group_rates(r.confusion);
  r.gap = over_representation_gap(r.confusion);
  r.residuals = bayes_identity_residuals(r.metrics);
  return r;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

nlohmann::json group_json(const CellCounts& c, const GroupRates& m, const std::optional<IdentityResiduals>& res) {
  nlohmann::json j = {
      {"tp", c.tp},
      {"fp", c.fp},
      {"fn", c.fn},
      {"tn", c.tn},
      {"share", m.share},
      {"tpr", opt(m.tpr)},
      {"fpr", opt(m.fpr)},
      {"ppv", opt(m.ppv)},
      {"npv", opt(m.npv)},
      {"base_rate", opt(m.base_rate)},
      {"positive_rate", opt(m.positive_rate)},
  };
  j["identity_residual_max"] = res ? nlohmann::json(res->max()) : nlohmann::json(nullptr);
  return j;
}

}  // namespace

nlohmann::json to_json(const AuditReport& r) {
  const bool swapped = r.confusion.swapped;
  nlohmann::json low = group_json(r.confusion.low, r.metrics.low, r.residuals.low);
  nlohmann::json high = group_json(r.confusion.high, r.metrics.high, r.residuals.high);
  low["input_tag"] = swapped ? "H" : "L";
  high["input_tag"] = swapped ? "L" : "H";
  return {
      {"L", low},
      {"H", high},
      {"groups_swapped", swapped},
      {"over_representation_gap", opt(r.gap)},
  };
}

}  // namespace disparity
