#include "disparity/synthetic_data.hpp"

#include <algorithm>
#include <charconv>
#include <type_traits>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "disparity/normal.hpp"
#include "disparity/random.hpp"
#include "disparity/text_io.hpp"

namespace disparity {

double calibrate_mean_for_base_rate(double base_rate, double var_ability, double threshold) {
  if (!(base_rate > 0.0 && base_rate < 1.0)) throw std::invalid_argument("base rate must lie in (0, 1)");
  if (!(var_ability > 0.0)) throw std::invalid_argument("ability variance must be positive");
  const double sd = std::sqrt(var_ability);
  // P[A > threshold] = Phi((mu - threshold) / sd) is increasing in mu.
  double lo = threshold - 40.0 * sd;
  double hi = threshold + 40.0 * sd;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf((mid - threshold) / sd) < base_rate) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void CohortSpec::validate() const {
  if (n == 0) throw std::invalid_argument("cohort size must be positive");
  if (!(high_share > 0.0 && high_share < 1.0)) throw std::invalid_argument("high_share must lie in (0, 1)");
  low.validate();
  high.validate();
  if (low.var_eps == 0.0 && enriched_gamma_low < 1.0 && enriched_gamma_low != gamma(low)) {
    throw std::invalid_argument("enrichment needs residual variance in the low group");
  }
  if (!(enriched_gamma_low >= gamma(low) && enriched_gamma_low <= 1.0)) {
    throw std::invalid_argument("enriched_gamma_low must lie in [gamma_low, 1]");
  }
  if (!(implied_base_rate(Group::high) > implied_base_rate(Group::low))) {
    throw std::invalid_argument("spec must give the high group the larger base rate");
  }
}

double CohortSpec::implied_base_rate(Group g) const {
  const GaussianGroupSpec& s = g == Group::low ? low : high;
  return normal_cdf(s.mu / std::sqrt(s.var_ability()));
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  double x;
  if (!parse_double(value, x)) throw std::invalid_argument("config key '" + key + "': not a number: " + value);
  if constexpr (std::is_integral_v<T>) {
    if (x < 0 || x != std::floor(x)) throw std::invalid_argument("config key '" + key + "': expected a non-negative integer");
    return static_cast<T>(x);
  } else {
    return x;
  }
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  std::uint64_t seed = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), seed);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw std::invalid_argument("config key '" + key + "': expected an unsigned integer");
  }
  return seed;
}

}  // namespace

CohortSpec cohort_spec_from_config(const std::map<std::string, std::string>& kv, CohortSpec spec) {
  std::optional<double> low_rate, high_rate;
  for (const auto& [key, value] : kv) {
    if (key == "n") spec.n = parse_number<std::size_t>(key, value);
    else if (key == "high_share") spec.high_share = parse_number<double>(key, value);
    else if (key == "seed") spec.seed = parse_seed(key, value);
    else if (key == "base_noise_dims") spec.base_noise_dims = parse_number<std::size_t>(key, value);
    else if (key == "enriched_noise_dims") spec.enriched_noise_dims = parse_number<std::size_t>(key, value);
    else if (key == "enriched_gamma_low") spec.enriched_gamma_low = parse_number<double>(key, value);
    else if (key == "low.mu") spec.low.mu = parse_number<double>(key, value);
    else if (key == "low.var_s") spec.low.var_s = parse_number<double>(key, value);
    else if (key == "low.var_eps") spec.low.var_eps = parse_number<double>(key, value);
    else if (key == "low.base_rate") low_rate = parse_number<double>(key, value);
    else if (key == "high.mu") spec.high.mu = parse_number<double>(key, value);
    else if (key == "high.var_s") spec.high.var_s = parse_number<double>(key, value);
    else if (key == "high.var_eps") spec.high.var_eps = parse_number<double>(key, value);
    else if (key == "high.base_rate") high_rate = parse_number<double>(key, value);
    else throw std::invalid_argument("unknown cohort spec key '" + key + "'");
  }
  if (low_rate) {
    if (kv.contains("low.mu")) throw std::invalid_argument("give low.mu or low.base_rate, not both");
    spec.low.mu = calibrate_mean_for_base_rate(*low_rate, spec.low.var_ability());
  }
  if (high_rate) {
    if (kv.contains("high.mu")) throw std::invalid_argument("give high.mu or high.base_rate, not both");
    spec.high.mu = calibrate_mean_for_base_rate(*high_rate, spec.high.var_ability());
  }
  spec.validate();
  return spec;
}

std::string cohort_spec_to_config(const CohortSpec& spec) {
  std::ostringstream out;
  out << "n = " << spec.n << "\n"
      << "high_share = " << format_double(spec.high_share) << "\n"
      << "seed = " << spec.seed << "\n"
      << "base_noise_dims = " << spec.base_noise_dims << "\n"
      << "enriched_noise_dims = " << spec.enriched_noise_dims << "\n"
      << "enriched_gamma_low = " << format_double(spec.enriched_gamma_low) << "\n";
  for (const auto& [prefix, g] : {std::pair{"low", &spec.low}, std::pair{"high", &spec.high}}) {
    out << prefix << ".mu = " << format_double(g->mu) << "\n"
        << prefix << ".var_s = " << format_double(g->var_s) << "\n"
        << prefix << ".var_eps = " << format_double(g->var_eps) << "\n";
  }
  return out.str();
}

std::size_t ScoredCohort::count(Group g) const { return static_cast<std::size_t>(std::count(group.begin(), group.end(), g)); }

std::vector<std::size_t> ScoredCohort::rows_of(Group g) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < group.size(); ++i)
    if (group[i] == g) rows.push_back(i);
  return rows;
}

void ScoredCohort::validate() const {
  const auto n = size();
  auto check = [n](std::size_t len, const char* what, bool optional) {
    if (len != n && !(optional && len == 0)) throw std::invalid_argument(std::string("cohort column length mismatch: ") + what);
  };
  check(group.size(), "group", false);
  check(ability.size(), "ability", true);
  check(signal.size(), "signal", true);
  check(static_cast<std::size_t>(base_features.rows()), "base_features", false);
  check(static_cast<std::size_t>(enriched_features.rows()), "enriched_features", enriched_features.cols() == 0);
  check(base_score.size(), "base_score", true);
  check(enriched_score.size(), "enriched_score", true);
  if (static_cast<std::size_t>(base_features.cols()) != base_names.size())
    throw std::invalid_argument("base feature names do not match columns");
  if (static_cast<std::size_t>(enriched_features.cols()) != enriched_names.size())
    throw std::invalid_argument("enriched feature names do not match columns");
  for (const auto y : label)
    if (y > 1) throw std::invalid_argument("labels must be 0 or 1");
}

ScoredCohort ScoredCohort::subset(std::span<const std::size_t> rows) const {
  ScoredCohort out;
  out.base_names = base_names;
  out.enriched_names = enriched_names;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.base_features.resize(m, base_features.cols());
  out.enriched_features.resize(enriched_features.cols() == 0 ? 0 : m, enriched_features.cols());
  auto pick = [&rows](const auto& src, auto& dst) {
    if (src.empty()) return;
    dst.reserve(rows.size());
    for (const auto r : rows) dst.push_back(src.at(r));
  };
  pick(group, out.group);
  pick(label, out.label);
  pick(ability, out.ability);
  pick(signal, out.signal);
  pick(base_score, out.base_score);
  pick(enriched_score, out.enriched_score);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
    out.base_features.row(i) = base_features.row(r);
    if (enriched_features.cols() > 0) out.enriched_features.row(i) = enriched_features.row(r);
  }
  return out;
}

bool operator==(const ScoredCohort& a, const ScoredCohort& b) {
  auto same_matrix = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && (x.size() == 0 || x == y);
  };
  return a.group == b.group && a.label == b.label && a.ability == b.ability && a.signal == b.signal &&
         same_matrix(a.base_features, b.base_features) && same_matrix(a.enriched_features, b.enriched_features) &&
         a.base_names == b.base_names && a.enriched_names == b.enriched_names && a.base_score == b.base_score &&
         a.enriched_score == b.enriched_score;
}

namespace {

// Rows of the invertible map from (S, n1, n2) to the three financial proxies.
constexpr double kProxyMap[3][3] = {
    {2.0, 0.6, 0.0},   // total_assets
    {-1.0, 0.8, 0.3},  // total_debt
    {1.5, 0.0, 0.5},   // monthly_income
};

}  // namespace

ScoredCohort generate(const CohortSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto base_dims = static_cast<Eigen::Index>(3 + spec.base_noise_dims);
  const auto enriched_dims = base_dims + 1 + static_cast<Eigen::Index>(spec.enriched_noise_dims);

  ScoredCohort c;
  c.base_names = {"total_assets", "total_debt", "monthly_income"};
  for (std::size_t j = 1; j <= spec.base_noise_dims; ++j) c.base_names.push_back("noise_" + std::to_string(j));
  c.enriched_names = c.base_names;
  c.enriched_names.push_back("enr_signal");
  for (std::size_t j = 1; j <= spec.enriched_noise_dims; ++j) c.enriched_names.push_back("enr_noise_" + std::to_string(j));

  c.group.resize(spec.n);
  c.label.resize(spec.n);
  c.ability.resize(spec.n);
  c.signal.resize(spec.n);
  c.base_features.resize(n, base_dims);
  c.enriched_features.resize(n, enriched_dims);

  // Part of L's residual revealed by the enrichment column.
  const double revealed_var = spec.enriched_gamma_low * spec.low.var_ability() - spec.low.var_s;
  const double sd_revealed = std::sqrt(std::max(0.0, revealed_var));
  const double sd_hidden_low = std::sqrt(std::max(0.0, spec.low.var_eps - std::max(0.0, revealed_var)));
  const double sd_enr_noise = sd_revealed > 0.0 ? sd_revealed : 1.0;

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = static_cast<std::size_t>(i);
    const Group g = rng.uniform() < spec.high_share ? Group::high : Group::low;
    const GaussianGroupSpec& gs = g == Group::low ? spec.low : spec.high;
    // Fixed number of draws per row keeps the stream aligned across groups.
    const double s = gs.mu + std::sqrt(gs.var_s) * rng.normal();
    const double z_revealed = rng.normal();
    const double z_hidden = rng.normal();
    double revealed, eps;
    if (g == Group::low) {
      revealed = sd_revealed * z_revealed;
      eps = revealed + sd_hidden_low * z_hidden;
    } else {
      revealed = sd_enr_noise * z_revealed;  // uninformative for H
      eps = std::sqrt(gs.var_eps) * z_hidden;
    }
    const double nuisance[3] = {s, rng.normal(), rng.normal()};
    for (int k = 0; k < 3; ++k) {
      double v = 0.0;
      for (int m = 0; m < 3; ++m) v += kProxyMap[k][m] * nuisance[m];
      c.base_features(i, k) = v;
    }
    for (Eigen::Index j = 3; j < base_dims; ++j) c.base_features(i, j) = rng.normal();
    c.enriched_features.row(i).head(base_dims) = c.base_features.row(i);
    c.enriched_features(i, base_dims) = revealed;
    for (Eigen::Index j = base_dims + 1; j < enriched_dims; ++j) c.enriched_features(i, j) = rng.normal();

    c.group[row] = g;
    c.signal[row] = s;
    c.ability[row] = s + eps;
    c.label[row] = c.ability[row] > 0.0 ? 1 : 0;
  }
  return c;
}

CohortSplit split(const ScoredCohort& cohort, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train_fraction must lie in (0, 1)");
  Rng rng(seed);
  CohortSplit out;
  for (const Group g : kGroups) {
    auto rows = cohort.rows_of(g);
    for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng.uniform_int(0, i - 1)]);
    const auto take = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
    out.train_rows.insert(out.train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take));
    out.holdout_rows.insert(out.holdout_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(take), rows.end());
  }
  if (out.train_rows.empty() || out.holdout_rows.empty()) throw std::invalid_argument("split leaves one side empty");
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.holdout_rows.begin(), out.holdout_rows.end());
  out.train = cohort.subset(out.train_rows);
  out.holdout = cohort.subset(out.holdout_rows);
  return out;
}

CohortSchema CohortSchema::infer(std::span<const std::string> header) {
  CohortSchema s;
  for (const auto& name : header) {
    if (name == s.group_column || name == s.label_column) continue;
    if (name == "latent_ability") s.ability_column = name;
    else if (name == "latent_signal") s.signal_column = name;
    else if (name == "score_base") s.base_score_column = name;
    else if (name == "score_enriched") s.enriched_score_column = name;
    else if (name.rfind("enr_", 0) == 0) s.enrichment_columns.push_back(name);
    else s.base_columns.push_back(name);
  }
  return s;
}

void write_cohort_csv(const ScoredCohort& c, std::ostream& out) {
  c.validate();
  const auto base_dims = c.base_features.cols();
  const auto extra_dims = c.enriched_features.cols() == 0 ? 0 : c.enriched_features.cols() - base_dims;
  out << "group,label";
  for (const auto& name : c.base_names) out << ',' << name;
  for (Eigen::Index j = 0; j < extra_dims; ++j) out << ',' << c.enriched_names[static_cast<std::size_t>(base_dims + j)];
  if (!c.ability.empty()) out << ",latent_ability";
  if (!c.signal.empty()) out << ",latent_signal";
  if (!c.base_score.empty()) out << ",score_base";
  if (!c.enriched_score.empty()) out << ",score_enriched";
  out << '\n';
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << group_tag(c.group[i]) << ',' << static_cast<int>(c.label[i]);
    for (Eigen::Index j = 0; j < base_dims; ++j) out << ',' << format_double(c.base_features(r, j));
    for (Eigen::Index j = 0; j < extra_dims; ++j) out << ',' << format_double(c.enriched_features(r, base_dims + j));
    if (!c.ability.empty()) out << ',' << format_double(c.ability[i]);
    if (!c.signal.empty()) out << ',' << format_double(c.signal[i]);
    if (!c.base_score.empty()) out << ',' << format_double(c.base_score[i]);
    if (!c.enriched_score.empty()) out << ',' << format_double(c.enriched_score[i]);
    out << '\n';
  }
}

void write_cohort_csv(const ScoredCohort& cohort, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_cohort_csv(cohort, out);
}

ScoredCohort read_cohort_csv(std::string_view text, const CohortSchema& schema, const std::string& source) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    lines.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw std::runtime_error(source + ": empty file");

  std::vector<std::string> header;
  for (const auto f : split_csv(lines[0])) header.emplace_back(trim(f));
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (!index.emplace(header[j], j).second) throw ParseError(source, 1, "duplicate column '" + header[j] + "'");
  auto column = [&](const std::string& name) {
    const auto it = index.find(name);
    if (it == index.end()) throw std::runtime_error(source + ": missing column '" + name + "'");
    return it->second;
  };
  auto optional_column = [&](const std::optional<std::string>& name) -> std::optional<std::size_t> {
    if (!name) return std::nullopt;
    return column(*name);
  };

  const auto group_col = column(schema.group_column);
  const auto label_col = column(schema.label_column);
  std::vector<std::size_t> base_cols, extra_cols;
  for (const auto& name : schema.base_columns) base_cols.push_back(column(name));
  for (const auto& name : schema.enrichment_columns) extra_cols.push_back(column(name));
  const auto ability_col = optional_column(schema.ability_column);
  const auto signal_col = optional_column(schema.signal_column);
  const auto base_score_col = optional_column(schema.base_score_column);
  const auto enriched_score_col = optional_column(schema.enriched_score_column);

  const auto rows = static_cast<Eigen::Index>(lines.size() - 1);
  if (rows == 0) throw std::runtime_error(source + ": no data rows");
  ScoredCohort c;
  c.base_names = schema.base_columns;
  if (!extra_cols.empty()) {
    c.enriched_names = schema.base_columns;
    c.enriched_names.insert(c.enriched_names.end(), schema.enrichment_columns.begin(), schema.enrichment_columns.end());
  }
  const auto base_dims = static_cast<Eigen::Index>(base_cols.size());
  c.base_features.resize(rows, base_dims);
  c.enriched_features.resize(extra_cols.empty() ? 0 : rows, extra_cols.empty() ? 0 : base_dims + static_cast<Eigen::Index>(extra_cols.size()));

  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t line_no = static_cast<std::size_t>(r) + 2;
    const auto fields = split_csv(lines[static_cast<std::size_t>(r) + 1]);
    if (fields.size() != header.size()) {
      throw ParseError(source, line_no, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    auto number = [&](std::size_t col) {
      double x;
      if (!parse_double(fields[col], x)) {
        throw ParseError(source, line_no, "column '" + header[col] + "': cannot parse '" + std::string(fields[col]) + "'");
      }
      return x;
    };
    try {
      c.group.push_back(parse_group(trim(fields[group_col])));
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, line_no, e.what());
    }
    const auto label = trim(fields[label_col]);
    if (label != "0" && label != "1") throw ParseError(source, line_no, "label must be 0 or 1, got '" + std::string(label) + "'");
    c.label.push_back(label == "1" ? 1 : 0);
    for (Eigen::Index j = 0; j < base_dims; ++j) c.base_features(r, j) = number(base_cols[static_cast<std::size_t>(j)]);
    if (!extra_cols.empty()) {
      c.enriched_features.row(r).head(base_dims) = c.base_features.row(r);
      for (std::size_t j = 0; j < extra_cols.size(); ++j)
        c.enriched_features(r, base_dims + static_cast<Eigen::Index>(j)) = number(extra_cols[j]);
    }
    if (ability_col) c.ability.push_back(number(*ability_col));
    if (signal_col) c.signal.push_back(number(*signal_col));
    if (base_score_col) c.base_score.push_back(number(*base_score_col));
    if (enriched_score_col) c.enriched_score.push_back(number(*enriched_score_col));
  }
  return c;
}

ScoredCohort ingest_csv(const std::filesystem::path& path, const std::optional<CohortSchema>& schema) {
  const std::string text = read_file(path);
  if (schema) return read_cohort_csv(text, *schema, path.string());
  const auto first_line = std::string_view(text).substr(0, text.find('\n'));
  if (trim(first_line).empty()) throw std::runtime_error(path.string() + ": empty file");
  std::vector<std::string> header;
  for (const auto f : split_csv(first_line)) header.emplace_back(trim(f));
  return read_cohort_csv(text, CohortSchema::infer(header), path.string());
}

}  // namespace disparity
