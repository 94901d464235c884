#include "disparity/cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "disparity/audit.hpp"
#include "disparity/gaussian_model.hpp"
#include "disparity/interventions.hpp"
#include "disparity/manifest.hpp"
#include "disparity/pipeline.hpp"
#include "disparity/synthetic_data.hpp"
#include "disparity/text_io.hpp"
#include "disparity/theorem_oracle.hpp"

namespace disparity {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

// Shared state handed to each command body.
struct Context {
  std::vector<std::string> args;
  std::ostream& out;
  std::ostream& err;
  Clock::time_point start = Clock::now();

  RunManifest manifest(json config) const {
    RunManifest m;
    m.command_line = args;
    m.config = std::move(config);
    m.versions = {{"disparity", DISPARITY_VERSION},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
                  {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    m.wall_clock_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return m;
  }
};

std::string fmt(double x) { return format_double(x); }
std::string fmt(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

json opt_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json population_json(const CellPopulation& p) {
  auto cells = [](const CellCounts& c) { return json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}}; };
  return {{"L", cells(p.low)}, {"H", cells(p.high)}};
}

json sweep_json(const SweepReport& r) {
  json j = {{"populations", r.populations},
            {"prop1_antecedent", r.prop1_antecedent},
            {"thm1_antecedent", r.thm1_antecedent},
            {"npv_tie_boundary", r.npv_tie_boundary},
            {"prop1_counterexamples", r.prop1_violations},
            {"thm1_counterexamples", r.thm1_violations}};
  return j;
}

// ---- theorem-check ----

struct TheoremOptions {
  std::uint32_t max_cell = 6;
  std::uint64_t random_trials = 0;
  std::uint32_t random_max_cell = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;
};

int run_theorem_check(const Context& ctx, const TheoremOptions& o) {
  const SweepReport exhaustive = exhaustive_sweep(o.max_cell, o.threads);
  SweepReport random;
  if (o.random_trials > 0) random = random_sweep(o.random_trials, o.random_max_cell, o.seed);

  json summary = {{"max_cell", o.max_cell}, {"exhaustive", sweep_json(exhaustive)}};
  if (o.random_trials > 0) {
    summary["random"] = sweep_json(random);
    summary["random"]["max_cell"] = o.random_max_cell;
  }
  json witnesses = json::object();
  bool witnesses_complete = true;
  try {
    const WitnessSet w = find_witnesses(std::max<std::uint32_t>(o.max_cell, 1));
    witnesses = {{"over_represented_only", population_json(*w.over_represented_only)},
                 {"informative_only", population_json(*w.informative_only)},
                 {"neither", population_json(*w.neither)}};
  } catch (const std::runtime_error&) {
    witnesses_complete = false;
  }
  summary["witnesses_complete"] = witnesses_complete;
  summary["witnesses"] = witnesses;
  const bool clean = exhaustive.clean() && random.clean();
  summary["counterexamples"] = exhaustive.prop1_violations + exhaustive.thm1_violations + random.prop1_violations +
                               random.thm1_violations;

  if (!o.out.empty()) {
    OutputDir dir(resolve_output(o.out));
    dir.write_text("summary.json", summary.dump(2) + "\n");
    json ce = {{"proposition1", json::array()}, {"theorem1", json::array()}};
    for (const SweepReport* r : {&exhaustive, static_cast<const SweepReport*>(&random)}) {
      for (const auto& p : r->prop1_counterexamples) ce["proposition1"].push_back(population_json(p));
      for (const auto& p : r->thm1_counterexamples) ce["theorem1"].push_back(population_json(p));
    }
    dir.write_text("counterexamples.json", ce.dump(2) + "\n");
    RunManifest m = ctx.manifest({{"max_cell", o.max_cell},
                                  {"random_trials", o.random_trials},
                                  {"random_max_cell", o.random_max_cell}});
    m.seeds["random_sweep"] = o.seed;
    dir.commit(std::move(m));
  }
  ctx.out << summary.dump(2) << "\n";
  return clean ? kExitOk : kExitFlagged;
}

// ---- gaussian ----

struct GroupFlags {
  double mu, var_s, var_eps;
  GaussianGroupSpec spec() const { return {mu, var_s, var_eps}; }
};

json group_config(const GaussianGroupSpec& g) { return {{"mu", g.mu}, {"var_s", g.var_s}, {"var_eps", g.var_eps}}; }

std::vector<double> range_grid(double a, double b, double step) {
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < n; ++i) out.push_back(a + static_cast<double>(i) * step);
  return out;
}

struct Figure2Options {
  GroupFlags low{-1.0, 1.0, 1.0};
  GroupFlags high{0.0, 1.0, 1.0};
  double variant_var_s = 1.6;
  double variant_var_eps = 0.4;
  std::vector<double> cutoffs{-1.0, 1.0};
  double threshold = 0.0;
  std::string out = "figure2";
};

int run_figure2(const Context& ctx, const Figure2Options& o) {
  const GaussianGroupSpec low = o.low.spec(), high = o.high.spec();
  const GaussianGroupSpec variant{low.mu, o.variant_var_s, o.variant_var_eps};
  for (const auto* g : {&low, &high, &variant}) g->validate();
  const ModelSpec baseline{low, high, o.threshold};
  baseline.validate();
  const double c = o.threshold;

  OutputDir dir(resolve_output(o.out));
  {
    std::ostringstream csv;
    csv << "ability,expected_score_L,expected_score_H,expected_score_L_variant\n";
    for (const double a : range_grid(-4.0, 4.0, 0.05)) {
      csv << fmt(a) << ',' << fmt(expected_score_given_ability(low, a)) << ','
          << fmt(expected_score_given_ability(high, a)) << ',' << fmt(expected_score_given_ability(variant, a)) << '\n';
    }
    dir.write_text("fig2_expected_score.csv", csv.str());
  }
  {
    std::ostringstream csv;
    csv << "score,density_L,density_H,density_L_variant\n";
    for (const double s : range_grid(-4.0, 4.0, 0.02)) {
      csv << fmt(s) << ',' << fmt(creditworthy_score_density(low, s, c)) << ','
          << fmt(creditworthy_score_density(high, s, c)) << ',' << fmt(creditworthy_score_density(variant, s, c))
          << '\n';
    }
    dir.write_text("fig2_creditworthy_density.csv", csv.str());
  }
  json truncated = json::object();
  {
    std::ostringstream csv;
    csv << "cutoff,setting,tpr_L,tpr_H,tpr_L_normal_approx,tpr_H_normal_approx,gap\n";
    for (const double cutoff : o.cutoffs) {
      for (const auto& [name, g] : {std::pair<const char*, const GaussianGroupSpec*>{"baseline", &low},
                                    std::pair<const char*, const GaussianGroupSpec*>{"variant", &variant}}) {
        const double tl = group_tpr(*g, cutoff, c), th = group_tpr(high, cutoff, c);
        csv << fmt(cutoff) << ',' << name << ',' << fmt(tl) << ',' << fmt(th) << ','
            << fmt(group_tpr(*g, cutoff, c, TprMethod::normal_approx)) << ','
            << fmt(group_tpr(high, cutoff, c, TprMethod::normal_approx)) << ',' << fmt(th - tl) << '\n';
      }
    }
    dir.write_text("fig2_tpr.csv", csv.str());
  }
  for (const auto& [name, g] : {std::pair<const char*, const GaussianGroupSpec*>{"L", &low},
                                std::pair<const char*, const GaussianGroupSpec*>{"H", &high},
                                std::pair<const char*, const GaussianGroupSpec*>{"L_variant", &variant}}) {
    const TruncatedCondParams p = score_given_creditworthy(*g, c);
    truncated[name] = {{"mean", p.mean}, {"var", p.var}, {"rho", p.rho}, {"gamma", gamma(*g)}};
  }
  json parity = json::array();
  for (const double cutoff : o.cutoffs) {
    const ParityResult r = solve_gamma_for_parity(baseline, cutoff);
    static constexpr const char* kStatus[] = {"already_at_parity", "solved", "unreachable", "non_bracketing"};
    parity.push_back({{"cutoff", cutoff},
                      {"gamma_L", r.gamma_low},
                      {"tpr_L", r.tpr_low},
                      {"tpr_H", r.tpr_high},
                      {"status", kStatus[static_cast<int>(r.status)]}});
  }
  dir.write_text("fig2_summary.json", json{{"creditworthy_score", truncated}, {"parity", parity}}.dump(2) + "\n");
  dir.commit(ctx.manifest({{"low", group_config(low)},
                           {"high", group_config(high)},
                           {"variant_low", group_config(variant)},
                           {"cutoffs", o.cutoffs},
                           {"threshold", o.threshold}}));
  ctx.out << "wrote " << dir.path().string() << "\n";
  return kExitOk;
}

struct Figure3Options {
  std::vector<double> mu_l{-0.5, -1.0, -1.5};
  GroupFlags high{0.0, 1.0, 1.0};
  double total_var_l = 2.0;
  double cutoff = 1.0;
  double threshold = 0.0;
  std::string grid = "0.05:2:0.05";
  std::string method = "exact";
  std::string out = "figure3";
};

int run_figure3(const Context& ctx, const Figure3Options& o) {
  if (o.method != "exact" && o.method != "normal_approx") throw CLI::ValidationError("--method", "exact|normal_approx");
  const TprMethod method = o.method == "exact" ? TprMethod::exact : TprMethod::normal_approx;
  const std::vector<double> grid = parse_grid(o.grid);
  OutputDir dir(resolve_output(o.out));
  std::ostringstream csv;
  csv << "mu_L,r,gamma_L,tpr_L,tpr_H,ratio\n";
  for (const double mu : o.mu_l) {
    const ModelSpec spec{{mu, 0.5 * o.total_var_l, 0.5 * o.total_var_l}, o.high.spec(), o.threshold};
    spec.validate();
    const RatioCurve curve = tpr_ratio_curve(spec, grid, o.cutoff, method);
    for (const RatioPoint& p : curve.points) {
      csv << fmt(mu) << ',' << fmt(p.r) << ',' << fmt(p.gamma_low) << ',' << fmt(p.tpr_low) << ',' << fmt(p.tpr_high)
          << ',' << fmt(p.ratio) << '\n';
    }
  }
  dir.write_text("fig3_tpr_ratio.csv", csv.str());
  dir.commit(ctx.manifest({{"mu_L", o.mu_l},
                           {"high", group_config(o.high.spec())},
                           {"total_var_L", o.total_var_l},
                           {"cutoff", o.cutoff},
                           {"threshold", o.threshold},
                           {"grid", grid},
                           {"method", o.method}}));
  ctx.out << "wrote " << dir.path().string() << "\n";
  return kExitOk;
}

// ---- data ----

struct DataOptions {
  std::string spec_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  std::string out = "cohort";
};

int run_data_generate(const Context& ctx, const DataOptions& o) {
  CohortSpec spec;
  if (!o.spec_file.empty()) spec = cohort_spec_from_config(parse_key_values(read_file(o.spec_file), o.spec_file));
  if (o.seed) spec.seed = *o.seed;
  if (o.n) spec.n = *o.n;
  spec.validate();
  const ScoredCohort cohort = generate(spec);
  OutputDir dir(resolve_output(o.out));
  write_cohort_csv(cohort, dir.file("cohort.csv"));
  const std::string spec_text = cohort_spec_to_config(spec);
  dir.write_text("cohort_spec.txt", spec_text);
  RunManifest m = ctx.manifest({{"cohort_spec", spec_text}});
  m.seeds["cohort"] = spec.seed;
  dir.commit(std::move(m));
  ctx.out << "wrote " << cohort.size() << " rows to " << dir.path().string() << "\n";
  return kExitOk;
}

// ---- train ----

struct TrainOptions {
  std::string scheme = "base";
  std::optional<double> l1;
  std::string in;
  std::string out = "model.json";
  std::uint64_t seed = 1;
  int max_iterations = 200;
};

std::filesystem::path cohort_file(const std::string& path) {
  std::filesystem::path p(path);
  if (std::filesystem::is_directory(p)) p /= "cohort.csv";
  return p;
}

int run_train(const Context& ctx, const TrainOptions& o) {
  if (o.scheme != "base" && o.scheme != "enriched") throw CLI::ValidationError("--scheme", "must be base or enriched");
  const ScoredCohort cohort = ingest_csv(cohort_file(o.in));
  TrainConfig config;
  config.max_iterations = o.max_iterations;
  LinearModel model;
  json extra = json::object();
  if (o.scheme == "base") {
    config.l1_lambda = o.l1.value_or(0.0);
    model = config.l1_lambda > 0.0 ? train_logistic_l1(cohort.base_features, cohort.label, config)
                                   : train_logistic(cohort.base_features, cohort.label, config);
    model.feature_names = cohort.base_names;
  } else {
    if (cohort.enriched_features.cols() == 0) throw std::runtime_error("cohort has no enrichment columns");
    PipelineConfig pc;
    pc.split_seed = o.seed;
    pc.enriched_lambda = o.l1;
    pc.train = config;
    const ScoredCohort low = cohort.subset(cohort.rows_of(Group::low));
    if (o.l1) {
      config.l1_lambda = *o.l1;
      model = train_logistic_l1(low.enriched_features, low.label, config);
    } else {
      const CohortSplit inner = split(low, pc.lambda_fit_fraction, pc.split_seed ^ 0x9e3779b97f4a7c15ULL);
      const LambdaSelection sel = select_l1_lambda(inner.train.enriched_features, inner.train.label,
                                                   inner.holdout.enriched_features, inner.holdout.label, config);
      config.l1_lambda = sel.chosen;
      model = train_logistic_l1(low.enriched_features, low.label, config);
      extra["lambda_grid"] = sel.lambdas;
      extra["validation_brier"] = sel.validation_brier;
    }
    model.feature_names = cohort.enriched_names;
  }
  const std::filesystem::path target = resolve_output(o.out);
  OutputDir dir(target.has_parent_path() ? target.parent_path() : std::filesystem::path("."));
  dir.write_text(target.filename().string(), json(model).dump(2) + "\n");
  RunManifest m = ctx.manifest({{"scheme", o.scheme},
                                {"l1_lambda", config.l1_lambda},
                                {"input", o.in},
                                {"max_iterations", o.max_iterations},
                                {"selection", extra}});
  m.seeds["lambda_split"] = o.seed;
  dir.commit(std::move(m));
  ctx.out << "wrote " << target.string() << "\n";
  return kExitOk;
}

// ---- audit ----

int run_audit(const Context& ctx, const std::string& in, const std::string& out) {
  const AuditReport report = audit(read_audit_csv(read_file(in), in));
  const std::string text = to_json(report).dump(2) + "\n";
  if (!out.empty()) {
    const std::filesystem::path target = resolve_output(out);
    OutputDir dir(target.has_parent_path() ? target.parent_path() : std::filesystem::path("."));
    dir.write_text(target.filename().string(), text);
    dir.commit(ctx.manifest({{"input", in}}));
  }
  ctx.out << text;
  return kExitOk;
}

// ---- experiment ----

struct ExperimentOptions {
  std::string cohort;
  std::string k_grid = "0:100:1";
  std::string cutoff_grid;
  double train_fraction = 0.5;
  std::uint64_t split_seed = 1;
  std::optional<double> lambda;
  unsigned threads = 0;
  std::string out = "experiment";
};

int run_experiment(const Context& ctx, const ExperimentOptions& o) {
  const ScoredCohort cohort = ingest_csv(cohort_file(o.cohort));
  if (cohort.enriched_features.cols() == 0) throw std::runtime_error("cohort has no enrichment columns");
  const std::vector<double> k_grid = parse_grid(o.k_grid);

  PipelineConfig pc;
  pc.train_fraction = o.train_fraction;
  pc.split_seed = o.split_seed;
  pc.enriched_lambda = o.lambda;
  CohortSplit parts = split(cohort, pc.train_fraction, pc.split_seed);
  const ScoringModels models = fit_scoring_models(parts.train, pc);
  attach_scores(parts.train, models);
  attach_scores(parts.holdout, models);

  const std::vector<double> cutoffs =
      o.cutoff_grid.empty() ? quantile_grid(parts.train.base_score, 0.025, 0.975, 21) : parse_grid(o.cutoff_grid);
  const auto fixed = intended_cutoff_sweep(parts.train, parts.holdout, cutoffs);
  const ExperimentResult endogenous = run_endogenous_experiment(parts.train, parts.holdout, k_grid, o.threads);

  OutputDir dir(resolve_output(o.out));
  {
    std::ostringstream a, b;
    a << "intended_cutoff,scheme,cutoff_H,cutoff_L,repaid_share,approved\n";
    b << "intended_cutoff,scheme,cutoff_H,cutoff_L,tpr_L,tpr_H,fpr_L,fpr_H\n";
    for (const auto& r : fixed) {
      const std::string head = fmt(r.intended_cutoff) + "," + std::string(scheme_name(r.scheme)) + "," +
                               fmt(r.policy.cutoff_h) + "," + fmt(r.policy.cutoff_l) + ",";
      a << head << fmt(r.holdout.repaid_share) << ',' << r.holdout.approved << '\n';
      b << head << fmt(r.holdout.tpr_l) << ',' << fmt(r.holdout.tpr_h) << ',' << fmt(r.holdout.fpr_l) << ','
        << fmt(r.holdout.fpr_h) << '\n';
    }
    dir.write_text("fig4a_repaid_share.csv", a.str());
    dir.write_text("fig4b_group_tpr.csv", b.str());
  }
  {
    std::ostringstream c;
    c << "k,scheme,cutoff_H,cutoff_L,market_open,tpr_L,tpr_H,repaid_share,train_profit,holdout_profit\n";
    for (const auto& r : endogenous.rows) {
      c << fmt(r.k) << ',' << scheme_name(r.scheme) << ',' << fmt(r.policy.cutoff_h) << ',' << fmt(r.policy.cutoff_l)
        << ',' << (r.market_open ? 1 : 0) << ',' << fmt(r.holdout.tpr_l) << ',' << fmt(r.holdout.tpr_h) << ','
        << fmt(r.holdout.repaid_share) << ',' << fmt(r.train_profit) << ',' << fmt(r.holdout_profit) << '\n';
    }
    dir.write_text("fig4c_endogenous_tpr.csv", c.str());
  }
  if (!models.selection.lambdas.empty()) {
    std::ostringstream s;
    s << "lambda,validation_brier\n";
    for (std::size_t i = 0; i < models.selection.lambdas.size(); ++i) {
      s << fmt(models.selection.lambdas[i]) << ',' << fmt(models.selection.validation_brier[i]) << '\n';
    }
    dir.write_text("lambda_selection.csv", s.str());
  }
  dir.write_text("model_base.json", json(models.base).dump(2) + "\n");
  dir.write_text("model_enriched.json", json(models.enriched).dump(2) + "\n");

  const ScoredCohort holdout_low = parts.holdout.subset(parts.holdout.rows_of(Group::low));
  json summary = {
      {"train_rows", parts.train.size()},
      {"holdout_rows", parts.holdout.size()},
      {"enriched_lambda", models.enriched.config.l1_lambda},
      {"holdout_brier_L_base", brier_mse(holdout_low.base_score, holdout_low.label)},
      {"holdout_brier_L_enriched", brier_mse(holdout_low.enriched_score, holdout_low.label)},
  };
  json closing = json::object();
  for (const Scheme s : kSchemes) closing[std::string(scheme_name(s))] = opt_json(endogenous.market_closing_k(s));
  summary["market_closing_k"] = closing;
  dir.write_text("summary.json", summary.dump(2) + "\n");

  RunManifest m = ctx.manifest({{"cohort", o.cohort},
                                {"k_grid", k_grid},
                                {"cutoff_grid", cutoffs},
                                {"train_fraction", o.train_fraction},
                                {"enriched_lambda", models.enriched.config.l1_lambda},
                                {"lambda_selected", !o.lambda.has_value()}});
  m.seeds["split"] = o.split_seed;
  dir.commit(std::move(m));
  ctx.out << "wrote " << dir.path().string() << "\n";
  return kExitOk;
}

// ---- replay ----

int run_replay(const Context& ctx, const std::string& manifest_path, const std::string& out) {
  const RunManifest m = RunManifest::from_json(json::parse(read_file(manifest_path)));
  std::vector<std::string> args = m.command_line;
  if (args.empty() || args.front() == "replay") throw std::runtime_error("manifest does not name a replayable command");
  if (!out.empty()) {
    bool replaced = false;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--out" && i + 1 < args.size()) {
        args[i + 1] = out;
        replaced = true;
      } else if (args[i].rfind("--out=", 0) == 0) {
        args[i] = "--out=" + out;
        replaced = true;
      }
    }
    if (!replaced) {
      args.push_back("--out");
      args.push_back(out);
    }
  }
  return dispatch(args, ctx.out, ctx.err);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Error-rate disparity toolkit", "disparity"};
  app.set_config("--config", "", "key=value file supplying option defaults");
  app.set_version_flag("--version", DISPARITY_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx{args, out, err};
  std::function<int()> action;

  TheoremOptions th;
  auto* theorem = app.add_subcommand("theorem-check", "Exhaustive and random search for counterexamples");
  theorem->add_option("--max-cell", th.max_cell, "Largest cell count in the exhaustive sweep")->capture_default_str();
  theorem->add_option("--random-trials", th.random_trials, "Random populations to check")->capture_default_str();
  theorem->add_option("--random-max-cell", th.random_max_cell, "Largest cell count for random populations")
      ->capture_default_str();
  theorem->add_option("--seed", th.seed)->capture_default_str();
  theorem->add_option("--threads", th.threads, "0 = hardware concurrency");
  theorem->add_option("--out", th.out, "Directory for summary, counterexamples and manifest");
  theorem->callback([&] { action = [&] { return run_theorem_check(ctx, th); }; });

  auto* gaussian = app.add_subcommand("gaussian", "Closed-form signal model figures");
  gaussian->require_subcommand(1);
  Figure2Options f2;
  auto* fig2 = gaussian->add_subcommand("figure2", "Expected scores, creditworthy densities and TPRs");
  fig2->add_option("--mu-l", f2.low.mu)->capture_default_str();
  fig2->add_option("--var-s-l", f2.low.var_s)->capture_default_str();
  fig2->add_option("--var-eps-l", f2.low.var_eps)->capture_default_str();
  fig2->add_option("--mu-h", f2.high.mu)->capture_default_str();
  fig2->add_option("--var-s-h", f2.high.var_s)->capture_default_str();
  fig2->add_option("--var-eps-h", f2.high.var_eps)->capture_default_str();
  fig2->add_option("--variant-var-s-l", f2.variant_var_s)->capture_default_str();
  fig2->add_option("--variant-var-eps-l", f2.variant_var_eps)->capture_default_str();
  fig2->add_option("--cutoffs", f2.cutoffs)->delimiter(',')->capture_default_str();
  fig2->add_option("--threshold", f2.threshold, "Creditworthiness threshold on ability")->capture_default_str();
  fig2->add_option("--out", f2.out)->capture_default_str();
  fig2->callback([&] { action = [&] { return run_figure2(ctx, f2); }; });

  Figure3Options f3;
  auto* fig3 = gaussian->add_subcommand("figure3", "TPR_L / TPR_H against the signal-strength ratio");
  fig3->add_option("--mu-l", f3.mu_l, "L means")->delimiter(',')->capture_default_str();
  fig3->add_option("--mu-h", f3.high.mu)->capture_default_str();
  fig3->add_option("--var-s-h", f3.high.var_s)->capture_default_str();
  fig3->add_option("--var-eps-h", f3.high.var_eps)->capture_default_str();
  fig3->add_option("--total-var-l", f3.total_var_l, "var_s + var_eps for L, held fixed")->capture_default_str();
  fig3->add_option("--cutoff", f3.cutoff)->capture_default_str();
  fig3->add_option("--threshold", f3.threshold)->capture_default_str();
  fig3->add_option("--grid", f3.grid, "gamma_L / gamma_H values, start:stop:step or a list")->capture_default_str();
  fig3->add_option("--method", f3.method, "exact or normal_approx")->capture_default_str();
  fig3->add_option("--out", f3.out)->capture_default_str();
  fig3->callback([&] { action = [&] { return run_figure3(ctx, f3); }; });

  auto* data = app.add_subcommand("data", "Synthetic cohorts");
  data->require_subcommand(1);
  DataOptions dopt;
  auto* gen = data->add_subcommand("generate", "Draw a cohort and write cohort.csv");
  gen->add_option("--spec", dopt.spec_file, "key=value cohort spec")->check(CLI::ExistingFile);
  gen->add_option("--seed", dopt.seed);
  gen->add_option("--n", dopt.n);
  gen->add_option("--out", dopt.out)->capture_default_str();
  gen->callback([&] { action = [&] { return run_data_generate(ctx, dopt); }; });

  TrainOptions topt;
  auto* train = app.add_subcommand("train", "Fit a scoring model");
  train->add_option("--scheme", topt.scheme, "base or enriched")->capture_default_str();
  train->add_option("--l1", topt.l1, "L1 penalty; enriched default selects it on a validation split");
  train->add_option("--in", topt.in, "cohort.csv or a directory holding it")->required();
  train->add_option("--out", topt.out)->capture_default_str();
  train->add_option("--seed", topt.seed, "Seed of the validation split")->capture_default_str();
  train->add_option("--max-iterations", topt.max_iterations)->capture_default_str();
  train->callback([&] { action = [&] { return run_train(ctx, topt); }; });

  std::string audit_in, audit_out;
  auto* aud = app.add_subcommand("audit", "Group confusion report for group,label,prediction rows");
  aud->add_option("--in", audit_in)->required()->check(CLI::ExistingFile);
  aud->add_option("--out", audit_out, "Also write the report here");
  aud->callback([&] { action = [&] { return run_audit(ctx, audit_in, audit_out); }; });

  auto* experiment = app.add_subcommand("experiment", "Intervention experiments");
  experiment->require_subcommand(1);
  ExperimentOptions eopt;
  auto* run = experiment->add_subcommand("run", "Fixed-cutoff and endogenous-response comparisons");
  run->add_option("--cohort", eopt.cohort, "cohort.csv or a directory holding it")->required();
  run->add_option("--k-grid", eopt.k_grid)->capture_default_str();
  run->add_option("--cutoff-grid", eopt.cutoff_grid, "default: 21 train score quantiles, 2.5% to 97.5%");
  run->add_option("--train-fraction", eopt.train_fraction)->capture_default_str();
  run->add_option("--split-seed", eopt.split_seed)->capture_default_str();
  run->add_option("--lambda", eopt.lambda, "Fixed L1 penalty for the enriched model");
  run->add_option("--threads", eopt.threads);
  run->add_option("--out", eopt.out)->capture_default_str();
  run->callback([&] { action = [&] { return run_experiment(ctx, eopt); }; });

  std::string replay_manifest, replay_out;
  auto* replay = app.add_subcommand("replay", "Rerun the command recorded in a manifest");
  replay->add_option("--manifest", replay_manifest)->required()->check(CLI::ExistingFile);
  replay->add_option("--out", replay_out, "Override the output location");
  replay->callback([&] { action = [&] { return run_replay(ctx, replay_manifest, replay_out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    err << app.help();
    return kExitUsage;
  }
  if (!action) {
    err << app.help();
    return kExitUsage;
  }
  try {
    return action();
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace disparity
