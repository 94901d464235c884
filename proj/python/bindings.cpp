#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "disparity/audit.hpp"
#include "disparity/cli.hpp"
#include "disparity/gaussian_model.hpp"
#include "disparity/interventions.hpp"
#include "disparity/predictor.hpp"
#include "disparity/synthetic_data.hpp"
#include "disparity/theorem_oracle.hpp"

namespace py = pybind11;
using namespace disparity;

namespace {

CellCounts cells(const std::array<std::uint64_t, 4>& c) { return {c[0], c[1], c[2], c[3]}; }

py::dict verdict(const ImplicationVerdict& v) {
  py::dict d;
  d["antecedent"] = v.antecedent;
  d["over_represented"] = v.over_represented;
  d["more_informative"] = v.more_informative;
  d["holds"] = v.holds;
  return d;
}

std::vector<Group> groups_from(const std::vector<std::string>& tags) {
  std::vector<Group> out;
  out.reserve(tags.size());
  for (const auto& t : tags) out.push_back(parse_group(t));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Error-rate disparity toolkit";
  m.attr("__version__") = DISPARITY_VERSION;

  py::class_<GaussianGroupSpec>(m, "GaussianGroupSpec")
      .def(py::init([](double mu, double var_s, double var_eps) {
             GaussianGroupSpec g{mu, var_s, var_eps};
             g.validate();
             return g;
           }),
           py::arg("mu") = 0.0, py::arg("var_s") = 1.0, py::arg("var_eps") = 1.0)
      .def_readwrite("mu", &GaussianGroupSpec::mu)
      .def_readwrite("var_s", &GaussianGroupSpec::var_s)
      .def_readwrite("var_eps", &GaussianGroupSpec::var_eps)
      .def("with_gamma", &GaussianGroupSpec::with_gamma)
      .def("__repr__", [](const GaussianGroupSpec& g) {
        std::ostringstream s;
        s << "GaussianGroupSpec(mu=" << g.mu << ", var_s=" << g.var_s << ", var_eps=" << g.var_eps << ")";
        return s.str();
      });

  m.def("gamma", [](const GaussianGroupSpec& g) { return gamma(g); });
  m.def(
      "group_tpr",
      [](const GaussianGroupSpec& g, double cutoff, double threshold, bool normal_approx) {
        return group_tpr(g, cutoff, threshold, normal_approx ? TprMethod::normal_approx : TprMethod::exact);
      },
      py::arg("group"), py::arg("cutoff"), py::arg("threshold") = 0.0, py::arg("normal_approx") = false);
  m.def(
      "group_fpr", [](const GaussianGroupSpec& g, double cutoff, double threshold) { return group_fpr(g, cutoff, threshold); },
      py::arg("group"), py::arg("cutoff"), py::arg("threshold") = 0.0);
  m.def(
      "score_given_creditworthy",
      [](const GaussianGroupSpec& g, double threshold) {
        const TruncatedCondParams p = score_given_creditworthy(g, threshold);
        return py::make_tuple(p.mean, p.var);
      },
      py::arg("group"), py::arg("threshold") = 0.0, "(mean, variance) of S given A > threshold");
  m.def(
      "solve_gamma_for_parity",
      [](const GaussianGroupSpec& low, const GaussianGroupSpec& high, double cutoff, double threshold) {
        const ModelSpec spec{low, high, threshold};
        spec.validate();
        const ParityResult r = solve_gamma_for_parity(spec, cutoff);
        static constexpr const char* kStatus[] = {"already_at_parity", "solved", "unreachable", "non_bracketing"};
        py::dict d;
        d["gamma_L"] = r.gamma_low;
        d["tpr_L"] = r.tpr_low;
        d["tpr_H"] = r.tpr_high;
        d["status"] = kStatus[static_cast<int>(r.status)];
        return d;
      },
      py::arg("low"), py::arg("high"), py::arg("cutoff"), py::arg("threshold") = 0.0);

  m.def(
      "check_proposition1",
      [](const std::array<std::uint64_t, 4>& low, const std::array<std::uint64_t, 4>& high) {
        return verdict(check_proposition1({cells(low), cells(high)}));
      },
      py::arg("low"), py::arg("high"), "Cells are (tp, fp, fn, tn).");
  m.def(
      "check_theorem1",
      [](const std::array<std::uint64_t, 4>& low, const std::array<std::uint64_t, 4>& high) {
        return verdict(check_theorem1({cells(low), cells(high)}));
      },
      py::arg("low"), py::arg("high"), "Cells are (tp, fp, fn, tn).");
  m.def(
      "exhaustive_sweep",
      [](std::uint32_t max_cell) {
        const SweepReport r = exhaustive_sweep(max_cell);
        py::dict d;
        d["populations"] = r.populations;
        d["prop1_counterexamples"] = r.prop1_violations;
        d["thm1_counterexamples"] = r.thm1_violations;
        return d;
      },
      py::arg("max_cell"));

  m.def(
      "audit",
      [](const std::vector<std::string>& group, const std::vector<std::uint8_t>& label,
         const std::vector<std::uint8_t>& prediction) {
        const AuditReport r = audit(AuditTable{groups_from(group), label, prediction});
        return to_json(r).dump();
      },
      py::arg("group"), py::arg("label"), py::arg("prediction"), "JSON report; L/H tags are 'L' and 'H'.");

  m.def(
      "generate_cohort",
      [](std::size_t n, std::uint64_t seed) {
        CohortSpec spec;
        spec.n = n;
        spec.seed = seed;
        const ScoredCohort c = generate(spec);
        std::vector<std::string> tags;
        for (const Group g : c.group) tags.emplace_back(1, group_tag(g));
        py::dict d;
        d["group"] = tags;
        d["label"] = c.label;
        d["ability"] = c.ability;
        d["base_features"] = c.base_features;
        d["enriched_features"] = c.enriched_features;
        return d;
      },
      py::arg("n") = 100000, py::arg("seed") = CohortSpec{}.seed);

  m.def(
      "train_logistic",
      [](const Eigen::MatrixXd& x, const std::vector<std::uint8_t>& y, double l1_lambda) {
        TrainConfig cfg;
        cfg.l1_lambda = l1_lambda;
        const LinearModel model = l1_lambda > 0.0 ? train_logistic_l1(x, y, cfg) : train_logistic(x, y, cfg);
        return nlohmann::json(model).dump();
      },
      py::arg("features"), py::arg("labels"), py::arg("l1_lambda") = 0.0, "Fitted model as JSON.");
  m.def(
      "predict_scores",
      [](const std::string& model_json, const Eigen::MatrixXd& x) {
        return predict_scores(nlohmann::json::parse(model_json).get<LinearModel>(), x);
      },
      py::arg("model_json"), py::arg("features"));

  m.def(
      "optimal_cutoff",
      [](const std::vector<double>& scores, const std::vector<std::uint8_t>& labels, double k) {
        const CutoffChoice c = optimal_cutoff(scores, labels, ProfitSpec{k});
        return py::make_tuple(c.cutoff, c.profit);
      },
      py::arg("scores"), py::arg("labels"), py::arg("k") = 1.0, "(cutoff, profit) maximizing TP - k FP.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = dispatch(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "(exit code, stdout, stderr) of one CLI invocation.");
}
