#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "horizon/calculus.hpp"
#include "horizon/infinity.hpp"
#include "horizon/lipschitz.hpp"
#include "horizon/optimality.hpp"
#include "horizon/report.hpp"

namespace py = pybind11;
using namespace horizon;

namespace {

SamplingPlan plan_from_kwargs(unsigned seed, int levels, int dirs) {
  SamplingPlan p;
  p.seed = seed;
  if (levels > 0) p.levels = levels;
  if (dirs > 0) p.dirs_per_level = dirs;
  p.validate();
  return p;
}

std::string json_str(const nlohmann::json& j) { return j.dump(); }

}  // namespace

PYBIND11_MODULE(_horizon, m) {
  m.doc() = "asymptotic variational analysis: subdifferentials and normal cones at infinity";

  py::register_exception<Error>(m, "HorizonError");

  m.def(
      "evaluate",
      [](const std::string& fn, int dim, const std::vector<double>& x) {
        return evaluate(parse_function(fn, dim), x);
      },
      py::arg("fn"), py::arg("dim"), py::arg("x"));

  m.def(
      "gradient",
      [](const std::string& fn, int dim, const std::vector<double>& x) {
        return gradient_exact(parse_function(fn, dim), x);
      },
      py::arg("fn"), py::arg("dim"), py::arg("x"));

  m.def(
      "subdiff_at_infinity",
      [](const std::string& fn, int dim, unsigned seed, int levels, int dirs) {
        const SamplingPlan plan = plan_from_kwargs(seed, levels, dirs);
        return json_str(to_json(estimate_infinity(parse_function(fn, dim), plan), plan));
      },
      py::arg("fn"), py::arg("dim"), py::arg("seed") = 0, py::arg("levels") = 0,
      py::arg("dirs") = 0);

  m.def(
      "normal_cone_at_infinity",
      [](const std::string& set_text, int dim, const std::vector<int>& index_set, unsigned seed,
         int levels, int dirs) {
        const SamplingPlan plan = plan_from_kwargs(seed, levels, dirs);
        const SetSpec S = parse_set(set_text, dim);
        const IndexSet I =
            index_set.empty() ? IndexSet::full(dim) : IndexSet::of(index_set, dim);
        return json_str(to_json(normal_cone_at_infinity(S, I, plan)));
      },
      py::arg("set"), py::arg("dim"), py::arg("index_set") = std::vector<int>{},
      py::arg("seed") = 0, py::arg("levels") = 0, py::arg("dirs") = 0);

  m.def(
      "lipschitz_at_infinity",
      [](const std::string& fn, int dim, unsigned seed) {
        const SamplingPlan plan = plan_from_kwargs(seed, 0, 0);
        return json_str(to_json(lipschitz_at_infinity(parse_function(fn, dim), plan)));
      },
      py::arg("fn"), py::arg("dim"), py::arg("seed") = 0);

  m.def(
      "clarke_at_infinity",
      [](const std::string& fn, int dim, unsigned seed) {
        const SamplingPlan plan = plan_from_kwargs(seed, 0, 0);
        return json_str(to_json(clarke_at_infinity(parse_function(fn, dim), plan)));
      },
      py::arg("fn"), py::arg("dim"), py::arg("seed") = 0);

  m.def(
      "check_optimality",
      [](const std::string& fn, const std::string& set_text, int dim, double box, double grid) {
        ProblemSpec P{parse_function(fn, dim),
                      set_text.empty() ? make_whole(dim) : parse_set(set_text, dim),
                      SamplingPlan{}, box, grid};
        const AttainmentReport rep = diagnose_attainment(P);
        nlohmann::json j;
        j["oracle"] = to_json(rep.oracle);
        j["condition"] = to_json(rep.condition);
        j["diagnosis"] = attainment_name(rep.diagnosis);
        return json_str(j);
      },
      py::arg("fn"), py::arg("set") = std::string(), py::arg("dim") = 1, py::arg("box") = 20.0,
      py::arg("grid") = 0.05);

  m.def(
      "certify_coercivity",
      [](const std::string& fn, const std::string& set_text, int dim, double box, double grid) {
        ProblemSpec P{parse_function(fn, dim),
                      set_text.empty() ? make_whole(dim) : parse_set(set_text, dim),
                      SamplingPlan{}, box, grid};
        const CoercivityResult res = certify_coercivity(P);
        nlohmann::json j;
        j["certificate"] = to_json(res.cert);
        j["sol"] = to_json(res.sol);
        if (res.weak_sharp) {
          j["weak_sharp_c"] = res.weak_sharp->first;
          j["weak_sharp_R"] = res.weak_sharp->second;
        }
        return json_str(j);
      },
      py::arg("fn"), py::arg("set") = std::string(), py::arg("dim") = 1, py::arg("box") = 20.0,
      py::arg("grid") = 0.05);
}
