#include <map>
#include <ostream>
#include <sstream>

#include "horizon/report.hpp"

namespace horizon {

nlohmann::json make_report(const std::string& command, nlohmann::json inputs,
                           nlohmann::json result) {
  nlohmann::json j;
  j["schema"] = "horizon/1";
  j["command"] = command;
  j["inputs"] = std::move(inputs);
  j["result"] = std::move(result);
  return j;
}

nlohmann::json plan_to_json(const SamplingPlan& plan) {
  return nlohmann::json{{"r0", plan.r0},
                        {"rho", plan.rho},
                        {"levels", plan.levels},
                        {"dirs_per_level", plan.dirs_per_level},
                        {"cluster_tol", plan.cluster_tol},
                        {"divergence_tau", plan.divergence_tau},
                        {"window", plan.window},
                        {"seed", plan.seed},
                        {"trunc_radius", plan.trunc_radius},
                        {"adaptive_seeds", plan.adaptive_seeds}};
}

SamplingPlan plan_from_json(const nlohmann::json& j) {
  SamplingPlan p;
  p.r0 = j.value("r0", p.r0);
  p.rho = j.value("rho", p.rho);
  p.levels = j.value("levels", p.levels);
  p.dirs_per_level = j.value("dirs_per_level", p.dirs_per_level);
  p.cluster_tol = j.value("cluster_tol", p.cluster_tol);
  p.divergence_tau = j.value("divergence_tau", p.divergence_tau);
  p.window = j.value("window", p.window);
  p.seed = j.value("seed", p.seed);
  p.trunc_radius = j.value("trunc_radius", p.trunc_radius);
  p.adaptive_seeds = j.value("adaptive_seeds", p.adaptive_seeds);
  p.validate();
  return p;
}

namespace {

void csv_limit_set(const nlohmann::json& L, const std::string& label, std::ostream& os) {
  const int dim = L.value("dim", 0);
  if (dim > 3) return;
  for (const auto& p : L.at("points")) {
    os << label << ",point";
    for (const auto& c : p) os << "," << c.get<double>();
    os << "\n";
  }
  for (const auto& r : L.at("rays")) {
    os << label << ",ray";
    for (const auto& c : r) os << "," << c.get<double>();
    os << "\n";
  }
}

void walk(const nlohmann::json& j, const std::string& path, std::ostream& os, bool* too_high) {
  if (j.is_object()) {
    if (j.contains("points") && j.contains("rays") && j.contains("is_cone")) {
      if (j.value("dim", 0) > 3) *too_high = true;
      csv_limit_set(j, path.empty() ? "set" : path, os);
      return;
    }
    for (const auto& [k, v] : j.items())
      walk(v, path.empty() ? k : path + "." + k, os, too_high);
  }
}

}  // namespace

void export_plot_data(const nlohmann::json& report, std::ostream& os) {
  os << "series,kind,c1,c2,c3\n";
  bool too_high = false;
  walk(report, "", os, &too_high);
  // per-level traces / per-eps tables
  if (report.contains("result")) {
    const auto& res = report["result"];
    if (res.contains("trace"))
      for (const auto& line : res["trace"])
        os << "trace,line," << '"' << line.get<std::string>() << '"' << ",,\n";
    if (res.contains("eps") && res.contains("max_dist")) {
      const auto& eps = res["eps"];
      const auto& md = res["max_dist"];
      for (std::size_t i = 0; i < eps.size(); ++i)
        os << "stability,eps_dist," << eps[i].get<double>() << "," << md[i].get<double>()
           << ",\n";
    }
  }
  if (too_high) os << "note,dimension_too_high,,,\n";
}

std::string ProblemFile::get(const std::string& key, const std::string& fallback) const {
  auto it = entries.find(key);
  return it == entries.end() ? fallback : it->second;
}

ProblemFile parse_problem_file(const std::string& text) {
  ProblemFile pf;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, colon));
    const std::string value = trim(line.substr(colon + 1));
    if (!key.empty()) pf.entries[key] = value;
  }
  return pf;
}

bool report_has_inconclusive(const nlohmann::json& j) {
  if (j.is_object()) {
    if (j.contains("verdict") && j["verdict"].is_string() &&
        j["verdict"].get<std::string>() == "Inconclusive")
      return true;
    for (const auto& [k, v] : j.items()) {
      (void)k;
      if (report_has_inconclusive(v)) return true;
    }
  } else if (j.is_array()) {
    for (const auto& v : j)
      if (report_has_inconclusive(v)) return true;
  }
  return false;
}

}  // namespace horizon
