#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "horizon/calculus.hpp"
#include "horizon/cli.hpp"
#include "horizon/infinity.hpp"
#include "horizon/lipschitz.hpp"
#include "horizon/optimality.hpp"
#include "horizon/report.hpp"

namespace horizon {
namespace {

struct CliState {
  std::vector<std::string> fns;
  std::vector<std::string> gs;
  std::string set_text;
  int dim = 0;
  std::string index_set;
  std::string out_path;
  std::string format = "json";
  std::string ybar;
  int nx = 0;
  double box = 20.0;
  double grid = 0.05;
  std::string eps_grid = "0.5,0.25,0.125";
  int u_samples = 4;
  std::string fixtures_dir = "fixtures";
  double lambda_scale = 2.0;
  SamplingPlan plan;
};

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',' || c == ';') {
      if (!cur.empty()) out.push_back(std::stod(cur));
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  return out;
}

IndexSet parse_index_set(const std::string& s, int dim) {
  if (s.empty()) return IndexSet::full(dim);
  std::vector<int> one_based;
  std::string cur;
  for (char c : s + ",") {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      cur += c;
    } else {
      if (!cur.empty()) one_based.push_back(std::stoi(cur));
      cur.clear();
    }
  }
  return IndexSet::of(one_based, dim);
}

SamplingPlan plan_from_env_and_flags(const CliState& st) {
  SamplingPlan p;
  if (const char* env = std::getenv("HORIZON_PLAN")) {
    std::ifstream in(env);
    if (!in) fail(Errc::io_error, std::string("cannot read HORIZON_PLAN file ") + env);
    nlohmann::json j;
    in >> j;
    p = plan_from_json(j);
  }
  // explicit flags override the environment plan
  if (st.plan.r0 > 0) p.r0 = st.plan.r0;
  if (st.plan.levels > 0) p.levels = st.plan.levels;
  if (st.plan.dirs_per_level > 0) p.dirs_per_level = st.plan.dirs_per_level;
  if (st.plan.rho > 1) p.rho = st.plan.rho;
  p.seed = st.plan.seed;
  p.validate();
  return p;
}

FunctionSpec require_fn(const CliState& st, std::size_t i = 0) {
  if (st.fns.size() <= i) fail(Errc::usage_error, "missing --fn");
  if (st.dim <= 0) fail(Errc::usage_error, "missing --dim");
  return parse_function(st.fns[i], st.dim);
}

SetSpec require_set(const CliState& st) {
  if (st.set_text.empty()) fail(Errc::usage_error, "missing --set");
  if (st.dim <= 0) fail(Errc::usage_error, "missing --dim");
  return parse_set(st.set_text, st.dim);
}

// --- command handlers -------------------------------------------------------

nlohmann::json cmd_subdiff_inf(const CliState& st, const SamplingPlan& plan) {
  const FunctionSpec f = require_fn(st);
  const InfinityEstimate est = estimate_infinity(f, plan);
  return to_json(est, plan);
}

nlohmann::json cmd_normal_cone_inf(const CliState& st, const SamplingPlan& plan) {
  const SetSpec S = require_set(st);
  const IndexSet I = parse_index_set(st.index_set, st.dim);
  const LimitSet cone = normal_cone_at_infinity(S, I, plan);
  const LimitSet onset = normal_cone_at_infinity_onset(S, I, plan);
  nlohmann::json res;
  res["cone"] = to_json(cone);
  res["onset_route"] = to_json(onset);
  res["route_hausdorff"] = hausdorff_trunc(cone, onset, plan.trunc_radius);
  res["boundary_escape"] = to_json(boundary_escape(S, I, plan));
  return res;
}

nlohmann::json cmd_lipschitz(const CliState& st, const SamplingPlan& plan) {
  return to_json(lipschitz_at_infinity(require_fn(st), plan));
}

nlohmann::json cmd_clarke(const CliState& st, const SamplingPlan& plan) {
  nlohmann::json res;
  res["hull"] = to_json(clarke_at_infinity(require_fn(st), plan));
  return res;
}

nlohmann::json cmd_rule(const CliState& st, const SamplingPlan& plan, const std::string& which) {
  const FunctionSpec f1 = require_fn(st, 0);
  const FunctionSpec f2 = require_fn(st, 1);
  nlohmann::json res;
  const QualificationReport qual = check_sum_qualification(f1, f2, plan);
  res["qualification"] = to_json(qual);
  if (which != "min" && qual.verdict.verdict != Verdict::kHolds) return res;
  RuleResult rr;
  if (which == "sum")
    rr = sum_rule_at_infinity(f1, f2, plan);
  else if (which == "max")
    rr = max_rule_at_infinity(f1, f2, plan);
  else
    rr = min_rule_at_infinity(f1, f2, plan);
  res["bound"] = to_json(rr.bound);
  res["direct"] = to_json(rr.direct);
  res["inclusion"] = to_json(rr.inclusion);
  return res;
}

nlohmann::json cmd_chain(const CliState& st, const SamplingPlan& plan) {
  const FunctionSpec f = require_fn(st);
  if (st.gs.empty()) fail(Errc::usage_error, "chain-rule needs --g inner functions");
  if (st.nx <= 0) fail(Errc::usage_error, "chain-rule needs --inner-dim");
  std::vector<FunctionSpec> g;
  for (const auto& text : st.gs) g.push_back(parse_function(text, st.nx));
  nlohmann::json res;
  try {
    const ChainResult cr = chain_rule_at_infinity(f, g, plan);
    res["coercivity"] = to_json(cr.coercivity);
    res["qualification"] = to_json(cr.qualification);
    res["bound"] = to_json(cr.bound);
    res["singular_bound"] = to_json(cr.singular_bound);
    res["direct"] = to_json(cr.direct);
    res["inclusion"] = to_json(cr.inclusion);
  } catch (const Error& e) {
    if (e.code() != Errc::coercivity_failed && e.code() != Errc::qualification_failed) throw;
    res["error"] = e.what();
    res["direct"] = to_json(estimate_subdiff_at_infinity(make_compose(f, g), plan));
  }
  return res;
}

nlohmann::json cmd_partial(const CliState& st, const SamplingPlan& plan) {
  const FunctionSpec phi = require_fn(st);
  if (st.nx <= 0 || st.nx >= st.dim) fail(Errc::usage_error, "--nx must split the dimensions");
  const std::vector<double> yb = parse_number_list(st.ybar);
  if (static_cast<int>(yb.size()) != st.dim - st.nx)
    fail(Errc::usage_error, "--ybar length must equal dim - nx");
  nlohmann::json res;
  res["certificate"] = to_json(partial_subdiff_check(phi, st.nx, yb, plan));
  return res;
}

nlohmann::json cmd_constraint_cone(const CliState& st, const SamplingPlan& plan) {
  const SetSpec S = require_set(st);
  std::vector<FunctionSpec> g, h;
  switch (S.kind) {
    case SetKind::kConstraintSystem:
      g = S.g;
      h = S.h;
      break;
    case SetKind::kHalfspace:
      g.push_back(make_affine(S.a, -S.b));
      break;
    case SetKind::kPolyhedron:
      for (std::size_t i = 0; i < S.A.size(); ++i) g.push_back(make_affine(S.A[i], -S.bvec[i]));
      break;
    default:
      fail(Errc::usage_error, "constraint-cone needs inequality/equality constraints");
  }
  const ConstraintConeResult cc = constraint_cone_bound(g, h, plan);
  nlohmann::json res;
  res["report"] = to_json(cc.report);
  res["generators"] = cc.generators;
  if (cc.report.verdict.verdict == Verdict::kHolds) {
    res["bound"] = to_json(cc.bound);
    res["direct"] = to_json(cc.direct);
    res["inclusion"] = to_json(cc.inclusion);
  }
  return res;
}

nlohmann::json cmd_optimality(const CliState& st, const SamplingPlan& plan) {
  ProblemSpec P{require_fn(st), st.set_text.empty() ? make_whole(st.dim) : require_set(st), plan,
                st.box, st.grid};
  const AttainmentReport rep = diagnose_attainment(P);
  nlohmann::json res;
  res["oracle"] = to_json(rep.oracle);
  res["condition"] = to_json(rep.condition);
  res["diagnosis"] = attainment_name(rep.diagnosis);
  return res;
}

nlohmann::json cmd_coercivity(const CliState& st, const SamplingPlan& plan) {
  ProblemSpec P{require_fn(st), st.set_text.empty() ? make_whole(st.dim) : require_set(st), plan,
                st.box, st.grid};
  const CoercivityResult cr = certify_coercivity(P);
  nlohmann::json res;
  res["certificate"] = to_json(cr.cert);
  res["sol"] = to_json(cr.sol);
  if (cr.weak_sharp) {
    res["weak_sharp_c"] = cr.weak_sharp->first;
    res["weak_sharp_R"] = cr.weak_sharp->second;
  }
  return res;
}

nlohmann::json cmd_stability(const CliState& st, const SamplingPlan& plan) {
  ProblemSpec P{require_fn(st), st.set_text.empty() ? make_whole(st.dim) : require_set(st), plan,
                st.box, st.grid};
  const StabilityReport rep = stability_scan(P, parse_number_list(st.eps_grid), st.u_samples);
  nlohmann::json res;
  res["eps"] = rep.eps;
  res["max_dist"] = rep.max_dist;
  res["bounded_below_all"] = rep.bounded_below_all;
  res["nonempty_all"] = rep.nonempty_all;
  res["certificate"] = to_json(rep.cert);
  return res;
}

nlohmann::json cmd_scaling(const CliState& st, const SamplingPlan& plan) {
  nlohmann::json res;
  res["certificate"] = to_json(check_scaling_identities(require_fn(st), st.lambda_scale, plan));
  res["lambda"] = st.lambda_scale;
  return res;
}

// --- fixtures ----------------------------------------------------------------

struct FixtureOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

LimitSet parse_expected_set(const std::string& text, int dim, double T) {
  // "points: (a,b);(c,d) rays: (e,f);(g,h)" -- both sections optional
  LimitSet L;
  L.dim = dim;
  L.trunc_radius = T;
  auto read_vecs = [&](const std::string& chunk) {
    std::vector<Vec> vs;
    Vec cur;
    std::string num;
    for (char c : chunk + ";") {
      if ((std::isdigit(static_cast<unsigned char>(c))) || c == '.' || c == '-' || c == 'e' ||
          c == 'E' || c == '+') {
        num += c;
      } else if (c == ',' || c == ')') {
        if (!num.empty()) cur.push_back(std::stod(num));
        num.clear();
        if (c == ')') {
          if (!cur.empty()) vs.push_back(cur);
          cur.clear();
        }
      }
    }
    return vs;
  };
  const std::size_t rpos = text.find("rays:");
  const std::size_t ppos = text.find("points:");
  if (ppos != std::string::npos)
    L.points = read_vecs(text.substr(ppos, rpos == std::string::npos ? text.size() : rpos - ppos));
  if (rpos != std::string::npos) L.rays = read_vecs(text.substr(rpos));
  L.is_cone = L.points.empty();
  if (text.find("affine") != std::string::npos) {
    L.affine_rays = true;
    L.is_cone = false;
  }
  L.normalize();
  return L;
}

FixtureOutcome run_fixture(const std::filesystem::path& path) {
  FixtureOutcome out;
  out.name = path.filename().string();
  std::ifstream in(path);
  if (!in) {
    out.detail = "unreadable";
    return out;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const ProblemFile pf = parse_problem_file(buf.str());
  const int dim = std::stoi(pf.get("dim", "1"));
  SamplingPlan plan;
  if (pf.has("plan.levels")) plan.levels = std::stoi(pf.get("plan.levels"));
  if (pf.has("plan.dirs")) plan.dirs_per_level = std::stoi(pf.get("plan.dirs"));
  if (pf.has("plan.r0")) plan.r0 = std::stod(pf.get("plan.r0"));
  const std::string command = pf.get("command", "subdiff-inf");

  try {
    if (command == "normal-cone-inf") {
      const SetSpec S = parse_set(pf.get("set"), dim);
      const IndexSet I = parse_index_set(pf.get("index", ""), dim);
      const LimitSet cone = normal_cone_at_infinity(S, I, plan);
      const LimitSet expect =
          parse_expected_set(pf.get("expect_set"), dim, plan.trunc_radius);
      const double H = hausdorff_trunc(cone, expect, plan.trunc_radius);
      out.passed = H <= 0.05;
      std::ostringstream os;
      os << "H=" << H;
      out.detail = os.str();
      return out;
    }
    if (command == "subdiff-inf" || command == "singular-inf") {
      const FunctionSpec f = parse_function(pf.get("fn"), dim);
      const InfinityEstimate est = estimate_infinity(f, plan);
      const LimitSet& got = command == "subdiff-inf" ? est.limiting : est.singular;
      const LimitSet expect =
          parse_expected_set(pf.get("expect_set"), dim, plan.trunc_radius);
      const double H = hausdorff_trunc(got, expect, plan.trunc_radius);
      out.passed = H <= 0.05;
      std::ostringstream os;
      os << "H=" << H;
      out.detail = os.str();
      return out;
    }
    if (command == "lipschitz") {
      const FunctionSpec f = parse_function(pf.get("fn"), dim);
      const LipschitzReport rep = lipschitz_at_infinity(f, plan);
      out.passed = verdict_name(rep.verdict.verdict) == pf.get("expect_verdict");
      out.detail = verdict_name(rep.verdict.verdict);
      return out;
    }
    if (command == "optimality") {
      ProblemSpec P{parse_function(pf.get("fn"), dim),
                    pf.has("set") ? parse_set(pf.get("set"), dim) : make_whole(dim), plan,
                    std::stod(pf.get("box", "20")), std::stod(pf.get("grid", "0.05"))};
      const AttainmentReport rep = diagnose_attainment(P);
      bool ok = true;
      if (pf.has("expect_diagnosis")) ok = attainment_name(rep.diagnosis) == pf.get("expect_diagnosis");
      if (pf.has("expect_verdict"))
        ok = ok && verdict_name(rep.condition.verdict) == pf.get("expect_verdict");
      out.passed = ok;
      out.detail = std::string(attainment_name(rep.diagnosis)) + "/" +
                   verdict_name(rep.condition.verdict);
      return out;
    }
    out.detail = "unknown fixture command " + command;
  } catch (const Error& e) {
    if (pf.has("expect_error")) {
      out.passed = std::string(e.what()).find(pf.get("expect_error")) != std::string::npos;
      out.detail = e.what();
      return out;
    }
    out.detail = e.what();
  }
  return out;
}

nlohmann::json cmd_verify_fixtures(const CliState& st) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (!fs::exists(st.fixtures_dir))
    fail(Errc::io_error, "fixtures directory not found: " + st.fixtures_dir);
  for (const auto& ent : fs::directory_iterator(st.fixtures_dir))
    if (ent.path().extension() == ".prob") files.push_back(ent.path());
  std::sort(files.begin(), files.end());
  nlohmann::json res;
  res["fixtures"] = nlohmann::json::array();
  bool all = true;
  for (const auto& f : files) {
    const FixtureOutcome o = run_fixture(f);
    res["fixtures"].push_back(
        {{"name", o.name}, {"passed", o.passed}, {"detail", o.detail}});
    all = all && o.passed;
  }
  res["all_passed"] = all;
  res["count"] = files.size();
  return res;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"asymptotic variational analysis toolkit"};
  app.require_subcommand(1);
  CliState st;
  st.plan.r0 = 0;      // sentinel: flag not set
  st.plan.levels = 0;  // sentinel
  st.plan.dirs_per_level = 0;
  st.plan.rho = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--fn", st.fns, "function in the DSL (repeat for binary rules)");
    sub->add_option("--set", st.set_text, "set block, e.g. 'set { g: x1 <= 0; }'");
    sub->add_option("--dim", st.dim, "ambient dimension");
    sub->add_option("--index-set", st.index_set, "index set, e.g. {1,2}");
    sub->add_option("--plan.r0", st.plan.r0, "initial sampling radius");
    sub->add_option("--plan.levels", st.plan.levels, "number of radius levels");
    sub->add_option("--plan.dirs", st.plan.dirs_per_level, "directions per level");
    sub->add_option("--plan.rho", st.plan.rho, "radius growth factor");
    sub->add_option("--seed", st.plan.seed, "sampling seed");
    sub->add_option("--out", st.out_path, "output file (default stdout)");
    sub->add_option("--format", st.format, "json | csv | pretty");
  };

  std::vector<std::pair<std::string, std::string>> commands = {
      {"subdiff-inf", "limiting subdifferential at infinity"},
      {"singular-inf", "singular subdifferential at infinity"},
      {"normal-cone-inf", "normal cone at infinity of a set"},
      {"lipschitz", "Lipschitz-at-infinity analysis"},
      {"clarke-inf", "Clarke subdifferential at infinity (convex hull)"},
      {"sum-rule", "sum rule at infinity"},
      {"max-rule", "max rule at infinity"},
      {"min-rule", "min rule at infinity"},
      {"chain-rule", "chain rule at infinity"},
      {"partial-check", "partial subdifferential inclusions"},
      {"constraint-cone", "constraint-set normal cone bound"},
      {"optimality", "oracle + condition at infinity"},
      {"coercivity", "coercivity and weak sharp minima"},
      {"stability", "perturbation stability scan"},
      {"scaling-check", "positive-scaling identities"},
      {"verify-fixtures", "run the bundled example corpus"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    add_common(sub);
    subs[name] = sub;
  }
  subs["chain-rule"]->add_option("--g", st.gs, "inner functions (repeat)");
  subs["chain-rule"]->add_option("--inner-dim", st.nx, "inner space dimension");
  subs["partial-check"]->add_option("--nx", st.nx, "leading block size");
  subs["partial-check"]->add_option("--ybar", st.ybar, "fixed trailing coordinates");
  subs["scaling-check"]->add_option("--lambda", st.lambda_scale, "positive scale factor");
  for (const char* c : {"optimality", "coercivity", "stability"}) {
    subs[c]->add_option("--box", st.box, "oracle box bound M");
    subs[c]->add_option("--grid", st.grid, "oracle grid step");
  }
  subs["stability"]->add_option("--eps-grid", st.eps_grid, "perturbation radii");
  subs["stability"]->add_option("--u-samples", st.u_samples, "directions per radius");
  subs["verify-fixtures"]->add_option("--dir", st.fixtures_dir, "fixture directory");

  std::vector<const char*> argv;
  argv.push_back("horizon");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help() << std::endl;
      return 0;
    }
    std::cerr << e.what() << std::endl;
    return 64;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  nlohmann::json inputs;
  if (!st.fns.empty()) inputs["fn"] = st.fns;
  if (!st.set_text.empty()) inputs["set"] = st.set_text;
  if (st.dim > 0) inputs["dim"] = st.dim;
  if (!st.index_set.empty()) inputs["index_set"] = st.index_set;

  try {
    SamplingPlan plan;
    if (cmd != "verify-fixtures") plan = plan_from_env_and_flags(st);
    inputs["plan"] = plan_to_json(plan);
    inputs["seed"] = plan.seed;
    nlohmann::json result;
    if (cmd == "subdiff-inf" || cmd == "singular-inf")
      result = cmd_subdiff_inf(st, plan);
    else if (cmd == "normal-cone-inf")
      result = cmd_normal_cone_inf(st, plan);
    else if (cmd == "lipschitz")
      result = cmd_lipschitz(st, plan);
    else if (cmd == "clarke-inf")
      result = cmd_clarke(st, plan);
    else if (cmd == "sum-rule")
      result = cmd_rule(st, plan, "sum");
    else if (cmd == "max-rule")
      result = cmd_rule(st, plan, "max");
    else if (cmd == "min-rule")
      result = cmd_rule(st, plan, "min");
    else if (cmd == "chain-rule")
      result = cmd_chain(st, plan);
    else if (cmd == "partial-check")
      result = cmd_partial(st, plan);
    else if (cmd == "constraint-cone")
      result = cmd_constraint_cone(st, plan);
    else if (cmd == "optimality")
      result = cmd_optimality(st, plan);
    else if (cmd == "coercivity")
      result = cmd_coercivity(st, plan);
    else if (cmd == "stability")
      result = cmd_stability(st, plan);
    else if (cmd == "scaling-check")
      result = cmd_scaling(st, plan);
    else if (cmd == "verify-fixtures")
      result = cmd_verify_fixtures(st);

    const nlohmann::json report = make_report(cmd, inputs, result);
    std::ostringstream body;
    if (st.format == "csv") {
      export_plot_data(report, body);
    } else if (st.format == "pretty") {
      body << report.dump(2) << "\n";
    } else {
      body << report.dump() << "\n";
    }
    if (st.out_path.empty()) {
      std::cout << body.str();
    } else {
      std::ofstream outf(st.out_path, std::ios::binary);
      if (!outf) {
        std::cerr << "cannot open output file " << st.out_path << std::endl;
        return 74;
      }
      outf << body.str();
    }
    if (cmd == "verify-fixtures" && !result.value("all_passed", false)) return 1;
    return report_has_inconclusive(report) ? 2 : 0;
  } catch (const Error& e) {
    switch (e.code()) {
      case Errc::usage_error:
        std::cerr << e.what() << std::endl;
        return 64;
      case Errc::io_error:
        std::cerr << e.what() << std::endl;
        return 74;
      default:
        std::cerr << e.what() << std::endl;
        return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}

}  // namespace horizon
