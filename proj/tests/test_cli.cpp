#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "horizon/cli.hpp"
#include "horizon/report.hpp"

using nlohmann::json;

namespace {

std::string temp_path(const std::string& name) {
  return std::string("/tmp/horizon_test_") + name;
}

json run_to_json(const std::vector<std::string>& args, const std::string& name,
                 int expect_code = 0) {
  auto full = args;
  const std::string path = temp_path(name);
  full.push_back("--out");
  full.push_back(path);
  const int code = horizon::run_cli(full);
  CHECK(code == expect_code);
  std::ifstream in(path);
  REQUIRE(in.good());
  json j;
  in >> j;
  return j;
}

// Minimal structural validator covering the schema subset we publish:
// type / properties / required / items / enum.
bool validate_schema(const json& schema, const json& value, std::string* why) {
  if (schema.contains("enum")) {
    for (const auto& v : schema["enum"])
      if (v == value) return true;
    *why = "enum mismatch";
    return false;
  }
  if (!schema.contains("type")) return true;
  const std::string type = schema["type"].get<std::string>();
  if (type == "object") {
    if (!value.is_object()) {
      *why = "expected object";
      return false;
    }
    if (schema.contains("required"))
      for (const auto& k : schema["required"])
        if (!value.contains(k.get<std::string>())) {
          *why = "missing key " + k.get<std::string>();
          return false;
        }
    if (schema.contains("properties"))
      for (const auto& [k, sub] : schema["properties"].items())
        if (value.contains(k) && !validate_schema(sub, value[k], why)) return false;
    return true;
  }
  if (type == "array") {
    if (!value.is_array()) {
      *why = "expected array";
      return false;
    }
    if (schema.contains("items"))
      for (const auto& item : value)
        if (!validate_schema(schema["items"], item, why)) return false;
    return true;
  }
  if (type == "string") return value.is_string() || (*why = "expected string").empty();
  if (type == "number") return value.is_number() || (*why = "expected number").empty();
  if (type == "integer") return value.is_number_integer() || (*why = "expected int").empty();
  if (type == "boolean") return value.is_boolean() || (*why = "expected bool").empty();
  return true;
}

}  // namespace

TEST_CASE("subdiff-inf emits the documented report") {
  const json j = run_to_json({"subdiff-inf", "--fn", "abs(x1)", "--dim", "1"}, "abs.json");
  CHECK(j["schema"] == "horizon/1");
  CHECK(j["command"] == "subdiff-inf");
  const auto& pts = j["result"]["limiting"]["points"];
  REQUIRE(pts.size() == 2);
  CHECK(pts[0][0].get<double>() == doctest::Approx(-1.0));
  CHECK(pts[1][0].get<double>() == doctest::Approx(1.0));
  CHECK(j["result"].contains("trace"));
}

TEST_CASE("lipschitz verdict is a resolved exit") {
  const json j = run_to_json({"lipschitz", "--fn", "exp(x1)", "--dim", "1"}, "lip.json", 0);
  CHECK(j["result"]["verdict"]["verdict"] == "Fails");
}

TEST_CASE("usage errors exit with 64") {
  CHECK(horizon::run_cli({"subdiff-inf", "--dim", "1"}) == 64);
  CHECK(horizon::run_cli({"no-such-command"}) == 64);
}

TEST_CASE("normal-cone-inf reports both routes") {
  const json j = run_to_json({"normal-cone-inf", "--set", "set { graph: x2 = 1/x1; }", "--dim",
                              "2", "--index-set", "{1,2}"},
                             "cone.json");
  CHECK(j["result"]["route_hausdorff"].get<double>() <= 0.05);
  CHECK(j["result"]["boundary_escape"]["verdict"] == "Holds");
}

TEST_CASE("reports are byte-identical across equal-seed runs") {
  for (int round = 0; round < 2; ++round) {
    horizon::run_cli({"subdiff-inf", "--fn", "x1^3 + x2", "--dim", "2", "--seed", "11", "--out",
                      temp_path(std::string("det") + std::to_string(round))});
  }
  std::ifstream a(temp_path("det0")), b(temp_path("det1"));
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(!sa.str().empty());
}

TEST_CASE("csv export carries rays and traces") {
  const std::string path = temp_path("cone.csv");
  horizon::run_cli({"normal-cone-inf", "--set", "set { graph: x2 = 1/x1; }", "--dim", "2",
                    "--format", "csv", "--out", path});
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str().find("series,kind") != std::string::npos);
  CHECK(buf.str().find(",ray,") != std::string::npos);
}

TEST_CASE("every subcommand report validates against the published schema") {
  std::ifstream sf("schema/horizon-report.schema.json");
  if (!sf.good()) sf = std::ifstream("../schema/horizon-report.schema.json");
  REQUIRE(sf.good());
  json schema;
  sf >> schema;
  const std::vector<std::pair<std::string, std::vector<std::string>>> runs = {
      {"s1", {"subdiff-inf", "--fn", "abs(x1)", "--dim", "1"}},
      {"s2", {"lipschitz", "--fn", "abs(x1)", "--dim", "1"}},
      {"s3", {"min-rule", "--fn", "x1", "--fn", "2*x1", "--dim", "1"}},
      {"s4",
       {"normal-cone-inf", "--set", "set { x1 <= 0; }", "--dim", "2", "--index-set", "{1,2}"}},
  };
  for (const auto& [name, args] : runs) {
    const json rep = run_to_json(args, "schema_" + name + ".json");
    std::string why;
    const bool ok = validate_schema(schema, rep, &why);
    INFO(name << ": " << why);
    CHECK(ok);
  }
}

TEST_CASE("stability tables export as csv rows") {
  nlohmann::json rep;
  rep["schema"] = "horizon/1";
  rep["command"] = "stability";
  rep["inputs"] = nlohmann::json::object();
  rep["result"]["eps"] = {0.5, 0.25};
  rep["result"]["max_dist"] = {0.25, 0.125};
  std::ostringstream os;
  horizon::export_plot_data(rep, os);
  CHECK(os.str().find("stability,eps_dist,0.5,0.25") != std::string::npos);
  CHECK(os.str().find("stability,eps_dist,0.25,0.125") != std::string::npos);
}

TEST_CASE("HORIZON_PLAN supplies defaults") {
  const std::string plan_path = temp_path("plan.json");
  {
    std::ofstream out(plan_path);
    out << R"({"r0":4.0,"rho":2.0,"levels":6,"dirs_per_level":16,"cluster_tol":0.02,)"
        << R"("divergence_tau":8.0,"window":3,"seed":5,"trunc_radius":2.0})";
  }
  setenv("HORIZON_PLAN", plan_path.c_str(), 1);
  const json j = run_to_json({"subdiff-inf", "--fn", "abs(x1)", "--dim", "1"}, "envplan.json");
  unsetenv("HORIZON_PLAN");
  CHECK(j["inputs"]["plan"]["levels"] == 6);
  CHECK(j["inputs"]["plan"]["dirs_per_level"] == 16);
}

TEST_CASE("problem file parsing") {
  const std::string text = "# comment\ndim: 2\nfn: exp(x1) + x2^2\nset: set { whole }\n";
  const horizon::ProblemFile pf = horizon::parse_problem_file(text);
  CHECK(pf.get("dim") == "2");
  CHECK(pf.get("fn") == "exp(x1) + x2^2");
  CHECK(pf.get("set") == "set { whole }");
  CHECK(pf.get("missing", "x") == "x");
}
