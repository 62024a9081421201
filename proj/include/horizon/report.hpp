#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "horizon/limit_set.hpp"

namespace horizon {

// Envelope every CLI report lives in.
nlohmann::json make_report(const std::string& command, nlohmann::json inputs,
                           nlohmann::json result);

nlohmann::json plan_to_json(const SamplingPlan& plan);
SamplingPlan plan_from_json(const nlohmann::json& j);

// CSV export of a report: sampled directions, accepted rays/points, and
// per-level traces.  Reports over R^n with n > 3 only carry trace tables.
void export_plot_data(const nlohmann::json& report, std::ostream& os);

// Problem files: '#' comments and 'key: value' lines (fn, set, dim, index,
// command, plan.*, box, grid, expect_*).
struct ProblemFile {
  std::map<std::string, std::string> entries;

  bool has(const std::string& key) const { return entries.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback = "") const;
};
ProblemFile parse_problem_file(const std::string& text);

// Did any nested object resolve to an Inconclusive verdict?
bool report_has_inconclusive(const nlohmann::json& j);

}  // namespace horizon
