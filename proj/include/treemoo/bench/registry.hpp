#pragma once

// Problem lookup by name or by a small JSON problem file:
//   {"problem": "windfarm", "wind_rose": "rose.tsv", "turbine": "curve.tsv"}
// Relative paths in a problem file are resolved against the file's directory.

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "treemoo/bench/battery.hpp"
#include "treemoo/bench/synthetic.hpp"
#include "treemoo/bench/windfarm.hpp"
#include "treemoo/io.hpp"

namespace treemoo::bench {

inline std::vector<std::string> problem_names() {
  auto v = synthetic_names();
  v.push_back("windfarm");
  v.push_back("battery");
  return v;
}

inline std::string available_problems() {
  std::string s;
  for (const auto& n : problem_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

inline std::unique_ptr<Problem> make_problem(const std::string& name) {
  if (auto p = make_synthetic(name)) return p;
  if (name == "windfarm") return std::make_unique<WindfarmProblem>();
  if (name == "battery") return std::make_unique<BatteryProblem>();
  throw Error("unknown problem '" + name + "'; available: " + available_problems());
}

inline std::unique_ptr<Problem> load_problem_file(const std::string& path) {
  const auto j = io::read_json(path);
  if (!j.is_object() || !j.contains("problem"))
    throw Error(path + ": a problem file needs a \"problem\" field");
  const auto name = j.at("problem").get<std::string>();
  const auto dir = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& key) {
    const std::filesystem::path p = j.at(key).get<std::string>();
    return (p.is_absolute() ? p : dir / p).string();
  };
  for (const auto& [k, v] : j.items())
    if (k != "problem" && k != "wind_rose" && k != "turbine")
      throw Error(path + ": unknown key '" + k + "'");
  if (j.contains("wind_rose") || j.contains("turbine")) {
    if (name != "windfarm") throw Error(path + ": wind data only applies to the windfarm problem");
    if (!j.contains("wind_rose") || !j.contains("turbine"))
      throw Error(path + ": give both wind_rose and turbine");
    return std::make_unique<WindfarmProblem>(
        load_windfarm_model(resolve("wind_rose"), resolve("turbine")));
  }
  return make_problem(name);
}

}  // namespace treemoo::bench
