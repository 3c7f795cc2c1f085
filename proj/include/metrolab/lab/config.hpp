#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "metrolab/errors.hpp"
#include "metrolab/linalg.hpp"

namespace metrolab::lab {

struct ExperimentConfig {
  std::string scenario;
  std::map<std::string, std::vector<double>> grids;
  std::map<std::string, double> params;
  std::map<std::string, double> tolerances;
  std::uint64_t seed = 20240611;
  std::string output_dir = "results";

  const std::vector<double>& grid(const std::string& k) const {
    auto it = grids.find(k);
    if (it == grids.end()) throw ConfigError("config: scenario '" + scenario + "' has no grid '" + k + "'");
    return it->second;
  }

  std::vector<int> int_grid(const std::string& k) const {
    std::vector<int> out;
    for (double v : grid(k)) {
      if (v != std::round(v)) throw ConfigError("config: grid '" + k + "' must hold integers");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  double param(const std::string& k) const {
    auto it = params.find(k);
    if (it == params.end()) throw ConfigError("config: scenario '" + scenario + "' has no parameter '" + k + "'");
    return it->second;
  }

  double tolerance(const std::string& k) const {
    auto it = tolerances.find(k);
    if (it == tolerances.end()) throw ConfigError("config: unknown tolerance '" + k + "'");
    return it->second;
  }

  GroupingTolerance grouping() const { return {tolerance("grouping_abs"), tolerance("grouping_rel")}; }

  nlohmann::json echo() const {
    return {{"scenario", scenario},
            {"grids", grids},
            {"params", params},
            {"tolerances", tolerances},
            {"seed", seed},
            {"output", {{"dir", output_dir}}}};
  }
};

inline std::map<std::string, double> default_tolerances() {
  // fd_step = 0 selects the documented automatic step.
  return {{"grouping_abs", 1e-12}, {"grouping_rel", 1e-10}, {"fd_step", 0.0}, {"lindblad_drift", 1e-6}};
}

struct GridCap {
  std::string grid;
  int max_n;
  int min_n;
};

// Defaults for one scenario; a user config may override but not add keys.
struct ScenarioDefaults {
  std::map<std::string, std::vector<double>> grids;
  std::map<std::string, double> params;
  std::vector<GridCap> caps;
};

inline void reject_unknown(const nlohmann::json& obj, const std::vector<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == it.key();
    if (!ok) throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
  }
}

template <class Map>
std::vector<std::string> keys_of(const Map& m) {
  std::vector<std::string> k;
  for (const auto& [name, v] : m) k.push_back(name);
  return k;
}

inline double as_number(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError("config: '" + where + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError("config: '" + where + "' must be finite");
  return d;
}

inline ExperimentConfig resolve_config(const nlohmann::json& j, const std::string& scenario,
                                       const ScenarioDefaults& defs) {
  ExperimentConfig cfg;
  cfg.scenario = scenario;
  cfg.grids = defs.grids;
  cfg.params = defs.params;
  cfg.tolerances = default_tolerances();
  reject_unknown(j, {"scenario", "grids", "params", "tolerances", "seed", "output"}, "top level");
  if (j.contains("grids")) {
    reject_unknown(j["grids"], keys_of(defs.grids), "grids");
    for (auto it = j["grids"].begin(); it != j["grids"].end(); ++it) {
      const nlohmann::json& v = it.value();
      std::vector<double> g;
      if (v.is_array()) {
        for (const auto& x : v) g.push_back(as_number(x, "grids." + it.key()));
      } else {
        g.push_back(as_number(v, "grids." + it.key()));
      }
      cfg.grids[it.key()] = g;
    }
  }
  if (j.contains("params")) {
    reject_unknown(j["params"], keys_of(defs.params), "params");
    for (auto it = j["params"].begin(); it != j["params"].end(); ++it)
      cfg.params[it.key()] = as_number(it.value(), "params." + it.key());
  }
  if (j.contains("tolerances")) {
    reject_unknown(j["tolerances"], keys_of(cfg.tolerances), "tolerances");
    for (auto it = j["tolerances"].begin(); it != j["tolerances"].end(); ++it) {
      const double v = as_number(it.value(), "tolerances." + it.key());
      if (v < 0) throw ConfigError("config: tolerance '" + it.key() + "' must be >= 0");
      cfg.tolerances[it.key()] = v;
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) throw ConfigError("config: seed must be an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output")) {
    reject_unknown(j["output"], {"dir"}, "output");
    if (j["output"].contains("dir")) {
      if (!j["output"]["dir"].is_string()) throw ConfigError("config: output.dir must be a string");
      cfg.output_dir = j["output"]["dir"].get<std::string>();
    }
  }
  for (const auto& [name, g] : cfg.grids)
    if (g.empty()) throw ConfigError("config: grid '" + name + "' is empty");
  for (const auto& cap : defs.caps) {
    for (int n : cfg.int_grid(cap.grid)) {
      if (n < cap.min_n || n > cap.max_n) {
        throw ConfigError("config: grid '" + cap.grid + "' value " + std::to_string(n) + " outside [" +
                          std::to_string(cap.min_n) + ", " + std::to_string(cap.max_n) + "] for scenario '" +
                          scenario + "'");
      }
    }
  }
  return cfg;
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace metrolab::lab
