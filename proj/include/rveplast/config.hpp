#pragma once

// Run configuration: one flat JSON document, overridden key by key by
// command-line flags. Defaults depend on the experiment kind.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "rveplast/assembly.hpp"
#include "rveplast/randfield.hpp"
#include "rveplast/solver.hpp"

namespace rveplast {

enum class Experiment { cyclic, monotonic, error_study, variance_study, custom_path };

inline std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::cyclic: return "cyclic";
    case Experiment::monotonic: return "monotonic";
    case Experiment::error_study: return "error-study";
    case Experiment::variance_study: return "variance-study";
    case Experiment::custom_path: return "custom-path";
  }
  return "?";
}

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : "config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Environment variable holding the default worker count.
inline constexpr const char* kThreadsEnv = "RVE_PLAST_THREADS";

struct RunConfig {
  Experiment experiment = Experiment::cyclic;
  int L = 4;
  std::vector<int> L_list;
  int L_max = 0;
  int M = 5;
  int N = 50;
  double T = 1.0;
  std::uint64_t seed = 1;
  MaterialLaw law;
  SolverSettings solver;
  std::string out = ".";
  int threads = 1;
  ClampMode clamp = ClampMode::periodic_corner;
  double amplitude = 3e-3;
  double frequency = 8.0;
  double rate = 0.0034;
  std::string path_file;
  int window_lo = 6;
  int window_hi = 26;
};

namespace config_detail {

enum class Kind { string, integer, unsigned64, real, int_list };

inline const std::map<std::string, Kind>& schema() {
  static const std::map<std::string, Kind> keys{
      {"experiment", Kind::string},   {"L", Kind::integer},          {"L_list", Kind::int_list},
      {"L_max", Kind::integer},       {"M", Kind::integer},          {"N", Kind::integer},
      {"T", Kind::real},              {"seed", Kind::unsigned64},    {"a_lo", Kind::real},
      {"a_hi", Kind::real},           {"h_lo", Kind::real},          {"h_hi", Kind::real},
      {"sy_lo", Kind::real},          {"sy_hi", Kind::real},         {"tol_increment", Kind::real},
      {"tol_energy", Kind::real},     {"max_outer", Kind::integer},  {"kink_epsilon", Kind::real},
      {"out", Kind::string},          {"threads", Kind::integer},    {"clamp", Kind::string},
      {"amplitude", Kind::real},      {"frequency", Kind::real},     {"rate", Kind::real},
      {"path_file", Kind::string},    {"window", Kind::int_list},
  };
  return keys;
}

inline Experiment parse_experiment(const std::string& s) {
  if (s == "cyclic") return Experiment::cyclic;
  if (s == "monotonic") return Experiment::monotonic;
  if (s == "error-study") return Experiment::error_study;
  if (s == "variance-study") return Experiment::variance_study;
  if (s == "custom-path") return Experiment::custom_path;
  throw ConfigError("experiment", "unknown experiment '" + s +
                                      "' (expected cyclic, monotonic, error-study, variance-study, custom-path)");
}

/// Converts a flag's text to the JSON value the key expects.
inline nlohmann::json flag_value(const std::string& key, const std::string& text) {
  const auto it = schema().find(key);
  if (it == schema().end()) throw ConfigError(key, "unknown key");
  try {
    std::size_t used = 0;
    switch (it->second) {
      case Kind::string: return text;
      case Kind::integer: {
        const long long v = std::stoll(text, &used);
        if (used != text.size()) break;
        return v;
      }
      case Kind::unsigned64: {
        if (!text.empty() && text[0] == '-') break;
        const unsigned long long v = std::stoull(text, &used);
        if (used != text.size()) break;
        return v;
      }
      case Kind::real: {
        const double v = std::stod(text, &used);
        if (used != text.size()) break;
        return v;
      }
      case Kind::int_list: {
        nlohmann::json arr = nlohmann::json::array();
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const long long v = std::stoll(item, &used);
          if (used != item.size()) throw std::invalid_argument(item);
          arr.push_back(v);
        }
        return arr;
      }
    }
  } catch (const std::exception&) {
  }
  throw ConfigError(key, "cannot parse value '" + text + "'");
}

inline long long get_int(const nlohmann::json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  return v.get<long long>();
}

inline double get_real(const nlohmann::json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}

inline std::string get_string(const nlohmann::json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

inline std::vector<int> get_int_list(const nlohmann::json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_array()) throw ConfigError(key, "expected an array of integers");
  std::vector<int> out;
  for (const auto& x : v) {
    if (!x.is_number_integer()) throw ConfigError(key, "expected an array of integers");
    out.push_back(x.get<int>());
  }
  return out;
}

inline int default_threads() {
  if (const char* env = std::getenv(kThreadsEnv)) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError("threads", std::string("environment variable ") + kThreadsEnv + " must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace config_detail

/// Merges `flags` (key -> text, as typed on the command line) over `doc` and
/// validates the result.
inline RunConfig parse_config(nlohmann::json doc, const std::map<std::string, std::string>& flags = {}) {
  using namespace config_detail;
  if (doc.is_null()) doc = nlohmann::json::object();
  if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
  for (const auto& [key, text] : flags) doc[key] = flag_value(key, text);
  for (const auto& item : doc.items())
    if (!schema().contains(item.key())) throw ConfigError(item.key(), "unknown key");

  RunConfig c;
  if (!doc.contains("experiment")) throw ConfigError("experiment", "missing");
  c.experiment = parse_experiment(get_string(doc, "experiment"));
  switch (c.experiment) {
    case Experiment::cyclic: c.L = 4; c.M = 5; break;
    case Experiment::monotonic: c.L = 30; c.M = 40; break;
    case Experiment::error_study:
      c.M = 25;
      c.L_max = 42;
      c.L_list = {6, 10, 14, 18, 22, 26, 30, 34, 38, 42};
      break;
    case Experiment::variance_study:
      c.M = 25;
      c.L_list = {6, 10, 14, 18, 22};
      break;
    case Experiment::custom_path: c.L = 4; c.M = 1; break;
  }
  c.threads = default_threads();

  auto has = [&](const char* k) { return doc.contains(k); };
  if (has("L")) c.L = static_cast<int>(get_int(doc, "L"));
  if (has("L_list")) c.L_list = get_int_list(doc, "L_list");
  if (has("L_max")) c.L_max = static_cast<int>(get_int(doc, "L_max"));
  if (has("M")) c.M = static_cast<int>(get_int(doc, "M"));
  if (has("N")) c.N = static_cast<int>(get_int(doc, "N"));
  if (has("T")) c.T = get_real(doc, "T");
  if (has("seed")) {
    const auto& v = doc.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError("seed", "expected a nonnegative integer");
    c.seed = v.get<std::uint64_t>();
  }
  if (has("a_lo")) c.law.a.lo = get_real(doc, "a_lo");
  if (has("a_hi")) c.law.a.hi = get_real(doc, "a_hi");
  if (has("h_lo")) c.law.h.lo = get_real(doc, "h_lo");
  if (has("h_hi")) c.law.h.hi = get_real(doc, "h_hi");
  if (has("sy_lo")) c.law.sy.lo = get_real(doc, "sy_lo");
  if (has("sy_hi")) c.law.sy.hi = get_real(doc, "sy_hi");
  if (has("tol_increment")) c.solver.tol_increment = get_real(doc, "tol_increment");
  if (has("tol_energy")) c.solver.tol_energy = get_real(doc, "tol_energy");
  if (has("max_outer")) c.solver.max_outer = static_cast<int>(get_int(doc, "max_outer"));
  if (has("kink_epsilon")) c.solver.kink_epsilon = get_real(doc, "kink_epsilon");
  if (has("out")) c.out = get_string(doc, "out");
  if (has("threads")) c.threads = static_cast<int>(get_int(doc, "threads"));
  if (has("clamp")) {
    try {
      c.clamp = clamp_mode_from_string(get_string(doc, "clamp"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("clamp", e.what());
    }
    if (c.clamp == ClampMode::none) throw ConfigError("clamp", "an unclamped RVE has a singular operator");
  }
  if (has("amplitude")) c.amplitude = get_real(doc, "amplitude");
  if (has("frequency")) c.frequency = get_real(doc, "frequency");
  if (has("rate")) c.rate = get_real(doc, "rate");
  if (has("path_file")) c.path_file = get_string(doc, "path_file");
  if (has("window")) {
    const auto w = get_int_list(doc, "window");
    if (w.size() != 2 || w[0] > w[1]) throw ConfigError("window", "expected [lo, hi] with lo <= hi");
    c.window_lo = w[0];
    c.window_hi = w[1];
  }

  // Validation.
  if (c.L < 1) throw ConfigError("L", "must be >= 1");
  if (c.M < 1) throw ConfigError("M", "must be >= 1");
  if (c.N < 1) throw ConfigError("N", "must be >= 1");
  if (!(c.T > 0.0)) throw ConfigError("T", "must be > 0");
  if (c.threads < 1) throw ConfigError("threads", "must be >= 1");
  const bool study = c.experiment == Experiment::error_study || c.experiment == Experiment::variance_study;
  if (study) {
    if (c.L_list.empty()) throw ConfigError("L_list", "must not be empty");
    if (c.L_max == 0) c.L_max = *std::max_element(c.L_list.begin(), c.L_list.end());
    if (c.L_max < 1) throw ConfigError("L_max", "must be >= 1");
    for (int L : c.L_list)
      if (L < 2 || L > c.L_max) throw ConfigError("L_list", "entries must lie in [2, L_max]");
  }
  if (c.experiment == Experiment::custom_path && c.path_file.empty())
    throw ConfigError("path_file", "required for custom-path");
  try {
    c.law.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("a_lo/a_hi/h_lo/h_hi/sy_lo/sy_hi", e.what());
  }
  try {
    c.solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("tol_increment/tol_energy/max_outer/kink_epsilon", e.what());
  }
  return c;
}

/// Reads `path` (empty: no file) and applies `flags` on top.
inline RunConfig parse_config_file(const std::string& path, const std::map<std::string, std::string>& flags = {}) {
  nlohmann::json doc = nlohmann::json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("", "parse error in '" + path + "': " + e.what());
    }
  }
  return parse_config(std::move(doc), flags);
}

}  // namespace rveplast
