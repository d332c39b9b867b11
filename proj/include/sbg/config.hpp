#pragma once

// Run settings from a flat key=value file (or a JSON object with the same
// keys) and from command-line overrides. Keys:
//
//   n, rf_chains, m, l, k, t           sizes (t sets l = t / 2m)
//   modulation = linear | cosine       omega (cosine only, 0 = pi/2N)
//   permutation = auto | identity | designed, swap_budget
//   mode = noiseless | robust, snr_db, trials, seed
//   noise_convention = total-power | per-quadrature
//   calibration = standard | per-quadrature, false_alarm (probability)
//   on_grid, cfo, normalize_rows, fixed_ensemble   booleans
//   axis = t | n | m | snr, values = comma list
//   threads, out, timing
//
// Lines starting with '#' are comments.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sbg/errors.hpp"
#include "sbg/harness.hpp"

namespace sbg {

struct RunSettings {
  ExperimentConfig experiment;
  std::optional<SweepAxis> axis;
  std::vector<double> axis_values;
  std::size_t threads = 1;
  std::string out;
  bool timing = true;
  std::optional<std::size_t> t;  // applied after m is known
};

namespace detail {

inline std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto s = trim(text);
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) throw ConfigError("invalid value '" + s + "' for " + key);
  return v;
}

inline std::size_t parse_count(const std::string& key, const std::string& text) {
  if (trim(text).starts_with('-')) throw ConfigError(key + " must be nonnegative");
  return parse_number<std::size_t>(key, text);
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  const auto s = lower(trim(text));
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigError("invalid boolean '" + text + "' for " + key);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number<double>(key, item));
  }
  return out;
}

}  // namespace detail

inline SweepAxis parse_axis(const std::string& text) {
  const auto s = detail::lower(detail::trim(text));
  if (s == "t") return SweepAxis::t;
  if (s == "n") return SweepAxis::n;
  if (s == "m") return SweepAxis::m;
  if (s == "snr") return SweepAxis::snr;
  throw ConfigError("unknown sweep axis '" + text + "' (expected t, n, m or snr)");
}

inline Mode parse_mode(const std::string& text) {
  const auto s = detail::lower(detail::trim(text));
  if (s == "noiseless") return Mode::noiseless;
  if (s == "robust") return Mode::robust;
  throw ConfigError("unknown mode '" + text + "' (expected noiseless or robust)");
}

/// Applies one key=value setting; unknown keys and bad values raise ConfigError.
inline void apply_setting(RunSettings& s, const std::string& raw_key, const std::string& value) {
  const auto key = detail::lower(detail::trim(raw_key));
  const auto v = detail::trim(value);
  auto& e = s.experiment;
  using detail::parse_bool;
  using detail::parse_count;

  if (key == "n") e.n = parse_count(key, v);
  else if (key == "rf_chains" || key == "r") e.rf_chains = parse_count(key, v);
  else if (key == "m") e.m = parse_count(key, v);
  else if (key == "l") e.l = parse_count(key, v);
  else if (key == "k") e.k = parse_count(key, v);
  else if (key == "t") s.t = parse_count(key, v);
  else if (key == "modulation") {
    const auto m = detail::lower(v);
    if (m == "linear") e.modulation = ModulationKind::linear;
    else if (m == "cosine") e.modulation = ModulationKind::cosine;
    else throw ConfigError("unknown modulation '" + v + "'");
  } else if (key == "omega") e.omega = detail::parse_number<double>(key, v);
  else if (key == "permutation") {
    const auto p = detail::lower(v);
    if (p == "auto") e.permutation = PermutationMode::automatic;
    else if (p == "identity") e.permutation = PermutationMode::identity;
    else if (p == "designed") e.permutation = PermutationMode::designed;
    else throw ConfigError("unknown permutation mode '" + v + "'");
  } else if (key == "swap_budget") e.swap_budget = parse_count(key, v);
  else if (key == "mode") e.mode = parse_mode(v);
  else if (key == "snr_db" || key == "snr") e.snr_db = detail::parse_number<double>(key, v);
  else if (key == "trials") e.trials = parse_count(key, v);
  else if (key == "seed") e.seed = detail::parse_number<std::uint64_t>(key, v);
  else if (key == "noise_convention") {
    const auto c = detail::lower(v);
    if (c == "total-power" || c == "total_power") e.noise_convention = NoiseConvention::total_power;
    else if (c == "per-quadrature" || c == "per_quadrature") e.noise_convention = NoiseConvention::per_quadrature;
    else throw ConfigError("unknown noise convention '" + v + "'");
  } else if (key == "calibration") {
    const auto c = detail::lower(v);
    if (c == "standard") e.calibration = Calibration::standard;
    else if (c == "per-quadrature" || c == "per_quadrature") e.calibration = Calibration::per_quadrature;
    else if (c == "auto") e.calibration.reset();
    else throw ConfigError("unknown calibration '" + v + "'");
  } else if (key == "false_alarm") {
    const double p = detail::parse_number<double>(key, v);
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("false_alarm must lie in (0, 1)");
    e.neg_log_false_alarm = -std::log(p);
  } else if (key == "on_grid") e.on_grid = parse_bool(key, v);
  else if (key == "cfo") e.cfo = parse_bool(key, v);
  else if (key == "normalize_rows") e.normalize_rows = parse_bool(key, v);
  else if (key == "fixed_ensemble") e.fixed_ensemble = parse_bool(key, v);
  else if (key == "axis") s.axis = parse_axis(v);
  else if (key == "values") s.axis_values = detail::parse_list(key, v);
  else if (key == "threads") s.threads = std::max<std::size_t>(1, parse_count(key, v));
  else if (key == "out") s.out = v;
  else if (key == "timing") s.timing = parse_bool(key, v);
  else throw ConfigError("unknown setting '" + raw_key + "'");
}

/// Resolves derived settings (t -> l) and validates the experiment.
inline void finish_settings(RunSettings& s) {
  if (s.t) {
    const auto two_m = 2 * s.experiment.m;
    if (two_m == 0 || *s.t % two_m != 0) {
      throw ConfigError("t = " + std::to_string(*s.t) + " is not a multiple of 2m");
    }
    s.experiment.l = *s.t / two_m;
  }
  s.experiment.validate();
}

inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto t = detail::trim(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    out[detail::trim(t.substr(0, eq))] = detail::trim(t.substr(eq + 1));
  }
  return out;
}

inline std::map<std::string, std::string> parse_json_settings(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("JSON config must be an object");
  std::map<std::string, std::string> out;
  for (const auto& [key, val] : j.items()) {
    if (val.is_string()) {
      out[key] = val.get<std::string>();
    } else if (val.is_array()) {
      std::string joined;
      for (const auto& x : val) {
        if (!joined.empty()) joined += ',';
        joined += x.is_string() ? x.get<std::string>() : x.dump();
      }
      out[key] = joined;
    } else if (val.is_primitive()) {
      out[key] = val.dump();
    } else {
      throw ConfigError("config value for '" + key + "' must be a scalar or a list");
    }
  }
  return out;
}

/// Reads a config file; a leading '{' selects JSON.
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << is.rdbuf();
  const auto text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_json_settings(text);
  return parse_key_values(text);
}

}  // namespace sbg
