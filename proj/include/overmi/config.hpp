#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "overmi/datagen.hpp"
#include "overmi/errors.hpp"
#include "overmi/estimators.hpp"

namespace overmi {

/// One Monte Carlo study: superpopulation model, response mechanism, and the
/// study dimensions.
struct ScenarioConfig {
  PopulationModel model;
  MissingnessMechanism mechanism = Mcar{1.0};
  Eigen::Index n = 0;
  int imputations = 0;
  long replicates = 0;
  std::vector<Estimand> estimands;
  std::vector<double> levels = {0.90, 0.95};
  std::uint64_t seed = 1;

  void validate() const {
    model.validate();
    overmi::validate(mechanism);
    if (n < 4) throw ConfigError("study.n", "must be >= 4");
    if (imputations < 2) throw ConfigError("study.imputations", "must be >= 2");
    if (replicates < 2) throw ConfigError("study.replicates", "must be >= 2");
    for (double level : levels) {
      if (!(level > 0.0 && level < 1.0)) {
        throw ConfigError("study.levels", "levels must lie in (0,1)");
      }
    }
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline double parse_double(std::string_view value, const std::string& key) {
  value = trim(value);
  double out = 0.0;
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) {
    throw ConfigError(key, "expected a number, got '" + std::string(value) + "'");
  }
  return out;
}

inline long long parse_int(std::string_view value, const std::string& key) {
  value = trim(value);
  long long out = 0;
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) {
    throw ConfigError(key, "expected an integer, got '" + std::string(value) + "'");
  }
  return out;
}

inline bool parse_bool(std::string_view value, const std::string& key) {
  value = trim(value);
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + std::string(value) + "'");
}

inline std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t depth = 0;
  std::string current;
  for (char c : value) {
    if (c == '(') ++depth;
    if (c == ')' && depth > 0) --depth;
    if (c == ',' && depth == 0) {
      out.emplace_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  const auto tail = std::string(trim(current));
  if (!tail.empty() || !out.empty()) out.push_back(tail);
  return out;
}

/// Parses "name(a)" or "name(a, b)" argument forms.
inline std::vector<double> parse_call_args(std::string_view value,
                                           std::string_view name,
                                           const std::string& key) {
  const auto open = value.find('(');
  const auto close = value.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos ||
      close < open || trim(value.substr(close + 1)) != "") {
    throw ConfigError(key, "malformed arguments for '" + std::string(name) + "'");
  }
  std::vector<double> args;
  for (const auto& piece : split_list(value.substr(open + 1, close - open - 1))) {
    args.push_back(parse_double(piece, key));
  }
  return args;
}

inline CovariateDist parse_covariate(std::string_view value,
                                     const std::string& key) {
  value = trim(value);
  if (value.starts_with("exponential")) {
    const auto args = parse_call_args(value, "exponential", key);
    if (args.size() != 1) throw ConfigError(key, "exponential takes one rate");
    return Exponential{args[0]};
  }
  if (value.starts_with("normal")) {
    const auto args = parse_call_args(value, "normal", key);
    if (args.size() != 2) {
      throw ConfigError(key, "normal takes mean and variance");
    }
    return Normal{args[0], args[1]};
  }
  throw ConfigError(key, "unknown covariate distribution '" +
                             std::string(value) + "'");
}

}  // namespace detail

inline Estimand parse_estimand(std::string_view value, const std::string& key) {
  value = detail::trim(value);
  if (value == "mean") return Estimand::mean();
  if (value.starts_with("prop_lt")) {
    const auto args = detail::parse_call_args(value, "prop_lt", key);
    if (args.size() != 1) throw ConfigError(key, "prop_lt takes one threshold");
    return Estimand::proportion_below(args[0]);
  }
  throw ConfigError(key, "unknown estimand '" + std::string(value) + "'");
}

/// Parses the flat sectioned key = value scenario format:
///   [model] intercept, beta, covariate, error_variance
///   [mechanism] kind (+ response_rate | phi0, phi1)
///   [study] n, imputations, replicates, estimands, levels, seed
inline ScenarioConfig parse_scenario_config(const std::string& text) {
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto sv = detail::trim(line);
    if (sv.empty()) continue;
    if (sv.front() == '[') {
      if (sv.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno),
                          "unterminated section header");
      }
      section = std::string(detail::trim(sv.substr(1, sv.size() - 2)));
      sections.try_emplace(section);
      continue;
    }
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(lineno),
                        "expected key = value");
    }
    const auto k = std::string(detail::trim(sv.substr(0, eq)));
    if (section.empty()) {
      throw ConfigError(k, "key appears before any [section]");
    }
    if (!sections[section].emplace(k, std::string(detail::trim(sv.substr(eq + 1)))).second) {
      throw ConfigError(section + "." + k, "duplicate key");
    }
  }

  for (const auto& [name, _] : sections) {
    if (name != "model" && name != "mechanism" && name != "study") {
      throw ConfigError(name, "unknown section");
    }
  }
  for (const char* required : {"model", "mechanism", "study"}) {
    if (!sections.count(required)) {
      throw ConfigError(required, "missing required section");
    }
  }

  // Pull a key, tracking consumption so leftovers can be reported.
  auto take = [&sections](const std::string& sec, const std::string& key,
                          bool required) -> std::optional<std::string> {
    auto& entries = sections[sec];
    auto it = entries.find(key);
    if (it == entries.end()) {
      if (required) throw ConfigError(sec + "." + key, "missing required key");
      return std::nullopt;
    }
    std::string value = it->second;
    entries.erase(it);
    return value;
  };

  ScenarioConfig config;

  config.model.intercept =
      detail::parse_bool(*take("model", "intercept", true), "model.intercept");
  {
    const auto beta_raw = *take("model", "beta", true);
    const auto parts = detail::split_list(beta_raw);
    config.model.beta.resize(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) {
      config.model.beta[static_cast<Eigen::Index>(i)] =
          detail::parse_double(parts[i], "model.beta");
    }
  }
  config.model.covariate = detail::parse_covariate(
      *take("model", "covariate", true), "model.covariate");
  config.model.error_variance = detail::parse_double(
      *take("model", "error_variance", true), "model.error_variance");

  const auto kind = *take("mechanism", "kind", true);
  if (detail::trim(kind) == "mcar") {
    config.mechanism = Mcar{detail::parse_double(
        *take("mechanism", "response_rate", true), "mechanism.response_rate")};
  } else if (detail::trim(kind) == "mar") {
    config.mechanism = MarLogistic{
        detail::parse_double(*take("mechanism", "phi0", true), "mechanism.phi0"),
        detail::parse_double(*take("mechanism", "phi1", true), "mechanism.phi1")};
  } else {
    throw ConfigError("mechanism.kind", "must be mcar or mar");
  }

  config.n = static_cast<Eigen::Index>(
      detail::parse_int(*take("study", "n", true), "study.n"));
  config.imputations = static_cast<int>(detail::parse_int(
      *take("study", "imputations", true), "study.imputations"));
  config.replicates = static_cast<long>(detail::parse_int(
      *take("study", "replicates", true), "study.replicates"));
  {
    const auto estimands_raw = *take("study", "estimands", true);
    config.estimands.clear();
    for (const auto& piece : detail::split_list(estimands_raw)) {
      if (piece.empty()) continue;
      config.estimands.push_back(parse_estimand(piece, "study.estimands"));
    }
  }
  if (auto levels_raw = take("study", "levels", false)) {
    config.levels.clear();
    for (const auto& piece : detail::split_list(*levels_raw)) {
      config.levels.push_back(detail::parse_double(piece, "study.levels"));
    }
  }
  if (auto seed_raw = take("study", "seed", false)) {
    config.seed = static_cast<std::uint64_t>(
        detail::parse_int(*seed_raw, "study.seed"));
  }

  for (const auto& [name, entries] : sections) {
    if (!entries.empty()) {
      throw ConfigError(name + "." + entries.begin()->first, "unknown key");
    }
  }

  config.validate();
  return config;
}

inline ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_config(buf.str());
}

}  // namespace overmi
