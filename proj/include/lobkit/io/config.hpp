#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "lobkit/core/error.hpp"
#include "lobkit/io/csv.hpp"

namespace lobkit::io {

/// Every problem found in a configuration, in input order.
class ConfigError : public InvalidArgument {
public:
  explicit ConfigError(std::vector<std::string> problems)
      : InvalidArgument(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
  static std::string join(const std::vector<std::string>& p) {
    std::string s = std::to_string(p.size()) + " configuration error(s)";
    for (const auto& e : p) s += "\n  " + e;
    return s;
  }
  std::vector<std::string> problems_;
};

enum class ValueType { Real, Integer, RealList, Text };

/// One admissible key: its type, default (nullopt means required), lower
/// bound for numbers and admissible words for text.
struct KeySpec {
  KeySpec(std::string key, ValueType kind, std::optional<std::string> default_value,
          std::optional<double> lower = std::nullopt, std::vector<std::string> words = {})
      : name(std::move(key)), type(kind), fallback(std::move(default_value)), minimum(lower), choices(std::move(words)) {}

  std::string name;
  ValueType type;
  std::optional<std::string> fallback;
  std::optional<double> minimum;
  std::vector<std::string> choices;
};

using SectionSpec = std::vector<KeySpec>;
using Schema = std::map<std::string, SectionSpec>;

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"simulate-flow", "simulate-book", "stats",     "calibrate",
                                              "impact",        "llob",          "metaorder", "coimpact"};
  return kinds;
}

/// Admissible sections and keys for an experiment kind. [experiment] is common.
inline Schema schema_for(std::string_view kind) {
  using VT = ValueType;
  const SectionSpec splitting{{"agents", VT::Integer, "10", 1},
                              {"alpha", VT::Real, "1.5", 1.0},
                              {"herding", VT::Real, "0", 0.0},
                              {"count", VT::Integer, "100000", 1}};
  Schema s;
  if (kind == "simulate-flow") {
    s["generator"] = splitting;
  } else if (kind == "simulate-book") {
    s["model"] = {{"levels", VT::Integer, "200", 2},   {"tick", VT::Real, "0.01", 0.0},
                  {"best_bid", VT::Integer, "99", 1},  {"spread", VT::Integer, "2", 1},
                  {"per_side", VT::Integer, "10", 1},  {"depth", VT::Integer, "20", 0}};
    s["generator"] = {{"limit", VT::RealList, "1,0.8,0.6,0.4,0.2", 0.0},
                      {"cancel", VT::RealList, "0.05", 0.0},
                      {"market_buy", VT::Real, "0.5", 0.0},
                      {"market_sell", VT::Real, "0.5", 0.0},
                      {"horizon", VT::Real, "1000", 0.0}};
  } else if (kind == "stats") {
    s["generator"] = splitting;
    s["fit"] = {{"max_lag", VT::Integer, "1000", 1},
                {"lag_min", VT::Real, "10", 1.0},
                {"lag_max", VT::Real, "1000", 1.0}};
  } else if (kind == "calibrate" || kind == "impact") {
    s["generator"] = splitting;
    s["model"] = {{"g0", VT::Real, "0.01", 0.0},
                  {"gamma", VT::Real, "0.5", 0.0},
                  {"l0", VT::Real, "1", 0.0},
                  {"noise", VT::Real, "0", 0.0}};
    s["fit"] = {{"max_lag", VT::Integer, "100", 1}};
  } else if (kind == "llob") {
    s["model"] = {{"diffusivity", VT::Real, "1", 0.0},
                  {"cancellation", VT::Real, "0.0001", 0.0},
                  {"deposition", VT::Real, "0.01", 0.0}};
    s["generator"] = {{"duration", VT::Real, "1", 0.0},
                      {"eta_min", VT::Real, "0.0001", 0.0},
                      {"eta_max", VT::Real, "10000", 0.0},
                      {"points", VT::Integer, "17", 2},
                      {"nodes", VT::Integer, "128", 8}};
  } else if (kind == "metaorder") {
    s["model"] = {{"g0", VT::Real, "0.005", 0.0},      {"gamma", VT::Real, "0.5", 0.0},
                  {"delta", VT::Real, "0.5", 0.0},     {"volatility", VT::Real, "0.01", 0.0},
                  {"daily_volume", VT::Real, "1000000", 0.0}};
    s["generator"] = {{"count", VT::Integer, "10000", 1},
                      {"phi_min", VT::Real, "0.0001", 0.0},
                      {"phi_max", VT::Real, "0.1", 0.0},
                      {"eta_min", VT::Real, "0.01", 0.0},
                      {"eta_max", VT::Real, "0.3", 0.0},
                      {"shape", VT::Text, "constant", std::nullopt, {"constant", "front-loaded"}},
                      {"decay", VT::Real, "2", 0.0},
                      {"children", VT::Integer, "20", 1},
                      {"post_horizon", VT::Real, "2", 0.0}};
    s["fit"] = {{"phi_bins", VT::Integer, "8", 1}, {"duration_bins", VT::Integer, "4", 1},
                {"eta_bins", VT::Integer, "4", 1}};
  } else if (kind == "coimpact") {
    s["model"] = {{"rho", VT::Real, "0.2", 0.0},          {"prefactor", VT::Real, "1", 0.0},
                  {"exponent", VT::Real, "0.5", 0.0},     {"size_tail", VT::Real, "1.5", 0.0},
                  {"size_lower", VT::Real, "0.0001", 0.0}, {"size_upper", VT::Real, "0.1", 0.0},
                  {"noise", VT::Real, "0", 0.0}};
    s["generator"] = {{"days", VT::Integer, "10000", 1}, {"mean_count", VT::Real, "5", 1.0}};
    s["fit"] = {{"bins", VT::Integer, "12", 2}};
  }
  return s;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

}  // namespace detail

/// A validated experiment description. Every admissible key is present
/// (defaults filled), so equal configs compare equal whatever the input order.
struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 1;
  std::int64_t replicas = 1;
  std::string output = "out";
  std::map<std::string, std::map<std::string, std::string>> sections;

  const std::string& text(const std::string& section, const std::string& key) const {
    const auto s = sections.find(section);
    if (s == sections.end()) throw InvalidArgument("config has no section [" + section + "]");
    const auto k = s->second.find(key);
    if (k == s->second.end()) throw InvalidArgument("config has no key " + section + "." + key);
    return k->second;
  }
  double real(const std::string& section, const std::string& key) const {
    return parse_double(text(section, key), section + "." + key);
  }
  std::int64_t integer(const std::string& section, const std::string& key) const {
    return parse_int(text(section, key), section + "." + key);
  }
  std::vector<double> reals(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    for (const auto& v : split(text(section, key), ',')) out.push_back(parse_double(detail::trim(v), section + "." + key));
    return out;
  }

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

/// Checks one value against its key spec; returns an error message or "".
inline std::string check_value(const KeySpec& k, const std::string& where, const std::string& v) {
  try {
    auto bound = [&](double x) {
      if (k.minimum && x < *k.minimum)
        throw InvalidArgument(where + " must be >= " + format_double(*k.minimum) + ", got " + v);
    };
    switch (k.type) {
      case ValueType::Real: bound(parse_double(v, where)); break;
      case ValueType::Integer: bound(static_cast<double>(parse_int(v, where))); break;
      case ValueType::RealList:
        if (trim(v).empty()) throw InvalidArgument(where + " needs at least one number");
        for (const auto& x : split(v, ',')) bound(parse_double(trim(x), where));
        break;
      case ValueType::Text:
        if (!k.choices.empty() && std::find(k.choices.begin(), k.choices.end(), v) == k.choices.end()) {
          std::string c;
          for (const auto& w : k.choices) c += (c.empty() ? "" : ", ") + w;
          throw InvalidArgument(where + " must be one of {" + c + "}, got '" + v + "'");
        }
        break;
    }
  } catch (const InvalidArgument& e) {
    return e.what();
  }
  return {};
}

}  // namespace detail

/// Parses sectioned `key = value` text. Lines starting with '#' or ';' are
/// comments. A non-empty `kind` supplies experiment.kind when the text omits it
/// and must agree with it otherwise. Collects every problem before throwing
/// ConfigError.
inline ExperimentConfig parse_config(std::string_view text, std::string_view kind = {}) {
  std::vector<std::string> problems;
  std::map<std::string, std::map<std::string, std::pair<std::string, int>>> raw;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const std::string line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string at = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        problems.push_back(at + "malformed section header '" + line + "'");
        continue;
      }
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      if (raw.count(section)) problems.push_back(at + "duplicate section [" + section + "]");
      raw[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back(at + "expected key = value, got '" + line + "'");
      continue;
    }
    if (section.empty()) {
      problems.push_back(at + "key outside any section");
      continue;
    }
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    auto& sec = raw[section];
    if (const auto it = sec.find(key); it != sec.end()) {
      problems.push_back(at + "duplicate key '" + section + "." + key + "' (first set on line " +
                         std::to_string(it->second.second) + ")");
      continue;
    }
    sec[key] = {value, line_no};
  }

  if (!kind.empty()) {
    auto& e = raw["experiment"];
    if (const auto k = e.find("kind"); k == e.end())
      e["kind"] = {std::string(kind), 0};
    else if (k->second.first != kind)
      problems.push_back("line " + std::to_string(k->second.second) + ": experiment.kind '" + k->second.first +
                         "' conflicts with requested kind '" + std::string(kind) + "'");
  }

  ExperimentConfig cfg;
  const KeySpec kind_spec{"kind", ValueType::Text, std::nullopt, std::nullopt, experiment_kinds()};
  const SectionSpec common{kind_spec,
                           {"seed", ValueType::Integer, "1", 0.0},
                           {"replicas", ValueType::Integer, "1", 1.0},
                           {"output", ValueType::Text, "out"}};
  Schema schema;
  if (!raw.count("experiment")) {
    problems.push_back("missing required section [experiment]");
  } else if (const auto k = raw["experiment"].find("kind"); k != raw["experiment"].end()) {
    cfg.kind = k->second.first;
    schema = schema_for(cfg.kind);
  }
  schema["experiment"] = common;
  const bool known_kind =
      std::find(experiment_kinds().begin(), experiment_kinds().end(), cfg.kind) != experiment_kinds().end();

  for (const auto& [name, keys] : raw) {
    const auto spec = schema.find(name);
    if (spec == schema.end()) {
      // With an unknown or missing kind the kind error already covers this.
      if (known_kind) problems.push_back("unknown section [" + name + "] for kind '" + cfg.kind + "'");
      continue;
    }
    for (const auto& [key, value] : keys) {
      const auto ks = std::find_if(spec->second.begin(), spec->second.end(), [&](const KeySpec& k) { return k.name == key; });
      if (ks == spec->second.end())
        problems.push_back("line " + std::to_string(value.second) + ": unknown key '" + name + "." + key + "'");
    }
  }
  for (const auto& [name, keys] : schema) {
    const auto given = raw.find(name);
    auto& out = cfg.sections[name];
    for (const auto& k : keys) {
      std::string value;
      int line = 0;
      if (given != raw.end() && given->second.count(k.name)) {
        std::tie(value, line) = given->second.at(k.name);
      } else if (k.fallback) {
        value = *k.fallback;
      } else {
        if (given != raw.end()) problems.push_back("missing required key " + name + "." + k.name);
        continue;
      }
      const std::string where = (line ? "line " + std::to_string(line) + ": " : std::string{}) + name + "." + k.name;
      if (const std::string err = detail::check_value(k, where, value); !err.empty()) problems.push_back(err);
      out[k.name] = value;
    }
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));

  auto& e = cfg.sections["experiment"];
  cfg.seed = static_cast<std::uint64_t>(parse_int(e["seed"]));
  cfg.replicas = parse_int(e["replicas"]);
  cfg.output = e["output"];
  cfg.sections.erase("experiment");
  return cfg;
}

/// Canonical text: sections and keys in sorted order, [experiment] first.
inline std::string serialize_config(const ExperimentConfig& c) {
  std::string s = "[experiment]\nkind = " + c.kind + "\noutput = " + c.output +
                  "\nreplicas = " + std::to_string(c.replicas) + "\nseed = " + std::to_string(c.seed) + "\n";
  for (const auto& [name, keys] : c.sections) {
    s += "\n[" + name + "]\n";
    for (const auto& [k, v] : keys) s += k + " = " + v + "\n";
  }
  return s;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hash of the canonical serialization: independent of key order, of whether
/// defaults were written out and of the output directory, which never
/// affects results.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
  ExperimentConfig located = c;
  located.output.clear();
  return fnv1a(serialize_config(located));
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

}  // namespace lobkit::io
