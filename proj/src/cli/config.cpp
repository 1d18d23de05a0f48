#include <chrono>
#include <cmath>
#include <ctime>

#include "internal.hpp"

namespace opm::cli {

using nlohmann::json;

ConfigReader::ConfigReader(const json& obj, std::string path) : obj_(obj.is_null() ? json::object() : obj),
                                                                    path_(std::move(path)) {
  if (!obj_.is_object()) throw ConfigError(path_ + ": expected a JSON object");
  echo = nlohmann::ordered_json::object();
}

std::string ConfigReader::where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

bool ConfigReader::has(const std::string& key) const { return obj_.contains(key); }

const json& ConfigReader::value(const std::string& key) const { return obj_.at(key); }

std::int64_t ConfigReader::integer(const std::string& key, std::int64_t fallback, std::int64_t lo, std::int64_t hi) {
  used_.insert(key);
  std::int64_t v = fallback;
  if (has(key)) {
    const json& j = value(key);
    if (!j.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    v = j.get<std::int64_t>();
  }
  if (v < lo || v > hi) {
    throw ConfigError(where(key) + ": " + std::to_string(v) + " outside " + std::to_string(lo) + ".." +
                      std::to_string(hi));
  }
  echo[key] = v;
  return v;
}

double ConfigReader::real(const std::string& key, double fallback) {
  used_.insert(key);
  double v = fallback;
  if (has(key)) {
    const json& j = value(key);
    if (!j.is_number()) throw ConfigError(where(key) + ": expected a number");
    v = j.get<double>();
  }
  if (!std::isfinite(v)) throw ConfigError(where(key) + ": must be finite");
  echo[key] = v;
  return v;
}

std::string ConfigReader::text(const std::string& key, const std::string& fallback) {
  used_.insert(key);
  std::string v = fallback;
  if (has(key)) {
    const json& j = value(key);
    if (!j.is_string()) throw ConfigError(where(key) + ": expected a string");
    v = j.get<std::string>();
  }
  echo[key] = v;
  return v;
}

Rational ConfigReader::rational(const std::string& key, const std::string& fallback) {
  used_.insert(key);
  const Rational v = has(key) ? json_rational(value(key), where(key)) : parse_rational(fallback);
  echo[key] = exact_string(v);
  return v;
}

const json* ConfigReader::raw(const std::string& key) {
  used_.insert(key);
  if (!has(key)) return nullptr;
  echo[key] = value(key);
  return &value(key);
}

json ConfigReader::raw_or(const std::string& key, json fallback) {
  used_.insert(key);
  json v = has(key) ? value(key) : std::move(fallback);
  echo[key] = v;
  return v;
}

ConfigReader ConfigReader::child(const std::string& key) {
  used_.insert(key);
  return ConfigReader(has(key) ? value(key) : json::object(), where(key));
}

void ConfigReader::adopt(const std::string& key, ConfigReader& child) {
  child.finish();
  echo[key] = child.echo;
}

void ConfigReader::finish() const {
  for (const auto& [key, v] : obj_.items()) {
    if (!used_.count(key)) throw ConfigError("unknown config key '" + where(key) + "'");
  }
}

Rational json_rational(const json& v, const std::string& where) {
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(BigInt(v.get<std::int64_t>()));
    if (v.is_number()) return exact_rational(v.get<double>());
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": expected a rational (string like \"-3/4\" or a number)");
}

std::vector<double> json_vector(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where + ": expected numbers");
    out.push_back(e.get<double>());
    if (!std::isfinite(out.back())) throw ConfigError(where + ": entries must be finite");
  }
  return out;
}

NormKind parse_norm_kind(const std::string& text, const std::string& where) {
  try {
    return parse_norm(text);
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

sphere::SymmetricSet parse_symmetric_set(const json& v, std::size_t d) {
  if (!v.is_array() || v.empty()) throw ConfigError("E: expected a non-empty array of components");
  std::vector<sphere::AntipodalPair> pairs;
  std::vector<sphere::Cap> caps;
  for (std::size_t i = 0; i < v.size(); ++i) {
    ConfigReader c(v[i], "E[" + std::to_string(i) + "]");
    const std::string type = c.text("type", "");
    const json* center = c.raw("center");
    if (center == nullptr) throw ConfigError("E[" + std::to_string(i) + "]: missing center");
    std::vector<double> coords = json_vector(*center, "E.center");
    if (coords.size() != d) throw ConfigError("E[" + std::to_string(i) + "]: center must have d coordinates");
    try {
      if (type == "pair") {
        c.finish();
        pairs.push_back({sphere::UnitVector(std::move(coords))});
      } else if (type == "cap") {
        const double r = c.real("radius", -1.0);
        c.finish();
        caps.push_back({sphere::UnitVector(std::move(coords)), r});
      } else {
        throw ConfigError("E[" + std::to_string(i) + "]: type must be \"pair\" or \"cap\"");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("E: ") + e.what());
    }
  }
  try {
    return sphere::SymmetricSet(std::move(pairs), std::move(caps));
  } catch (const Error& e) {
    throw ConfigError(std::string("E: ") + e.what());
  }
}

machine::MachineConfig read_machine_config(ConfigReader& reader) {
  const auto d = static_cast<std::size_t>(reader.integer("d", 2, 2, 8));
  const NormKind p = parse_norm_kind(reader.text("p", "2"), "p");
  json default_E = json::array();
  std::vector<double> e1(d, 0.0);
  e1[0] = 1.0;
  default_E.push_back({{"type", "pair"}, {"center", e1}});
  sphere::SymmetricSet E = parse_symmetric_set(reader.raw_or("E", default_E), d);

  machine::MachineConfig cfg{std::move(E)};
  cfg.d = d;
  cfg.p = p;
  cfg.K = static_cast<std::uint64_t>(reader.integer("K", 0, 0, 1 << 20));
  cfg.stages = static_cast<int>(reader.integer("N", 5, 1, 12));
  cfg.k_max = static_cast<std::uint64_t>(reader.integer("k_max", 6, 1, 16384));
  const std::string variant = reader.text("variant", "toy");
  const auto factor = static_cast<unsigned>(reader.integer("factor", 5, 1, 1 << 20));
  if (variant == "toy") {
    cfg.variant = schedule::Variant::toy(factor);
  } else if (variant == "paper") {
    cfg.variant = schedule::Variant::paper();
  } else {
    throw ConfigError("variant: expected \"toy\" or \"paper\"");
  }
  return cfg;
}

std::vector<machine::SparseCopy> read_x(ConfigReader& reader, std::size_t copies) {
  std::vector<machine::SparseCopy> x(copies);
  const json* raw = reader.raw("x");
  if (raw == nullptr) return x;
  if (!raw->is_array()) throw ConfigError("x: expected an array of {copy, slot, value}");
  for (std::size_t i = 0; i < raw->size(); ++i) {
    const std::string at = "x[" + std::to_string(i) + "]";
    ConfigReader e((*raw)[i], at);
    const auto copy = e.integer("copy", 1, 1, static_cast<std::int64_t>(copies));
    const auto slot = e.integer("slot", 1, 1, INT64_MAX / 4);
    const Rational v = e.rational("value", "0");
    e.finish();
    x[static_cast<std::size_t>(copy - 1)].emplace_back(slot, v);
  }
  return x;
}

std::string fmt(double v) { return decimal_string(v, 15); }
std::string fmt(const Rational& q) { return decimal_string(q, 15); }
std::string fmt(const BigInt& z) { return z.str(); }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace opm::cli
