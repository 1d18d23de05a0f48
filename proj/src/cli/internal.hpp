#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "opmachine/machine.hpp"
#include "opmachine/numeric.hpp"
#include "opmachine/schedule.hpp"
#include "opmachine/sphere.hpp"

namespace opm::cli {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Reads keys from a JSON object, records the effective value of each in
/// `echo`, and rejects keys that were never read.
class ConfigReader {
 public:
  ConfigReader(const nlohmann::json& obj, std::string path);

  bool has(const std::string& key) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t lo, std::int64_t hi);
  double real(const std::string& key, double fallback);
  std::string text(const std::string& key, const std::string& fallback);
  Rational rational(const std::string& key, const std::string& fallback);
  /// Raw access; the value is echoed as given.
  const nlohmann::json* raw(const std::string& key);
  nlohmann::json raw_or(const std::string& key, nlohmann::json fallback);
  ConfigReader child(const std::string& key);
  void adopt(const std::string& key, ConfigReader& child);

  /// Throws on any key that was not consumed.
  void finish() const;

  nlohmann::ordered_json echo;

 private:
  const nlohmann::json& value(const std::string& key) const;
  std::string where(const std::string& key) const;

  nlohmann::json obj_;
  std::string path_;
  std::set<std::string> used_;
};

Rational json_rational(const nlohmann::json& v, const std::string& where);
std::vector<double> json_vector(const nlohmann::json& v, const std::string& where);
sphere::SymmetricSet parse_symmetric_set(const nlohmann::json& v, std::size_t d);
NormKind parse_norm_kind(const std::string& text, const std::string& where);

machine::MachineConfig read_machine_config(ConfigReader& reader);
std::vector<machine::SparseCopy> read_x(ConfigReader& reader, std::size_t copies);

/// RFC 4180 CSV with LF line endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& fields);
  const std::string& str() const { return out_; }
  std::size_t rows() const { return rows_; }

 private:
  void line(const std::vector<std::string>& fields);
  std::size_t width_;
  std::size_t rows_ = 0;
  std::string out_;
};

std::string fmt(double v);
std::string fmt(const Rational& q);
std::string fmt(const BigInt& z);
std::string utc_timestamp();

}  // namespace opm::cli
