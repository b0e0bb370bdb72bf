#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "minorlab/models.hpp"
#include "minorlab/rational.hpp"

namespace minorlab {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class KeyType { String, Bool, UInt, Real, RealList, UIntList, Rational, RationalList };

const char* key_type_name(KeyType t);

struct KeySpec {
  std::string section;  // "experiment" or "run"
  std::string key;
  KeyType type = KeyType::String;
  std::optional<std::string> fallback;  // absent means required (or optional when `optional`)
  bool optional = false;
  std::vector<std::string> tasks;  // empty means every task
  std::optional<double> lo, hi;    // per element
  bool lo_open = false, hi_open = false;
  std::vector<std::string> choices;
  std::string doc;
};

const std::vector<std::string>& task_names();
const std::vector<KeySpec>& config_schema();
// Tasks that need a [model] section.
bool task_needs_model(const std::string& task);

struct ExperimentConfig {
  std::string task;
  std::filesystem::path output;
  std::string family;  // empty when no [model] section
  ModelParams model_params;
  std::map<std::string, std::string> run;  // raw values after defaults

  bool has(const std::string& key) const { return run.count(key) != 0; }
  std::string str(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::uint64_t uint(const std::string& key) const;
  double real(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::uint64_t> uints(const std::string& key) const;
  Rational rational(const std::string& key) const;
  std::vector<Rational> rationals(const std::string& key) const;

  ModelSpec model() const;
};

// INI-style text: [section] headers, key = value lines, '#' comments. Unknown
// sections or keys, duplicates and out-of-range values raise ConfigError with
// the offending line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// The schema as JSON text.
std::string schema_json();

}  // namespace minorlab
