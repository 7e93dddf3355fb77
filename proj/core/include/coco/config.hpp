#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace coco {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind {
  DenoiseOnce,
  MseVsSigma,
  MseElementwise,
  Tightness,
  Optimize,
  WarmstartBench,
};

std::string to_string(ExperimentKind kind);
ExperimentKind kind_from_string(const std::string& name);  ///< throws ConfigError

/// Validated experiment parameters. Keys are checked against a per-kind
/// schema (unknown keys rejected, ranges enforced) and defaults are filled
/// in, so two configs are equal iff every effective value matches.
class ExperimentConfig {
 public:
  /// Validates raw key/value pairs for `kind`; throws ConfigError with a
  /// field-level message on any problem.
  static ExperimentConfig make(ExperimentKind kind,
                               const std::map<std::string, std::string>& raw);

  ExperimentKind kind() const { return kind_; }
  std::uint64_t seed() const;
  std::string out_dir() const { return str("out"); }

  double num(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  const std::string& str(const std::string& key) const;
  std::vector<double> num_list(const std::string& key) const;
  std::vector<std::string> str_list(const std::string& key) const;

  /// "kind=<kind> key=value ..." with keys sorted; re-parses to an equal
  /// config via parse_canonical.
  std::string canonical() const;
  std::uint64_t hash() const;

  bool operator==(const ExperimentConfig& other) const {
    return kind_ == other.kind_ && values_ == other.values_;
  }

 private:
  ExperimentKind kind_ = ExperimentKind::DenoiseOnce;
  std::map<std::string, std::string> values_;
};

/// key = value lines; '#' lines are comments. Throws ConfigError naming the
/// offending line.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// Applies a "key=value" override token (flags win over file values).
void apply_override(std::map<std::string, std::string>& values, const std::string& token);

/// Inverse of ExperimentConfig::canonical().
ExperimentConfig parse_canonical(const std::string& line);

}  // namespace coco
