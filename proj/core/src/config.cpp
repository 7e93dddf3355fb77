#include "coco/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "coco/errors.hpp"
#include "coco/hash.hpp"

namespace coco {

namespace {

constexpr unsigned bit(ExperimentKind kind) { return 1u << static_cast<unsigned>(kind); }

constexpr unsigned kAll = bit(ExperimentKind::DenoiseOnce) | bit(ExperimentKind::MseVsSigma) |
                          bit(ExperimentKind::MseElementwise) | bit(ExperimentKind::Tightness) |
                          bit(ExperimentKind::Optimize) | bit(ExperimentKind::WarmstartBench);
constexpr unsigned kDenoise = bit(ExperimentKind::DenoiseOnce);
constexpr unsigned kMseSigma = bit(ExperimentKind::MseVsSigma);
constexpr unsigned kMseElem = bit(ExperimentKind::MseElementwise);
constexpr unsigned kTight = bit(ExperimentKind::Tightness);
constexpr unsigned kOpt = bit(ExperimentKind::Optimize);
constexpr unsigned kWarm = bit(ExperimentKind::WarmstartBench);

enum class KeyType { U64, Int, Num, NumList, Bool, Str, StrList };

struct KeySpec {
  const char* key;
  unsigned kinds;
  KeyType type;
  const char* fallback;  ///< default value
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
  const char* allowed = nullptr;  ///< comma list for Str/StrList
};

const KeySpec kSchema[] = {
    {"seed", kAll, KeyType::U64, "1"},
    {"out", kAll, KeyType::Str, "out"},
    {"svg", kAll, KeyType::Bool, "false"},

    {"d", kDenoise | kMseSigma | kMseElem | kOpt | kWarm, KeyType::Int, "3", 1, 10000},
    {"k", kDenoise | kMseElem | kWarm, KeyType::Int, "8", 1, 4096},
    {"ks", kMseSigma | kOpt, KeyType::NumList, "1,2,4,8,10", 0, 4096},
    {"n", kMseSigma | kMseElem | kTight, KeyType::Int, "1000", 2, 100000000},
    {"l", kDenoise | kMseSigma | kMseElem, KeyType::Num, "5", 0, 1e12},
    {"sigma", kDenoise | kMseElem | kTight | kOpt | kWarm, KeyType::Num, "10", 0, 1e12},
    {"sigmas", kMseSigma, KeyType::NumList, "1,5,10,15,20", 0, 1e12},
    {"eig_min", kDenoise | kMseSigma | kMseElem | kOpt | kWarm, KeyType::Num,
     "0.3333333333333333", 0, 1e12},
    {"eig_max", kDenoise | kMseSigma | kMseElem | kOpt | kWarm, KeyType::Num, "1", 0, 1e12},
    {"delta_l", kDenoise, KeyType::Num, "0"},
    {"lipschitz_real", kTight, KeyType::Num, "1", 0, 1e12},
    {"dxs", kTight, KeyType::NumList, "0,1,2,5,10,20,50,100,200", 0, 1e12},
    {"dls", kTight, KeyType::NumList, "-0.5,0,1"},

    {"objective", kOpt, KeyType::Str, "quadratic", 0, 0, "quadratic,logistic"},
    {"algorithms", kOpt, KeyType::StrList, "sgd", 0, 0, "sgd,sgd_pr,adam,strsaga"},
    {"gamma", kOpt | kWarm, KeyType::Num, "0.1", 0, 1e12},
    {"schedule", kOpt, KeyType::Str, "fixed", 0, 0, "fixed,decreasing"},
    {"schedule_c", kOpt, KeyType::Num, "1", 0, 1e12},
    {"budget", kOpt | kWarm, KeyType::Int, "1000", 1, 100000000},
    {"runs", kOpt, KeyType::Int, "100", 1, 1000000},
    {"x0_norm", kOpt | kWarm, KeyType::Num, "10", 0, 1e12},
    {"dataset", kOpt, KeyType::Str, ""},
    {"lambda", kOpt, KeyType::Num, "0", 0, 1e12},
    {"record_every", kOpt, KeyType::Int, "1", 1, 100000000},
    {"burn_in", kWarm, KeyType::Int, "10", 0, 100000000},

    {"coco_max_iter", kDenoise | kMseSigma | kMseElem | kOpt | kWarm, KeyType::Int, "", 1,
     1000000000},
    {"coco_tol", kDenoise | kMseSigma | kMseElem | kOpt | kWarm, KeyType::Num, "", 0, 1e12},
    {"warm", kOpt | kWarm, KeyType::Bool, "true"},
};

// Oracle-grade solves for one-shot studies, plug-in defaults inside runs.
std::string default_for(const KeySpec& spec, ExperimentKind kind) {
  if (std::string(spec.key) == "ks" && kind == ExperimentKind::Optimize) return "1,2,4,8";
  if (std::string(spec.key) == "x0_norm" && kind == ExperimentKind::WarmstartBench) return "400";
  if (std::string(spec.key) == "sigma" && kind == ExperimentKind::WarmstartBench) return "5";
  if (std::string(spec.key) == "d" && kind != ExperimentKind::MseVsSigma &&
      kind != ExperimentKind::MseElementwise && kind != ExperimentKind::DenoiseOnce)
    return "10";
  if (std::string(spec.key) == "gamma" && kind == ExperimentKind::WarmstartBench) return "0.01";
  if (std::string(spec.key) == "budget" && kind == ExperimentKind::WarmstartBench) return "120";
  if (std::string(spec.key) == "n" && kind == ExperimentKind::Tightness) return "100000";
  if (std::string(spec.key) == "l" && kind == ExperimentKind::MseElementwise) return "10";
  if (std::string(spec.key) == "coco_max_iter")
    return (kind == ExperimentKind::DenoiseOnce || kind == ExperimentKind::WarmstartBench)
               ? "100000"
               : (kind == ExperimentKind::Optimize ? "500" : "5000");
  if (std::string(spec.key) == "coco_tol")
    return (kind == ExperimentKind::DenoiseOnce || kind == ExperimentKind::WarmstartBench)
               ? "1e-10"
               : "1e-8";
  return spec.fallback;
}

[[noreturn]] void fail(const std::string& key, const std::string& message) {
  throw ConfigError("config key '" + key + "': " + message);
}

double parse_num(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end) fail(key, "not a number: '" + text + "'");
  return value;
}

void check_range(const KeySpec& spec, const std::string& key, double value) {
  if (std::isnan(value) || value < spec.min || value > spec.max) {
    std::ostringstream msg;
    msg << "value " << value << " outside [" << spec.min << ", " << spec.max << "]";
    fail(key, msg.str());
  }
}

bool contains_token(const char* csv, const std::string& token) {
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ','))
    if (item == token) return true;
  return false;
}

std::string validate_value(const KeySpec& spec, const std::string& value) {
  const std::string key = spec.key;
  if (value.find_first_of(" \t\n=") != std::string::npos)
    fail(key, "value must not contain whitespace or '='");
  switch (spec.type) {
    case KeyType::U64: {
      std::uint64_t v = 0;
      const char* end = value.data() + value.size();
      const auto res = std::from_chars(value.data(), end, v);
      if (res.ec != std::errc() || res.ptr != end) fail(key, "not an unsigned integer");
      return value;
    }
    case KeyType::Int: {
      long long v = 0;
      const char* end = value.data() + value.size();
      const auto res = std::from_chars(value.data(), end, v);
      if (res.ec != std::errc() || res.ptr != end) fail(key, "not an integer");
      check_range(spec, key, static_cast<double>(v));
      return value;
    }
    case KeyType::Num:
      check_range(spec, key, parse_num(key, value));
      return value;
    case KeyType::NumList: {
      if (value.empty()) fail(key, "empty list");
      std::istringstream in(value);
      std::string item;
      while (std::getline(in, item, ',')) check_range(spec, key, parse_num(key, item));
      return value;
    }
    case KeyType::Bool:
      if (value == "true" || value == "1") return "true";
      if (value == "false" || value == "0") return "false";
      fail(key, "expected true/false");
    case KeyType::Str:
      if (spec.allowed != nullptr && !contains_token(spec.allowed, value))
        fail(key, "must be one of {" + std::string(spec.allowed) + "}");
      return value;
    case KeyType::StrList: {
      if (value.empty()) fail(key, "empty list");
      std::istringstream in(value);
      std::string item;
      while (std::getline(in, item, ','))
        if (spec.allowed != nullptr && !contains_token(spec.allowed, item))
          fail(key, "'" + item + "' must be one of {" + std::string(spec.allowed) + "}");
      return value;
    }
  }
  fail(key, "unhandled type");
}

const KeySpec* find_spec(const std::string& key) {
  for (const auto& spec : kSchema)
    if (key == spec.key) return &spec;
  return nullptr;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::DenoiseOnce: return "denoise-once";
    case ExperimentKind::MseVsSigma: return "mse-vs-sigma";
    case ExperimentKind::MseElementwise: return "mse-elementwise";
    case ExperimentKind::Tightness: return "tightness";
    case ExperimentKind::Optimize: return "optimize";
    case ExperimentKind::WarmstartBench: return "warmstart-bench";
  }
  throw ConfigError("unknown experiment kind");
}

ExperimentKind kind_from_string(const std::string& name) {
  for (const auto kind :
       {ExperimentKind::DenoiseOnce, ExperimentKind::MseVsSigma, ExperimentKind::MseElementwise,
        ExperimentKind::Tightness, ExperimentKind::Optimize, ExperimentKind::WarmstartBench})
    if (to_string(kind) == name) return kind;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

ExperimentConfig ExperimentConfig::make(ExperimentKind kind,
                                        const std::map<std::string, std::string>& raw) {
  ExperimentConfig cfg;
  cfg.kind_ = kind;
  for (const auto& [key, value] : raw) {
    const KeySpec* spec = find_spec(key);
    if (spec == nullptr || (spec->kinds & bit(kind)) == 0)
      throw ConfigError("unknown config key '" + key + "' for experiment '" + to_string(kind) +
                        "'");
    cfg.values_[key] = validate_value(*spec, value);
  }
  for (const auto& spec : kSchema)
    if ((spec.kinds & bit(kind)) != 0 && !cfg.values_.contains(spec.key))
      cfg.values_[spec.key] = validate_value(spec, default_for(spec, kind));

  if (kind == ExperimentKind::Optimize && cfg.str("objective") == "logistic") {
    if (cfg.str("dataset").empty()) fail("dataset", "required for the logistic objective");
    if (!raw.contains("lambda")) fail("lambda", "required for the logistic objective");
  }
  if (cfg.values_.contains("eig_min") && cfg.num("eig_min") > cfg.num("eig_max"))
    fail("eig_min", "must not exceed eig_max");
  return cfg;
}

std::uint64_t ExperimentConfig::seed() const {
  std::uint64_t v = 0;
  const std::string& text = str("seed");
  std::from_chars(text.data(), text.data() + text.size(), v);
  return v;
}

double ExperimentConfig::num(const std::string& key) const { return parse_num(key, str(key)); }

long long ExperimentConfig::integer(const std::string& key) const {
  return static_cast<long long>(num(key));
}

bool ExperimentConfig::flag(const std::string& key) const { return str(key) == "true"; }

const std::string& ExperimentConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config key '" + key + "' not set");
  return it->second;
}

std::vector<double> ExperimentConfig::num_list(const std::string& key) const {
  std::vector<double> out;
  std::istringstream in(str(key));
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_num(key, item));
  return out;
}

std::vector<std::string> ExperimentConfig::str_list(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream in(str(key));
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

std::string ExperimentConfig::canonical() const {
  std::string line = "kind=" + to_string(kind_);
  for (const auto& [key, value] : values_) line += " " + key + "=" + value;
  return line;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical()); }

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (values.contains(key))
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key +
                        "'");
    values[key] = value;
  }
  return values;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

void apply_override(std::map<std::string, std::string>& values, const std::string& token) {
  const auto eq = token.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + token + "' is not key=value");
  values[token.substr(0, eq)] = token.substr(eq + 1);
}

ExperimentConfig parse_canonical(const std::string& line) {
  std::istringstream in(line);
  std::string token;
  std::map<std::string, std::string> values;
  std::string kind_name;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ConfigError("bad canonical token '" + token + "'");
    const std::string key = token.substr(0, eq);
    if (key == "kind")
      kind_name = token.substr(eq + 1);
    else
      values[key] = token.substr(eq + 1);
  }
  if (kind_name.empty()) throw ConfigError("canonical config line lacks kind=");
  return ExperimentConfig::make(kind_from_string(kind_name), values);
}

}  // namespace coco
