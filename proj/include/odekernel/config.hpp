#ifndef ODEKERNEL_CONFIG_HPP
#define ODEKERNEL_CONFIG_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "odekernel/fit.hpp"
#include "odekernel/models.hpp"
#include "odekernel/simulate.hpp"

namespace odekernel {

/// Flat `key = value` file. `#` starts a comment; blank lines are ignored.
/// Lists are comma separated. Duplicate keys are an error.
class RunConfig {
 public:
  RunConfig() = default;
  static RunConfig parse(const std::string& text, const std::string& source = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }
  const std::string& source() const { return source_; }

  /// Throws ConfigError naming the first key outside `allowed`.
  void require_known(const std::set<std::string>& allowed, const std::string& command) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::optional<double> get_optional_double(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<int> get_ints(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;
  Eigen::VectorXd get_vector(const std::string& key) const;

 private:
  const std::string& raw(const std::string& key) const;

  std::map<std::string, std::string> values_;
  std::string source_;
};

/// Model selection keys shared by every command.
struct ModelChoice {
  std::string name = "exponential";
  ModelOptions options;
};

struct SimulateSettings {
  ModelChoice model;
  SimulationConfig simulation;
  /// File stem: <stem>.csv, <stem>.truth.csv, <stem>.params.csv.
  std::string output = "data";
  std::filesystem::path out_dir = ".";
};

struct FitSettings {
  ModelChoice model;
  std::filesystem::path data;
  FitConfig fit;
  std::filesystem::path out_dir = ".";
};

enum class BenchmarkMethod { kRkhs, kMle };

struct BenchmarkSettings {
  ModelChoice model;
  Eigen::VectorXd parameters;
  Eigen::VectorXd initial_state;
  double t_start = 0.0;
  double t_end = 1.0;
  std::vector<int> n_values = {10};
  std::vector<double> sigma_values = {0.0};
  int replicates = 1;
  int substeps = kDefaultSubsteps;
  std::uint64_t seed = 0;
  std::vector<BenchmarkMethod> methods = {BenchmarkMethod::kRkhs, BenchmarkMethod::kMle};
  /// RKHS configuration; the optimizer block is shared with the MLE fits.
  FitConfig fit;
  int threads = 1;
  /// Wall-clock timing goes to its own file; off by default so reruns are byte-identical.
  bool timing = false;
  std::filesystem::path out_dir = ".";
};

SimulateSettings simulate_settings(const RunConfig& config);
FitSettings fit_settings(const RunConfig& config, const std::string& command);
BenchmarkSettings benchmark_settings(const RunConfig& config);

/// Keys each command accepts.
std::set<std::string> allowed_keys(const std::string& command);

}  // namespace odekernel

#endif  // ODEKERNEL_CONFIG_HPP
