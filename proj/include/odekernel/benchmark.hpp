#ifndef ODEKERNEL_BENCHMARK_HPP
#define ODEKERNEL_BENCHMARK_HPP

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "odekernel/config.hpp"
#include "odekernel/models.hpp"

namespace odekernel {

std::string method_name(BenchmarkMethod method);

struct BenchmarkSetting {
  int n = 0;
  double sigma = 0.0;
};

/// One method on one replicate.
struct MethodOutcome {
  BenchmarkMethod method = BenchmarkMethod::kRkhs;
  bool ok = false;
  std::string failure;
  Eigen::VectorXd estimate;
  bool converged = false;
  double seconds = 0.0;
};

struct ReplicateResult {
  int setting = 0;
  int replicate = 0;
  std::vector<MethodOutcome> outcomes;
};

/// Per-parameter error statistics of one method at one setting.
struct MethodSummary {
  int setting = 0;
  BenchmarkMethod method = BenchmarkMethod::kRkhs;
  int completed = 0;
  int failed = 0;
  Eigen::VectorXd mse;
  Eigen::VectorXd mse_sd;
  Eigen::VectorXd mean_abs_error;
  Eigen::VectorXd mean_abs_error_sd;
  double median_seconds = 0.0;
};

struct BenchmarkReport {
  std::vector<std::string> parameter_names;
  Eigen::VectorXd truth;
  std::vector<BenchmarkSetting> settings;
  /// Completed replicates in (setting, replicate) order.
  std::vector<ReplicateResult> results;
  std::vector<MethodSummary> summaries;
  bool interrupted = false;
};

/// Seeds of replicate r at setting s: base = split(split(root, s), r);
/// noise uses split(base, 0), the RKHS starts split(base, 1), the MLE starts split(base, 2).
std::uint64_t replicate_seed(std::uint64_t root, int setting, int replicate, int stream);

/// Runs simulate -> {RKHS fit, MLE fit} for every (n, sigma, replicate).
/// `on_result` sees results strictly in order, as soon as the completed
/// prefix grows. When `stop` becomes true no new replicate starts; the
/// report then covers the completed prefix and is flagged interrupted.
BenchmarkReport run_benchmark(const BenchmarkSettings& settings,
                              const std::function<void(const ReplicateResult&)>& on_result = {},
                              const std::atomic<bool>* stop = nullptr);

std::vector<MethodSummary> summarize(const BenchmarkSettings& settings, const Eigen::VectorXd& truth,
                                     const std::vector<ReplicateResult>& results);

std::string replicates_csv_header(const std::vector<std::string>& parameter_names);
std::string replicates_csv_rows(const BenchmarkSettings& settings, const ReplicateResult& result);
std::string summary_csv(const BenchmarkReport& report);
std::string timing_csv(const BenchmarkReport& report);
std::string benchmark_text(const BenchmarkReport& report);

}  // namespace odekernel

#endif  // ODEKERNEL_BENCHMARK_HPP
