#include "odekernel/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <optional>

#include "odekernel/dataset.hpp"
#include "odekernel/errors.hpp"
#include "odekernel/fit.hpp"
#include "odekernel/parallel.hpp"
#include "odekernel/random.hpp"
#include "odekernel/simulate.hpp"

namespace odekernel {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<BenchmarkSetting> expand_settings(const BenchmarkSettings& s) {
  std::vector<BenchmarkSetting> out;
  for (int n : s.n_values) {
    for (double sigma : s.sigma_values) out.push_back({n, sigma});
  }
  return out;
}

MethodOutcome run_rkhs(const ObservationSet& obs, const ModelSpec& model, const BenchmarkSettings& s,
                       double sigma, std::uint64_t seed) {
  MethodOutcome out;
  out.method = BenchmarkMethod::kRkhs;
  FitConfig config = s.fit;
  config.compute_covariance = false;
  config.optimizer.seed = seed;
  config.optimizer.threads = 1;
  if (config.sigma_policy == SigmaPolicy::kKnown && config.sigma2.size() == 0) {
    config.sigma2 = Eigen::VectorXd::Constant(1, sigma * sigma);
  }
  const auto start = Clock::now();
  try {
    const FitResult fit = fit_model(obs, model, config);
    out.estimate = fit.parameters;
    out.converged = fit.converged;
    out.ok = true;
  } catch (const Error& e) {
    out.failure = e.what();
  }
  out.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

MethodOutcome run_mle(const ObservationSet& obs, const ModelSpec& model, const BenchmarkSettings& s,
                      double sigma, std::uint64_t seed) {
  MethodOutcome out;
  out.method = BenchmarkMethod::kMle;
  OptimizerConfig config = s.fit.optimizer;
  config.seed = seed;
  config.threads = 1;
  // Noiseless data: any positive weight gives the same minimizer.
  const double s2 = sigma > 0.0 ? sigma * sigma : 1.0;
  const auto start = Clock::now();
  try {
    const MleResult fit =
        mle_fit(obs, model, Eigen::VectorXd::Constant(model.num_states, s2), config, s.substeps);
    out.estimate = fit.parameters;
    out.converged = fit.report.converged;
    out.ok = true;
  } catch (const Error& e) {
    out.failure = e.what();
  }
  out.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

ReplicateResult run_replicate(const BenchmarkSettings& s, const std::vector<BenchmarkSetting>& settings,
                              int setting, int replicate) {
  const BenchmarkSetting& cell = settings[static_cast<std::size_t>(setting)];
  const TimeGrid grid = TimeGrid::uniform(s.t_start, s.t_end, cell.n);
  const ModelSpec model = make_model(s.model.name, grid, s.model.options);

  SimulationConfig sim;
  sim.model = s.model.name;
  sim.parameters = s.parameters;
  sim.initial_state = s.initial_state;
  sim.t_start = s.t_start;
  sim.t_end = s.t_end;
  sim.n = cell.n;
  sim.sigma = cell.sigma;
  sim.substeps = s.substeps;
  const SimulatedData data = simulate(model, sim, replicate_seed(s.seed, setting, replicate, 0));

  ReplicateResult result;
  result.setting = setting;
  result.replicate = replicate;
  for (BenchmarkMethod method : s.methods) {
    if (method == BenchmarkMethod::kRkhs) {
      result.outcomes.push_back(run_rkhs(data.observations, model, s, cell.sigma,
                                         replicate_seed(s.seed, setting, replicate, 1)));
    } else {
      result.outcomes.push_back(run_mle(data.observations, model, s, cell.sigma,
                                        replicate_seed(s.seed, setting, replicate, 2)));
    }
  }
  return result;
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::string short_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::string method_name(BenchmarkMethod method) {
  return method == BenchmarkMethod::kRkhs ? "rkhs" : "mle";
}

std::uint64_t replicate_seed(std::uint64_t root, int setting, int replicate, int stream) {
  const std::uint64_t base = split_seed(split_seed(root, static_cast<std::uint64_t>(setting)),
                                        static_cast<std::uint64_t>(replicate));
  return split_seed(base, static_cast<std::uint64_t>(stream));
}

BenchmarkReport run_benchmark(const BenchmarkSettings& s,
                              const std::function<void(const ReplicateResult&)>& on_result,
                              const std::atomic<bool>* stop) {
  BenchmarkReport report;
  report.settings = expand_settings(s);
  report.truth = s.parameters;
  {
    const ModelSpec reference =
        make_model(s.model.name, TimeGrid::uniform(s.t_start, s.t_end, s.n_values.front()), s.model.options);
    if (s.parameters.size() != reference.num_parameters()) {
      throw ConfigError("model '" + reference.name + "' needs " +
                        std::to_string(reference.num_parameters()) + " parameters, got " +
                        std::to_string(s.parameters.size()));
    }
    if (s.initial_state.size() != reference.num_states) {
      throw ConfigError("model '" + reference.name + "' needs " + std::to_string(reference.num_states) +
                        " initial states, got " + std::to_string(s.initial_state.size()));
    }
    report.parameter_names = reference.parameter_names;
  }

  const int per_setting = s.replicates;
  const int total = static_cast<int>(report.settings.size()) * per_setting;
  std::vector<std::optional<ReplicateResult>> slots(static_cast<std::size_t>(total));
  std::size_t flushed = 0;
  std::mutex mutex;

  parallel_for(total, resolve_threads(s.threads), [&](int index) {
    if (stop && stop->load()) return;
    ReplicateResult r = run_replicate(s, report.settings, index / per_setting, index % per_setting);
    std::lock_guard lock(mutex);
    slots[static_cast<std::size_t>(index)] = std::move(r);
    while (flushed < slots.size() && slots[flushed]) {
      if (on_result) on_result(*slots[flushed]);
      ++flushed;
    }
  });

  for (std::size_t i = 0; i < flushed; ++i) report.results.push_back(std::move(*slots[i]));
  report.interrupted = flushed < slots.size();
  report.summaries = summarize(s, report.truth, report.results);
  return report;
}

std::vector<MethodSummary> summarize(const BenchmarkSettings& s, const Eigen::VectorXd& truth,
                                     const std::vector<ReplicateResult>& results) {
  const std::vector<BenchmarkSetting> settings = expand_settings(s);
  const Eigen::Index np = truth.size();
  std::vector<MethodSummary> out;
  for (std::size_t setting = 0; setting < settings.size(); ++setting) {
    for (std::size_t m = 0; m < s.methods.size(); ++m) {
      MethodSummary summary;
      summary.setting = static_cast<int>(setting);
      summary.method = s.methods[m];
      std::vector<std::vector<double>> sq(static_cast<std::size_t>(np));
      std::vector<std::vector<double>> ab(static_cast<std::size_t>(np));
      std::vector<double> seconds;
      for (const ReplicateResult& r : results) {
        if (r.setting != static_cast<int>(setting)) continue;
        const MethodOutcome& o = r.outcomes[m];
        seconds.push_back(o.seconds);
        if (!o.ok) {
          ++summary.failed;
          continue;
        }
        ++summary.completed;
        for (Eigen::Index k = 0; k < np; ++k) {
          const double e = o.estimate[k] - truth[k];
          sq[static_cast<std::size_t>(k)].push_back(e * e);
          ab[static_cast<std::size_t>(k)].push_back(std::abs(e));
        }
      }
      summary.mse = Eigen::VectorXd::Constant(np, std::numeric_limits<double>::quiet_NaN());
      summary.mse_sd = summary.mse;
      summary.mean_abs_error = summary.mse;
      summary.mean_abs_error_sd = summary.mse;
      if (summary.completed > 0) {
        for (Eigen::Index k = 0; k < np; ++k) {
          const auto& a = sq[static_cast<std::size_t>(k)];
          const auto& b = ab[static_cast<std::size_t>(k)];
          double sa = 0.0;
          double sb = 0.0;
          for (double x : a) sa += x;
          for (double x : b) sb += x;
          summary.mse[k] = sa / static_cast<double>(a.size());
          summary.mean_abs_error[k] = sb / static_cast<double>(b.size());
          summary.mse_sd[k] = sample_sd(a);
          summary.mean_abs_error_sd[k] = sample_sd(b);
        }
      }
      summary.median_seconds = median(seconds);
      out.push_back(std::move(summary));
    }
  }
  return out;
}

std::string replicates_csv_header(const std::vector<std::string>& parameter_names) {
  std::string out = "n,sigma,replicate,method,status,converged";
  for (const auto& name : parameter_names) out += "," + name;
  return out + '\n';
}

std::string replicates_csv_rows(const BenchmarkSettings& s, const ReplicateResult& result) {
  const std::vector<BenchmarkSetting> settings = expand_settings(s);
  const BenchmarkSetting& cell = settings[static_cast<std::size_t>(result.setting)];
  std::string out;
  for (const MethodOutcome& o : result.outcomes) {
    out += std::to_string(cell.n) + "," + format_real(cell.sigma) + "," +
           std::to_string(result.replicate + 1) + "," + method_name(o.method) + "," +
           (o.ok ? "ok" : "failed") + "," + (o.converged ? "1" : "0");
    for (Eigen::Index k = 0; k < s.parameters.size(); ++k) {
      out += "," + (o.ok ? format_real(o.estimate[k]) : std::string("nan"));
    }
    out += '\n';
  }
  return out;
}

std::string summary_csv(const BenchmarkReport& report) {
  std::string out = "method,n,sigma,completed,failed,statistic";
  for (const auto& name : report.parameter_names) out += "," + name;
  out += '\n';
  for (const MethodSummary& m : report.summaries) {
    const BenchmarkSetting& cell = report.settings[static_cast<std::size_t>(m.setting)];
    const std::string prefix = method_name(m.method) + "," + std::to_string(cell.n) + "," +
                               format_real(cell.sigma) + "," + std::to_string(m.completed) + "," +
                               std::to_string(m.failed) + ",";
    const std::pair<const char*, const Eigen::VectorXd*> rows[] = {
        {"mse", &m.mse}, {"mse_sd", &m.mse_sd}, {"mae", &m.mean_abs_error}, {"mae_sd", &m.mean_abs_error_sd}};
    for (const auto& [label, values] : rows) {
      out += prefix + label;
      for (Eigen::Index k = 0; k < values->size(); ++k) out += "," + format_real((*values)[k]);
      out += '\n';
    }
  }
  return out;
}

std::string timing_csv(const BenchmarkReport& report) {
  std::string out = "n,sigma,rkhs_median_seconds,mle_median_seconds,mle_over_rkhs\n";
  for (std::size_t setting = 0; setting < report.settings.size(); ++setting) {
    double rkhs = std::numeric_limits<double>::quiet_NaN();
    double mle = rkhs;
    for (const MethodSummary& m : report.summaries) {
      if (m.setting != static_cast<int>(setting)) continue;
      (m.method == BenchmarkMethod::kRkhs ? rkhs : mle) = m.median_seconds;
    }
    const BenchmarkSetting& cell = report.settings[setting];
    out += std::to_string(cell.n) + "," + format_real(cell.sigma) + "," + format_real(rkhs) + "," +
           format_real(mle) + "," + format_real(mle / rkhs) + '\n';
  }
  return out;
}

std::string benchmark_text(const BenchmarkReport& report) {
  std::string out = "Parameter recovery benchmark\n";
  out += "truth:";
  for (std::size_t k = 0; k < report.parameter_names.size(); ++k) {
    out += " " + report.parameter_names[k] + "=" + short_real(report.truth[static_cast<Eigen::Index>(k)]);
  }
  out += '\n';
  if (report.interrupted) out += "status: interrupted, statistics cover completed replicates only\n";
  for (std::size_t setting = 0; setting < report.settings.size(); ++setting) {
    const BenchmarkSetting& cell = report.settings[setting];
    out += "\nn = " + std::to_string(cell.n) + ", sigma = " + short_real(cell.sigma) + '\n';
    char line[64];
    std::snprintf(line, sizeof line, "%-6s %-8s", "method", "stat");
    out += line;
    for (const auto& name : report.parameter_names) {
      std::snprintf(line, sizeof line, " %12s", name.c_str());
      out += line;
    }
    out += "  completed  failed\n";
    for (const MethodSummary& m : report.summaries) {
      if (m.setting != static_cast<int>(setting)) continue;
      const std::pair<const char*, const Eigen::VectorXd*> rows[] = {{"mse", &m.mse}, {"sd", &m.mse_sd}};
      for (const auto& [label, values] : rows) {
        std::snprintf(line, sizeof line, "%-6s %-8s", method_name(m.method).c_str(), label);
        out += line;
        for (Eigen::Index k = 0; k < values->size(); ++k) {
          std::snprintf(line, sizeof line, " %12.4g", (*values)[k]);
          out += line;
        }
        std::snprintf(line, sizeof line, "  %9d  %6d\n", m.completed, m.failed);
        out += line;
      }
    }
  }
  return out;
}

}  // namespace odekernel
