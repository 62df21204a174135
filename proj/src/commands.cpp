#include "odekernel/commands.hpp"

#include <cstdio>
#include <fstream>
#include <mutex>

#include "odekernel/benchmark.hpp"
#include "odekernel/dataset.hpp"
#include "odekernel/errors.hpp"
#include "odekernel/random.hpp"
#include "odekernel/simulate.hpp"

namespace odekernel {

namespace {

std::string report_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string kind_name(ParameterKind kind) {
  switch (kind) {
    case ParameterKind::kTheta:
      return "theta";
    case ParameterKind::kBeta:
      return "beta";
    case ParameterKind::kLatent:
      return "latent";
  }
  return "beta";
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::string stem_for(const std::string& stem, int replicate, int replicates) {
  if (replicates == 1) return stem;
  const int width = static_cast<int>(std::to_string(replicates).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%0*d", width, replicate + 1);
  return stem + buf;
}

std::string params_csv(const ModelSpec& model, const SimulationConfig& sim) {
  std::string out = "name,value\n";
  for (int k = 0; k < model.num_parameters(); ++k) {
    out += model.parameter_names[static_cast<std::size_t>(k)] + "," + format_real(sim.parameters[k]) + '\n';
  }
  for (Eigen::Index j = 0; j < sim.initial_state.size(); ++j) {
    out += "x0_state_" + std::to_string(j + 1) + "," + format_real(sim.initial_state[j]) + '\n';
  }
  out += "sigma," + format_real(sim.sigma) + '\n';
  out += "seed," + std::to_string(sim.seed) + '\n';
  return out;
}

struct LoadedFit {
  FitSettings settings;
  ObservationSet data;
  ModelSpec model;
};

LoadedFit load_fit(const RunConfig& config, const std::string& command) {
  FitSettings settings = fit_settings(config, command);
  ObservationSet data = read_dataset(settings.data);
  // tf-network takes its gene count from the data unless configured.
  if (!config.has("genes")) settings.model.options.genes = static_cast<int>(data.num_states());
  ModelSpec model = make_model(settings.model.name, data.grid, settings.model.options);
  ensure_writable_directory(settings.out_dir);
  return {std::move(settings), std::move(data), std::move(model)};
}

int write_fit_outputs(const LoadedFit& loaded, const FitResult& fit, const std::string& lambda_note,
                      std::ostream& log) {
  const auto& dir = loaded.settings.out_dir;
  write_text_file(dir / "report.txt", fit_report_text(fit, loaded.model.name, lambda_note));
  write_text_file(dir / "parameters.csv", parameters_csv(fit));
  write_text_file(dir / "equations.csv", equations_csv(fit, loaded.data.state_names));
  write_text_file(dir / "fitted_states.csv", format_dataset(loaded.data.grid, fit.states));
  if (fit.latent) write_text_file(dir / "latent.csv", latent_csv(fit, loaded.data.grid));
  log << "objective " << report_real(fit.objective) << ", aic " << report_real(fit.aic) << ", lambda "
      << report_real(fit.lambda) << (fit.converged ? ", converged\n" : ", NOT converged\n");
  return fit.converged ? kExitOk : kExitNotConverged;
}

}  // namespace

std::atomic<bool>& interrupt_requested() {
  static std::atomic<bool> flag{false};
  return flag;
}

std::string fit_report_text(const FitResult& fit, const std::string& model_name,
                            const std::string& lambda_note) {
  std::string out = "odekernel fit report\n";
  out += "model: " + model_name + '\n';
  out += "observations: " + std::to_string(fit.states.cols()) + " times, " +
         std::to_string(fit.states.rows()) + " states\n";
  out += "lambda: " + report_real(fit.lambda) + " (" + lambda_note + ")\n";
  out += "objective: " + report_real(fit.objective) + '\n';
  out += "aic: " + report_real(fit.aic) + '\n';
  out += "sum_df: " + report_real(fit.df.sum()) + '\n';
  out += std::string("converged: ") + (fit.converged ? "yes" : "no") + '\n';
  out += "gradient_norm: " + report_real(fit.gradient_norm) + '\n';
  out += "iterations: " + std::to_string(fit.iterations) + '\n';
  out += std::string("optimization: ") + (fit.separated ? "separated blocks" : "joint") + '\n';
  if (fit.wald) {
    out += "covariance: available\n";
  } else {
    out += "covariance: unavailable" + (fit.covariance_note.empty() ? "" : ": " + fit.covariance_note) + '\n';
  }

  const double level = fit.wald ? fit.wald->level : 0.95;
  out += "\nparameters (" + report_real(100.0 * level) + "% Wald intervals)\n";
  out += pad("name", 14) + pad("kind", 8) + pad("estimate", 18) + pad("stderr", 18) + pad("lower", 18) +
         "upper\n";
  for (Eigen::Index k = 0; k < fit.parameters.size(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    out += pad(fit.parameter_names[ks], 14) + pad(kind_name(fit.parameter_kinds[ks]), 8) +
           pad(report_real(fit.parameters[k]), 18);
    if (fit.wald && fit.wald->intervals[ks].available) {
      const WaldInterval& w = fit.wald->intervals[ks];
      out += pad(report_real(w.std_error), 18) + pad(report_real(w.lower), 18) + report_real(w.upper);
    } else {
      out += pad("n/a", 18) + pad("n/a", 18) + "n/a";
    }
    out += '\n';
  }

  out += "\nequations\n";
  out += pad("state", 10) + pad("sigma2", 18) + pad("df", 18) + "initial_condition\n";
  for (Eigen::Index j = 0; j < fit.states.rows(); ++j) {
    out += pad("state_" + std::to_string(j + 1), 10) + pad(report_real(fit.sigma2[j]), 18) +
           pad(report_real(fit.df[j]), 18) + report_real(fit.initial_condition[j]) + '\n';
  }
  return out;
}

std::string parameters_csv(const FitResult& fit) {
  std::string out = "name,kind,estimate,std_error,lower,upper,available\n";
  for (Eigen::Index k = 0; k < fit.parameters.size(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    out += fit.parameter_names[ks] + "," + kind_name(fit.parameter_kinds[ks]) + "," +
           format_real(fit.parameters[k]);
    if (fit.wald && fit.wald->intervals[ks].available) {
      const WaldInterval& w = fit.wald->intervals[ks];
      out += "," + format_real(w.std_error) + "," + format_real(w.lower) + "," + format_real(w.upper) + ",1\n";
    } else {
      out += ",nan,nan,nan,0\n";
    }
  }
  return out;
}

std::string equations_csv(const FitResult& fit, const std::vector<std::string>& state_names) {
  std::string out = "state,sigma2,df,initial_condition\n";
  for (Eigen::Index j = 0; j < fit.states.rows(); ++j) {
    out += state_names[static_cast<std::size_t>(j)] + "," + format_real(fit.sigma2[j]) + "," +
           format_real(fit.df[j]) + "," + format_real(fit.initial_condition[j]) + '\n';
  }
  return out;
}

std::string latent_csv(const FitResult& fit, const TimeGrid& grid) {
  std::string out = "time,eta,eta_raw\n";
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    out += format_real(grid[i]) + "," + format_real((*fit.latent)[i]) + "," + format_real((*fit.latent_raw)[i]) +
           '\n';
  }
  return out;
}

std::string lambda_path_csv(const LambdaSelection& selection) {
  std::string out = "lambda,objective,sum_df,aic,feasible,selected\n";
  for (std::size_t i = 0; i < selection.path.size(); ++i) {
    const LambdaPathEntry& e = selection.path[i];
    out += format_real(e.lambda) + "," + format_real(e.objective) + "," + format_real(e.sum_df) + "," +
           format_real(e.aic) + "," + (e.feasible ? "1" : "0") + "," + (i == selection.best ? "1" : "0") + '\n';
  }
  return out;
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
  SimulateSettings s = simulate_settings(config);
  ensure_writable_directory(s.out_dir);
  const TimeGrid grid = s.simulation.grid();
  const ModelSpec model = make_model(s.model.name, grid, s.model.options);
  const SimulationConfig& sim = s.simulation;
  for (int r = 0; r < sim.replicates; ++r) {
    const SimulatedData data = simulate(model, sim, split_seed(sim.seed, static_cast<std::uint64_t>(r)));
    const std::string stem = stem_for(s.output, r, sim.replicates);
    write_text_file(s.out_dir / (stem + ".csv"), format_dataset(grid, data.observations.states));
    write_text_file(s.out_dir / (stem + ".truth.csv"), format_dataset(grid, data.truth));
  }
  write_text_file(s.out_dir / (s.output + ".params.csv"), params_csv(model, sim));
  log << "wrote " << sim.replicates << " data set(s) of " << grid.size() << " times to "
      << s.out_dir.string() << '\n';
  return kExitOk;
}

int cmd_fit(const RunConfig& config, std::ostream& log) {
  const LoadedFit loaded = load_fit(config, "fit");
  const FitConfig& fc = loaded.settings.fit;
  if (fc.lambda) {
    const PreparedData prepared = prepare_data(loaded.data, loaded.model, fc);
    const FitResult fit = fit_at_lambda(loaded.data, loaded.model, prepared, *fc.lambda, fc);
    return write_fit_outputs(loaded, fit, "fixed", log);
  }
  const LambdaSelection selection = select_lambda(loaded.data, loaded.model, fc, fc.lambda_grid);
  write_text_file(loaded.settings.out_dir / "lambda_path.csv", lambda_path_csv(selection));
  return write_fit_outputs(loaded, selection.best_fit,
                           "minimum AIC over " + std::to_string(selection.path.size()) + " values", log);
}

int cmd_select_lambda(const RunConfig& config, std::ostream& log) {
  const LoadedFit loaded = load_fit(config, "select-lambda");
  const FitConfig& fc = loaded.settings.fit;
  const std::vector<double> grid = fc.lambda ? std::vector<double>{*fc.lambda} : fc.lambda_grid;
  const LambdaSelection selection = select_lambda(loaded.data, loaded.model, fc, grid);
  write_text_file(loaded.settings.out_dir / "lambda_path.csv", lambda_path_csv(selection));
  const std::string note = grid.size() == 1 ? "fixed"
                                            : "minimum AIC over " + std::to_string(grid.size()) + " values";
  return write_fit_outputs(loaded, selection.best_fit, note, log);
}

int cmd_benchmark(const RunConfig& config, std::ostream& log) {
  const BenchmarkSettings s = benchmark_settings(config);
  ensure_writable_directory(s.out_dir);
  const auto replicates_path = s.out_dir / "benchmark_replicates.csv";
  std::ofstream rows(replicates_path, std::ios::binary | std::ios::trunc);
  if (!rows) throw ConfigError("cannot write '" + replicates_path.string() + "'");

  std::vector<std::string> names;
  {
    const ModelSpec reference =
        make_model(s.model.name, TimeGrid::uniform(s.t_start, s.t_end, s.n_values.front()), s.model.options);
    names = reference.parameter_names;
  }
  rows << replicates_csv_header(names);
  rows.flush();
  const BenchmarkReport report = run_benchmark(
      s,
      [&](const ReplicateResult& r) {
        rows << replicates_csv_rows(s, r);
        rows.flush();
      },
      &interrupt_requested());
  rows.close();

  write_text_file(s.out_dir / "benchmark_summary.csv", summary_csv(report));
  write_text_file(s.out_dir / "benchmark_report.txt", benchmark_text(report));
  if (s.timing) write_text_file(s.out_dir / "benchmark_timing.csv", timing_csv(report));
  log << benchmark_text(report);
  return report.interrupted ? kExitInterrupted : kExitOk;
}

int run_command(const std::string& command, const CommandOptions& options, std::ostream& log) {
  try {
    RunConfig config = RunConfig::load(options.config);
    if (options.seed) config.set("seed", std::to_string(*options.seed));
    if (options.lambda) config.set("lambda", format_real(*options.lambda));
    if (options.out) config.set("out_dir", options.out->string());
    if (command == "simulate") return cmd_simulate(config, log);
    if (command == "fit") return cmd_fit(config, log);
    if (command == "select-lambda") return cmd_select_lambda(config, log);
    if (command == "benchmark") return cmd_benchmark(config, log);
    log << "error: unknown command '" << command << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SchemaError& e) {
    log << "schema error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const Error& e) {
    log << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "file error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace odekernel
