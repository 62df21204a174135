#ifndef ODEKERNEL_COMMANDS_HPP
#define ODEKERNEL_COMMANDS_HPP

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "odekernel/config.hpp"
#include "odekernel/fit.hpp"

namespace odekernel {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitSchema = 3,
  kExitNumerical = 4,
  kExitNotConverged = 5,
  kExitInterrupted = 130,
};

/// Command-line overrides applied on top of the config file.
struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::optional<std::filesystem::path> out;
};

/// Set by the SIGINT handler; benchmark stops scheduling replicates.
std::atomic<bool>& interrupt_requested();

/// Loads the config, applies overrides, runs the command and maps errors to exit codes.
int run_command(const std::string& command, const CommandOptions& options, std::ostream& log);

int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_fit(const RunConfig& config, std::ostream& log);
int cmd_select_lambda(const RunConfig& config, std::ostream& log);
int cmd_benchmark(const RunConfig& config, std::ostream& log);

/// Text renderings of a fit, shared by fit and select-lambda.
std::string fit_report_text(const FitResult& fit, const std::string& model_name,
                            const std::string& lambda_note);
std::string parameters_csv(const FitResult& fit);
std::string equations_csv(const FitResult& fit, const std::vector<std::string>& state_names);
std::string latent_csv(const FitResult& fit, const TimeGrid& grid);
std::string lambda_path_csv(const LambdaSelection& selection);

}  // namespace odekernel

#endif  // ODEKERNEL_COMMANDS_HPP
