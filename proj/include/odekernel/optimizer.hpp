#ifndef ODEKERNEL_OPTIMIZER_HPP
#define ODEKERNEL_OPTIMIZER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace odekernel {

class ProfileContext;

/// Objective to minimize. +inf marks a rejected point.
using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimizerConfig {
  int max_iters = 500;
  /// Relative finite-difference step: h_k = gradient_step * max(1, |p_k|).
  double gradient_step = 1e-6;
  /// CG restart period; 0 means max(10, dim).
  int restart_period = 0;
  double armijo_c1 = 1e-4;
  int max_backtracks = 40;
  int num_starts = 10;
  /// Multi-start box. Empty means [0, 1] per coordinate.
  Eigen::VectorXd start_lower;
  Eigen::VectorXd start_upper;
  /// Converged when |grad| <= gradient_tolerance * max(1, |f|).
  double gradient_tolerance = 1e-6;
  /// Converged when the relative decrease stays below this for two
  /// iterations, the second along steepest descent.
  double objective_tolerance = 1e-10;
  std::uint64_t seed = 0;
  /// Used as the first start when set.
  std::optional<Eigen::VectorXd> initial_point;
  /// Worker threads for concurrent starts.
  int threads = 1;
};

struct StartReport {
  Eigen::VectorXd start;
  Eigen::VectorXd final_point;
  double final_value = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::string stop_reason;
};

struct OptimizationReport {
  Eigen::VectorXd best_parameters;
  double best_value = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  int best_start = -1;
  std::vector<StartReport> starts;
};

/// Central differences (f(p + h_k e_k) - f(p - h_k e_k)) / (2 h_k) with
/// h_k = h max(1, |p_k|). Falls back to a one-sided difference when one side
/// is +inf; throws GradientUnavailableError when both are.
Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& p, double h = 1e-6,
                                   std::optional<double> f_at_p = std::nullopt);

/// Central differences of the numerical gradient with steps
/// h_k = max(1e-4, 1e-4 |p_k|), symmetrized.
Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& p);

/// One Polak-Ribiere+ run with Armijo backtracking from `start`.
StartReport conjugate_gradient(const Objective& f, const Eigen::VectorXd& start,
                               const OptimizerConfig& config);

/// Start points: initial_point (if any) then uniform draws from the box.
std::vector<Eigen::VectorXd> start_points(int dim, const OptimizerConfig& config);

/// Multi-start CG. Throws NoFeasibleStartError when every start is rejected.
OptimizationReport minimize(const Objective& f, int dim, const OptimizerConfig& config);

/// Equations and the parameters they read, one group per connected component.
struct ParameterBlock {
  std::vector<int> equations;
  std::vector<int> parameters;
};

/// Connected components of the equation/parameter dependency graph.
std::vector<ParameterBlock> separable_blocks(const std::vector<std::vector<int>>& dependencies,
                                             int num_parameters);

struct BlockFitReport {
  OptimizationReport combined;
  std::vector<ParameterBlock> blocks;
  std::vector<OptimizationReport> block_reports;
  bool separated = false;
};

/// Minimizes the profile objective block by block when the dependency graph
/// splits, jointly otherwise. Parameters no equation reads stay at zero.
BlockFitReport block_separated_fit(const ProfileContext& ctx, const OptimizerConfig& config,
                                   bool allow_separation = true);

}  // namespace odekernel

#endif  // ODEKERNEL_OPTIMIZER_HPP
