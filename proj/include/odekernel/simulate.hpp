#ifndef ODEKERNEL_SIMULATE_HPP
#define ODEKERNEL_SIMULATE_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "odekernel/grid.hpp"
#include "odekernel/models.hpp"
#include "odekernel/observations.hpp"
#include "odekernel/optimizer.hpp"

namespace odekernel {

inline constexpr int kDefaultSubsteps = 20;

/// Classical RK4 with `substeps` uniform steps between consecutive grid
/// points. Returns the m x n trajectory; the first column is x0.
Eigen::MatrixXd integrate_rk4(const VectorField& field, const Eigen::VectorXd& params,
                              const Eigen::VectorXd& x0, const TimeGrid& grid,
                              int substeps = kDefaultSubsteps);

/// y = x + sigma * N(0, 1), i.i.d., deterministic per seed.
ObservationSet add_noise(const Eigen::MatrixXd& trajectory, const TimeGrid& grid, double sigma,
                         std::uint64_t seed);

struct SimulationConfig {
  std::string model = "exponential";
  Eigen::VectorXd parameters;
  Eigen::VectorXd initial_state;
  double t_start = 0.0;
  double t_end = 1.0;
  int n = 10;
  /// Explicit observation times; overrides t_start/t_end/n when non-empty.
  Eigen::VectorXd times;
  double sigma = 0.0;
  int replicates = 1;
  std::uint64_t seed = 0;
  int substeps = kDefaultSubsteps;

  TimeGrid grid() const;
};

struct SimulatedData {
  Eigen::MatrixXd truth;
  ObservationSet observations;
};

/// Integrates the model's true vector field and adds noise.
SimulatedData simulate(const ModelSpec& model, const SimulationConfig& config, std::uint64_t seed);

struct MleResult {
  Eigen::VectorXd parameters;
  Eigen::VectorXd initial_state;
  double objective = 0.0;
  OptimizationReport report;
};

/// Solver-in-the-loop maximum likelihood over (parameters, x0): minimizes
/// sum_j |y_j - x_j(t)|^2 / (2 sigma_j^2). Parameter starts come from the
/// config box (model box when empty); x0 starts at the first observation.
MleResult mle_fit(const ObservationSet& obs, const ModelSpec& model, const Eigen::VectorXd& sigma2,
                  const OptimizerConfig& config, int substeps = kDefaultSubsteps);

}  // namespace odekernel

#endif  // ODEKERNEL_SIMULATE_HPP
