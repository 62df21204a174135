#include "odekernel/simulate.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "odekernel/errors.hpp"

namespace odekernel {

Eigen::MatrixXd integrate_rk4(const VectorField& field, const Eigen::VectorXd& params,
                              const Eigen::VectorXd& x0, const TimeGrid& grid, int substeps) {
  if (substeps < 1) throw InvalidParameterError("substeps must be >= 1");
  const Eigen::Index n = grid.size();
  Eigen::MatrixXd out(x0.size(), n);
  Eigen::VectorXd x = x0;
  out.col(0) = x;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double h = (grid[i] - grid[i - 1]) / substeps;
    double t = grid[i - 1];
    for (int s = 0; s < substeps; ++s) {
      const Eigen::VectorXd k1 = field(t, x, params);
      const Eigen::VectorXd k2 = field(t + 0.5 * h, x + 0.5 * h * k1, params);
      const Eigen::VectorXd k3 = field(t + 0.5 * h, x + 0.5 * h * k2, params);
      const Eigen::VectorXd k4 = field(t + h, x + h * k3, params);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t = grid[i - 1] + (s + 1) * h;
      if (!x.allFinite()) {
        std::ostringstream msg;
        msg << "integration diverged at t = " << t;
        throw IntegrationDivergedError(msg.str(), t);
      }
    }
    out.col(i) = x;
  }
  return out;
}

ObservationSet add_noise(const Eigen::MatrixXd& trajectory, const TimeGrid& grid, double sigma,
                         std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidParameterError("noise sigma must be >= 0");
  if (trajectory.cols() != grid.size()) throw InvalidParameterError("trajectory/grid size mismatch");
  Eigen::MatrixXd y = trajectory;
  if (sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    // Time-major order so a row prefix does not depend on m.
    for (Eigen::Index i = 0; i < y.cols(); ++i) {
      for (Eigen::Index j = 0; j < y.rows(); ++j) y(j, i) += sigma * normal(rng);
    }
  }
  return ObservationSet(grid, std::move(y));
}

TimeGrid SimulationConfig::grid() const {
  if (times.size() > 0) return TimeGrid(times);
  if (!(t_end > t_start)) throw ConfigError("simulation needs t_end > t_start");
  if (n < 3) throw ConfigError("simulation needs n >= 3");
  return TimeGrid::uniform(t_start, t_end, n);
}

SimulatedData simulate(const ModelSpec& model, const SimulationConfig& config, std::uint64_t seed) {
  if (config.parameters.size() != model.num_parameters()) {
    throw ConfigError("model '" + model.name + "' needs " + std::to_string(model.num_parameters()) +
                      " parameters, got " + std::to_string(config.parameters.size()));
  }
  if (config.initial_state.size() != model.num_states) {
    throw ConfigError("model '" + model.name + "' needs " + std::to_string(model.num_states) +
                      " initial states, got " + std::to_string(config.initial_state.size()));
  }
  if (!(config.sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
  const TimeGrid grid = config.grid();
  Eigen::MatrixXd truth =
      integrate_rk4(model.vector_field, config.parameters, config.initial_state, grid, config.substeps);
  ObservationSet obs = add_noise(truth, grid, config.sigma, seed);
  return {std::move(truth), std::move(obs)};
}

MleResult mle_fit(const ObservationSet& obs, const ModelSpec& model, const Eigen::VectorXd& sigma2,
                  const OptimizerConfig& config, int substeps) {
  const int np = model.num_parameters();
  const int m = model.num_states;
  if (obs.num_states() != m) throw InvalidParameterError("data/model state count mismatch");
  if (sigma2.size() != m || !(sigma2.array() > 0.0).all()) {
    throw InvalidParameterError("mle_fit needs one positive variance per state");
  }
  const Eigen::ArrayXd weight = 0.5 / sigma2.array();

  const auto objective = [&](const Eigen::VectorXd& z) {
    try {
      const Eigen::MatrixXd x =
          integrate_rk4(model.vector_field, z.head(np), z.tail(m), obs.grid, substeps);
      const double value =
          ((obs.states - x).array().square().rowwise().sum() * weight).sum();
      return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
    } catch (const IntegrationDivergedError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const DivisionGuardError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  OptimizerConfig cfg = config;
  const Eigen::VectorXd plo = config.start_lower.size() == np   ? config.start_lower
                              : model.start_lower.size() == np ? model.start_lower
                                                               : Eigen::VectorXd::Zero(np);
  const Eigen::VectorXd phi = config.start_upper.size() == np   ? config.start_upper
                              : model.start_upper.size() == np ? model.start_upper
                                                               : Eigen::VectorXd::Ones(np);
  cfg.start_lower.resize(np + m);
  cfg.start_upper.resize(np + m);
  cfg.start_lower << plo, obs.states.col(0);
  cfg.start_upper << phi, obs.states.col(0);
  if (config.initial_point && config.initial_point->size() == np) {
    Eigen::VectorXd full(np + m);
    full << *config.initial_point, obs.states.col(0);
    cfg.initial_point = full;
  }

  MleResult out;
  out.report = minimize(objective, np + m, cfg);
  out.parameters = out.report.best_parameters.head(np);
  out.initial_state = out.report.best_parameters.tail(m);
  out.objective = out.report.best_value;
  return out;
}

}  // namespace odekernel
