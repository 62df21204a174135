#include "odekernel/fit.hpp"

#include <cmath>
#include <limits>

#include "odekernel/errors.hpp"

namespace odekernel {

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 12; ++k) grid.push_back(std::pow(10.0, -2.0 + 0.5 * k));
  return grid;
}

PreparedData prepare_data(const ObservationSet& obs, const ModelSpec& model,
                          const FitConfig& config) {
  if (obs.num_states() != model.num_states) {
    throw SchemaError("model '" + model.name + "' expects " + std::to_string(model.num_states) +
                      " state columns, data has " + std::to_string(obs.num_states()));
  }
  Surrogate surrogate = fit_surrogate(obs, observation_basis(obs.grid), config.smoothing);
  Eigen::MatrixXd values = surrogate.evaluate(obs.grid);

  const SigmaPolicy policy = config.sigma_policy.value_or(
      model.shared_variance ? SigmaPolicy::kEstimateShared : SigmaPolicy::kEstimate);
  Eigen::VectorXd sigma2;
  const Eigen::Index m = obs.num_states();
  switch (policy) {
    case SigmaPolicy::kKnown:
      if (config.sigma2.size() == 1) {
        sigma2 = Eigen::VectorXd::Constant(m, config.sigma2[0]);
      } else if (config.sigma2.size() == m) {
        sigma2 = config.sigma2;
      } else {
        throw ConfigError("known sigma2 needs 1 or " + std::to_string(m) + " values");
      }
      break;
    case SigmaPolicy::kEstimate:
      sigma2 = surrogate.residual_variance(false);
      break;
    case SigmaPolicy::kEstimateShared:
      sigma2 = surrogate.residual_variance(true);
      break;
  }
  // A noiseless surrogate can interpolate exactly; keep the variance positive.
  const double scale = std::max(1.0, obs.states.cwiseAbs().maxCoeff());
  sigma2 = sigma2.cwiseMax(1e-12 * scale * scale);
  if (!(sigma2.array() > 0.0).all() || !sigma2.allFinite()) {
    throw InvalidParameterError("noise variances must be positive and finite");
  }
  return {std::move(surrogate), std::move(values), std::move(sigma2)};
}

namespace {

void attach_covariance(FitResult& result, const ProfileContext& ctx, double level) {
  const auto objective = [&](const Eigen::VectorXd& p) { return profile_objective(ctx, p); };
  const Eigen::MatrixXd h = numerical_hessian(objective, result.parameters);
  try {
    result.wald = wald_intervals(-h, result.parameters, result.parameter_names, level);
  } catch (const CovarianceUnavailableError& e) {
    result.covariance_note = e.what();
  }
}

}  // namespace

FitResult fit_at_lambda(const ObservationSet& obs, const ModelSpec& model, const PreparedData& data,
                        double lambda, const FitConfig& config) {
  const ProfileContext ctx(obs, data.surrogate_values, model, lambda, data.sigma2, config.stencil);
  const BlockFitReport fit = block_separated_fit(ctx, config.optimizer, config.separate_blocks);
  const OptimizationReport& report = fit.combined;

  FitResult r;
  r.parameter_names = model.parameter_names;
  r.parameter_kinds = model.parameter_kinds;
  r.parameters = report.best_parameters;
  for (int j = 0; j < model.num_states; ++j) {
    r.theta.push_back(model.operator_coefficients(j, r.parameters));
  }
  std::vector<double> beta;
  for (int k = 0; k < model.num_parameters(); ++k) {
    if (model.parameter_kinds[static_cast<std::size_t>(k)] != ParameterKind::kTheta) {
      beta.push_back(r.parameters[k]);
    }
  }
  r.beta = Eigen::Map<Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));

  const StateReconstruction states = reconstruct_states(ctx, r.parameters);
  r.alpha = states.alpha;
  r.states = states.states;
  r.forcing = states.forcing;
  r.surrogate = data.surrogate_values;
  r.sigma2 = data.sigma2;
  r.df = effective_dfs(ctx, r.parameters);
  r.lambda = lambda;
  r.objective = report.best_value;
  r.aic = aic_value(r.objective, r.df.sum());
  r.initial_condition = r.states.col(0);
  if (model.latent) {
    r.latent_raw = model.latent->evaluate(r.parameters, obs.grid.times());
    r.latent = normalize_unit_range(*r.latent_raw);
  }
  r.converged = report.converged;
  r.gradient_norm = report.gradient_norm;
  r.separated = fit.separated;
  for (const auto& br : fit.block_reports) {
    if (br.best_start >= 0 && static_cast<std::size_t>(br.best_start) < br.starts.size()) {
      r.iterations += br.starts[static_cast<std::size_t>(br.best_start)].iterations;
    }
  }
  if (config.compute_covariance) attach_covariance(r, ctx, config.wald_level);
  return r;
}

LambdaSelection select_lambda(const ObservationSet& obs, const ModelSpec& model,
                              const FitConfig& config, const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("lambda grid is empty");
  for (double l : grid) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("lambda values must be positive");
  }
  const PreparedData data = prepare_data(obs, model, config);
  FitConfig path_config = config;
  path_config.compute_covariance = false;

  LambdaSelection out;
  std::optional<FitResult> best;
  double best_aic = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    LambdaPathEntry entry;
    entry.lambda = grid[i];
    try {
      FitResult r = fit_at_lambda(obs, model, data, grid[i], path_config);
      entry.objective = r.objective;
      entry.sum_df = r.df.sum();
      entry.aic = r.aic;
      entry.feasible = std::isfinite(r.aic);
      if (entry.feasible && r.aic < best_aic) {
        best_aic = r.aic;
        out.best = i;
        best = std::move(r);
      }
    } catch (const NoFeasibleStartError&) {
      entry.objective = entry.aic = std::numeric_limits<double>::infinity();
    }
    out.path.push_back(entry);
  }
  if (!best) throw NoFeasibleStartError("no lambda on the grid produced a feasible fit");
  if (config.compute_covariance) {
    const ProfileContext ctx(obs, data.surrogate_values, model, best->lambda, data.sigma2,
                             config.stencil);
    attach_covariance(*best, ctx, config.wald_level);
  }
  out.best_fit = std::move(*best);
  return out;
}

FitResult fit_model(const ObservationSet& obs, const ModelSpec& model, const FitConfig& config) {
  if (config.lambda) {
    const PreparedData data = prepare_data(obs, model, config);
    return fit_at_lambda(obs, model, data, *config.lambda, config);
  }
  return select_lambda(obs, model, config, config.lambda_grid).best_fit;
}

}  // namespace odekernel
