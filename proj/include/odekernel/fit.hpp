#ifndef ODEKERNEL_FIT_HPP
#define ODEKERNEL_FIT_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "odekernel/likelihood.hpp"
#include "odekernel/models.hpp"
#include "odekernel/observations.hpp"
#include "odekernel/optimizer.hpp"
#include "odekernel/spline.hpp"

namespace odekernel {

/// 13 log-spaced values 1e-2 .. 1e4.
std::vector<double> default_lambda_grid();

struct FitConfig {
  /// Fixed penalty; when empty lambda is chosen by AIC over lambda_grid.
  std::optional<double> lambda;
  std::vector<double> lambda_grid = default_lambda_grid();

  /// kEstimate / kEstimateShared take sigma^2 from the surrogate residuals;
  /// kKnown uses `sigma2` (one entry, broadcast, or one per state).
  /// When unset the model's shared_variance flag picks between the estimates.
  std::optional<SigmaPolicy> sigma_policy;
  Eigen::VectorXd sigma2;

  SmoothingOptions smoothing;
  OptimizerConfig optimizer;
  Stencil stencil = Stencil::kCentral;
  bool separate_blocks = true;
  bool compute_covariance = true;
  double wald_level = 0.95;
};

/// Surrogate fit plus the noise variances that go with it.
struct PreparedData {
  Surrogate surrogate;
  Eigen::MatrixXd surrogate_values;
  Eigen::VectorXd sigma2;
};
PreparedData prepare_data(const ObservationSet& obs, const ModelSpec& model, const FitConfig& config);

/// Estimates (theta, beta) at one lambda and fills every FitResult field.
FitResult fit_at_lambda(const ObservationSet& obs, const ModelSpec& model, const PreparedData& data,
                        double lambda, const FitConfig& config);

struct LambdaPathEntry {
  double lambda = 0.0;
  double objective = 0.0;
  double sum_df = 0.0;
  double aic = 0.0;
  bool feasible = false;
};

struct LambdaSelection {
  std::vector<LambdaPathEntry> path;
  std::size_t best = 0;
  FitResult best_fit;
};

/// Fits at every lambda of the grid and keeps the minimum-AIC fit.
LambdaSelection select_lambda(const ObservationSet& obs, const ModelSpec& model,
                              const FitConfig& config, const std::vector<double>& grid);

/// Full pipeline: fixed lambda when configured, AIC selection otherwise.
FitResult fit_model(const ObservationSet& obs, const ModelSpec& model, const FitConfig& config);

}  // namespace odekernel

#endif  // ODEKERNEL_FIT_HPP
