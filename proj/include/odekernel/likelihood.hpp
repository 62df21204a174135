#ifndef ODEKERNEL_LIKELIHOOD_HPP
#define ODEKERNEL_LIKELIHOOD_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "odekernel/models.hpp"
#include "odekernel/observations.hpp"
#include "odekernel/operators.hpp"

namespace odekernel {

// Scalar-generic kernels. With G = P^T P (the kernel inverse) and c = sigma^2 lambda,
// everything is expressed through M = I + c G so that K = G^-1 is never formed.

/// y^T [I - (I + c G)^-1] y.
///
/// With z = (I + c G)^-1 y the residual y - z is c G z, so the form equals
/// c z^T G z + c^2 |G z|^2. That sum has no cancellation when |y| is large
/// next to a nearly singular P, where y^T y - y^T z would lose every digit.
template <typename Scalar>
Scalar penalized_quadratic_form(const MatrixX<Scalar>& gram, const VectorX<Scalar>& y, Scalar c) {
  const Eigen::Index n = gram.rows();
  MatrixX<Scalar> m = MatrixX<Scalar>::Identity(n, n) + c * gram;
  Eigen::LLT<MatrixX<Scalar>> llt(m);
  const VectorX<Scalar> z = llt.solve(y);
  const VectorX<Scalar> gz = gram * z;
  return c * z.dot(gz) + c * c * gz.squaredNorm();
}

/// c r^T (I + c P P^T)^-1 r with r = P y - f.
///
/// Equal to y~^T [I - (I + c P^T P)^-1] y~ for y~ = y - P^-1 f, because
/// I - (I + c P^T P)^-1 = c P^T (I + c P P^T)^-1 P. It never applies P^-1, so
/// it stays accurate as P approaches singularity.
template <typename Scalar>
Scalar residual_quadratic_form(const MatrixX<Scalar>& p, const VectorX<Scalar>& r, Scalar c) {
  const Eigen::Index n = p.rows();
  MatrixX<Scalar> m = MatrixX<Scalar>::Identity(n, n);
  m.noalias() += c * p * p.transpose();
  const VectorX<Scalar> w = Eigen::LLT<MatrixX<Scalar>>(m).solve(r);
  return c * r.dot(w);
}

/// (I + c G)^-1 y, the homogeneous part of the reconstructed state.
template <typename Scalar>
VectorX<Scalar> penalized_smooth(const MatrixX<Scalar>& gram, const VectorX<Scalar>& y, Scalar c) {
  const Eigen::Index n = gram.rows();
  MatrixX<Scalar> m = MatrixX<Scalar>::Identity(n, n) + c * gram;
  return Eigen::LLT<MatrixX<Scalar>>(m).solve(y);
}

/// tr[(I + c G)^-1] = tr[K (K + c I)^-1].
template <typename Scalar>
Scalar smoother_trace(const MatrixX<Scalar>& gram, Scalar c) {
  const Eigen::Index n = gram.rows();
  MatrixX<Scalar> m = MatrixX<Scalar>::Identity(n, n) + c * gram;
  return Eigen::LLT<MatrixX<Scalar>>(m).solve(MatrixX<Scalar>::Identity(n, n)).trace();
}

/// y_j - P^-1 f_j.
Eigen::VectorXd transform_data(const Eigen::VectorXd& y, const OperatorMatrix<double>& p,
                               const Eigen::VectorXd& forcing);

/// Immutable inputs of the profile objective.
class ProfileContext {
 public:
  ProfileContext(ObservationSet obs, Eigen::MatrixXd surrogate_values, ModelSpec model,
                 double lambda, Eigen::VectorXd sigma2, Stencil stencil = Stencil::kCentral);

  const ObservationSet& observations() const { return obs_; }
  /// x'(t) on the observation grid, m x n.
  const Eigen::MatrixXd& surrogate_values() const { return surrogate_; }
  const ModelSpec& model() const { return model_; }
  double lambda() const { return lambda_; }
  const Eigen::VectorXd& sigma2() const { return sigma2_; }
  const DifferenceOperator<double>& difference_operator() const { return d_; }
  ForcingContext forcing_context() const { return {obs_.grid, surrogate_, obs_.inputs}; }

  ProfileContext with_lambda(double lambda) const;

 private:
  ObservationSet obs_;
  Eigen::MatrixXd surrogate_;
  ModelSpec model_;
  double lambda_;
  Eigen::VectorXd sigma2_;
  DifferenceOperator<double> d_;
};

/// Operator, forcing and transformed data of one equation, or nullopt when
/// the point is rejected (singular operator, division guard).
struct EquationState {
  OperatorMatrix<double> op;
  Eigen::VectorXd forcing;
  Eigen::VectorXd transformed;
};
std::optional<EquationState> equation_state(const ProfileContext& ctx, int equation,
                                            const Eigen::VectorXd& params);

/// The minimized objective L = -l_lambda profiled over the kernel coefficients:
/// sum_j ytilde_j^T [I - (I + sigma_j^2 lambda P^T P)^-1] ytilde_j / (2 sigma_j^2),
/// evaluated through residual_quadratic_form on r_j = P y_j - f_j.
/// Returns +inf for rejected points; throws InvalidParameterError on non-finite params.
double profile_objective(const ProfileContext& ctx, const Eigen::VectorXd& params);

/// Same objective restricted to a subset of equations.
double profile_objective(const ProfileContext& ctx, const Eigen::VectorXd& params,
                         const std::vector<int>& equations);

struct StateReconstruction {
  /// Kernel coefficients alpha_j = (K + lambda sigma_j^2 I)^-1 ytilde_j, m x n.
  Eigen::MatrixXd alpha;
  /// x_j = K alpha_j + P^-1 f_j, m x n.
  Eigen::MatrixXd states;
  /// f_j on the grid, m x n.
  Eigen::MatrixXd forcing;
};

/// w_j = (I + lambda sigma_j^2 P^T P)^-1 ytilde_j equals K alpha_j, so
/// x_j = w_j + P^-1 f_j and alpha_j = P^T P w_j.
StateReconstruction reconstruct_states(const ProfileContext& ctx, const Eigen::VectorXd& params);

/// tr[K (K + lambda sigma^2 I)^-1], computed as tr[(I + lambda sigma^2 P^T P)^-1].
double effective_df(const OperatorMatrix<double>& p, double lambda, double sigma2);
Eigen::VectorXd effective_dfs(const ProfileContext& ctx, const Eigen::VectorXd& params);

/// AIC = -2 l + 2 sum df, with l = -objective.
inline double aic_value(double objective, double sum_df) { return 2.0 * objective + 2.0 * sum_df; }
double aic(const ProfileContext& ctx, const Eigen::VectorXd& params);

/// Quantile of the standard normal distribution.
double normal_quantile(double p);

struct WaldInterval {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  /// False when the covariance diagonal is negative for this parameter.
  bool available = true;
};

struct WaldTable {
  Eigen::MatrixXd covariance;
  std::vector<WaldInterval> intervals;
  double level = 0.95;
};

/// Covariance -H^-1 from the log-likelihood Hessian and estimate +- z stderr
/// intervals. Throws CovarianceUnavailableError when H is singular.
WaldTable wald_intervals(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& estimates,
                         const std::vector<std::string>& names = {}, double level = 0.95);

enum class SigmaPolicy { kEstimate, kEstimateShared, kKnown };

struct FitResult {
  std::vector<std::string> parameter_names;
  std::vector<ParameterKind> parameter_kinds;
  Eigen::VectorXd parameters;
  /// Realized operator coefficients theta_j per equation.
  std::vector<Eigen::VectorXd> theta;
  /// Shared parameters: every entry that is not an operator parameter.
  Eigen::VectorXd beta;

  Eigen::MatrixXd alpha;
  Eigen::MatrixXd states;
  Eigen::MatrixXd forcing;
  Eigen::MatrixXd surrogate;
  Eigen::VectorXd sigma2;
  Eigen::VectorXd df;
  double lambda = 0.0;
  double objective = 0.0;
  double aic = 0.0;

  /// Present when the covariance was requested and the Hessian was invertible.
  std::optional<WaldTable> wald;
  std::string covariance_note;

  /// x_j(t_1), reported as the fitted initial condition.
  Eigen::VectorXd initial_condition;
  /// Min-max normalized latent input on the grid, latent-input models only.
  std::optional<Eigen::VectorXd> latent;
  std::optional<Eigen::VectorXd> latent_raw;

  bool converged = false;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool separated = false;
};

}  // namespace odekernel

#endif  // ODEKERNEL_LIKELIHOOD_HPP
