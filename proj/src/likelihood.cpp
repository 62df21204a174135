#include "odekernel/likelihood.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "odekernel/errors.hpp"

namespace odekernel {

Eigen::VectorXd transform_data(const Eigen::VectorXd& y, const OperatorMatrix<double>& p,
                               const Eigen::VectorXd& forcing) {
  if (y.size() != p.size() || forcing.size() != p.size()) {
    throw InvalidParameterError("transform_data: size mismatch");
  }
  return y - solve_operator(p, forcing);
}

ProfileContext::ProfileContext(ObservationSet obs, Eigen::MatrixXd surrogate_values,
                               ModelSpec model, double lambda, Eigen::VectorXd sigma2,
                               Stencil stencil)
    : obs_(std::move(obs)),
      surrogate_(std::move(surrogate_values)),
      model_(std::move(model)),
      lambda_(lambda),
      sigma2_(std::move(sigma2)),
      d_(build_difference_operator<double>(obs_.grid, stencil)) {
  if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) {
    throw InvalidParameterError("lambda must be a positive finite number");
  }
  if (sigma2_.size() != obs_.num_states()) {
    throw InvalidParameterError("need one noise variance per state");
  }
  if (!(sigma2_.array() > 0.0).all() || !sigma2_.allFinite()) {
    throw InvalidParameterError("noise variances must be positive");
  }
  if (model_.num_states != obs_.num_states()) {
    throw InvalidParameterError("model '" + model_.name + "' expects " +
                                std::to_string(model_.num_states) + " states, data has " +
                                std::to_string(obs_.num_states()));
  }
  if (surrogate_.rows() != obs_.num_states() || surrogate_.cols() != obs_.num_times()) {
    throw InvalidParameterError("surrogate values must be m x n");
  }
}

ProfileContext ProfileContext::with_lambda(double lambda) const {
  return ProfileContext(obs_, surrogate_, model_, lambda, sigma2_, d_.stencil());
}

std::optional<EquationState> equation_state(const ProfileContext& ctx, int equation,
                                            const Eigen::VectorXd& params) {
  const ModelSpec& model = ctx.model();
  auto op = try_build_operator_matrix(model.operator_coefficients(equation, params),
                                      ctx.difference_operator());
  if (!op) return std::nullopt;
  Eigen::VectorXd f;
  try {
    f = model.forcing(equation, params, ctx.forcing_context());
  } catch (const DivisionGuardError&) {
    return std::nullopt;
  }
  if (!f.allFinite()) return std::nullopt;
  Eigen::VectorXd y = ctx.observations().states.row(equation).transpose();
  Eigen::VectorXd transformed = transform_data(y, *op, f);
  return EquationState{std::move(*op), std::move(f), std::move(transformed)};
}

namespace {

void check_params(const ProfileContext& ctx, const Eigen::VectorXd& params) {
  if (params.size() != ctx.model().num_parameters()) {
    throw InvalidParameterError("expected " + std::to_string(ctx.model().num_parameters()) +
                                " parameters, got " + std::to_string(params.size()));
  }
  if (!params.allFinite()) throw InvalidParameterError("parameters must be finite");
}

double equation_term(const ProfileContext& ctx, int j, const Eigen::VectorXd& params) {
  const auto state = equation_state(ctx, j, params);
  if (!state) return std::numeric_limits<double>::infinity();
  const double s2 = ctx.sigma2()[j];
  // P y~ = P y - f: the ODE residual of the raw data.
  const Eigen::VectorXd residual =
      state->op.matrix() * ctx.observations().states.row(j).transpose() - state->forcing;
  const double value =
      residual_quadratic_form<double>(state->op.matrix(), residual, s2 * ctx.lambda()) / (2.0 * s2);
  return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
}

}  // namespace

double profile_objective(const ProfileContext& ctx, const Eigen::VectorXd& params,
                         const std::vector<int>& equations) {
  check_params(ctx, params);
  double total = 0.0;
  for (int j : equations) {
    total += equation_term(ctx, j, params);
    if (!std::isfinite(total)) return std::numeric_limits<double>::infinity();
  }
  return total;
}

double profile_objective(const ProfileContext& ctx, const Eigen::VectorXd& params) {
  std::vector<int> all(static_cast<std::size_t>(ctx.model().num_states));
  for (int j = 0; j < ctx.model().num_states; ++j) all[static_cast<std::size_t>(j)] = j;
  return profile_objective(ctx, params, all);
}

StateReconstruction reconstruct_states(const ProfileContext& ctx, const Eigen::VectorXd& params) {
  check_params(ctx, params);
  const Eigen::Index m = ctx.observations().num_states();
  const Eigen::Index n = ctx.observations().num_times();
  StateReconstruction out{Eigen::MatrixXd(m, n), Eigen::MatrixXd(m, n), Eigen::MatrixXd(m, n)};
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto state = equation_state(ctx, static_cast<int>(j), params);
    if (!state) {
      // Surface the precise reason.
      build_operator_matrix(ctx.model().operator_coefficients(static_cast<int>(j), params),
                            ctx.difference_operator());
      ctx.model().forcing(static_cast<int>(j), params, ctx.forcing_context());
      throw InvalidParameterError("equation " + std::to_string(j + 1) +
                                  " cannot be evaluated at these parameters");
    }
    const Eigen::MatrixXd gram = kernel_inverse(state->op).gram();
    const Eigen::VectorXd w =
        penalized_smooth<double>(gram, state->transformed, ctx.sigma2()[j] * ctx.lambda());
    out.alpha.row(j) = (gram * w).transpose();
    out.states.row(j) = (w + solve_operator(state->op, state->forcing)).transpose();
    out.forcing.row(j) = state->forcing.transpose();
  }
  return out;
}

double effective_df(const OperatorMatrix<double>& p, double lambda, double sigma2) {
  return smoother_trace<double>(kernel_inverse(p).gram(), lambda * sigma2);
}

Eigen::VectorXd effective_dfs(const ProfileContext& ctx, const Eigen::VectorXd& params) {
  check_params(ctx, params);
  const int m = ctx.model().num_states;
  Eigen::VectorXd df(m);
  for (int j = 0; j < m; ++j) {
    const auto op = build_operator_matrix(ctx.model().operator_coefficients(j, params),
                                          ctx.difference_operator());
    df[j] = effective_df(op, ctx.lambda(), ctx.sigma2()[j]);
  }
  return df;
}

double aic(const ProfileContext& ctx, const Eigen::VectorXd& params) {
  return aic_value(profile_objective(ctx, params), effective_dfs(ctx, params).sum());
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidParameterError("normal_quantile needs 0 < p < 1");
  // Acklam's rational approximation followed by one Halley step on erfc.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

WaldTable wald_intervals(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& estimates,
                         const std::vector<std::string>& names, double level) {
  const Eigen::Index k = hessian.rows();
  if (hessian.cols() != k || estimates.size() != k) {
    throw InvalidParameterError("wald_intervals: Hessian and estimates sizes differ");
  }
  if (!(level > 0.0 && level < 1.0)) throw InvalidParameterError("level must be in (0, 1)");
  if (!hessian.allFinite()) {
    throw CovarianceUnavailableError("Hessian has non-finite entries", {});
  }
  const Eigen::MatrixXd h = 0.5 * (hessian + hessian.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  const Eigen::VectorXd values = eig.eigenvalues();
  const double scale = std::max(values.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  std::vector<std::vector<double>> null_dirs;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(values[i]) <= 1e-10 * scale) {
      const Eigen::VectorXd v = eig.eigenvectors().col(i);
      null_dirs.emplace_back(v.data(), v.data() + v.size());
    }
  }
  if (!null_dirs.empty()) {
    std::ostringstream msg;
    msg << "Hessian is singular: " << null_dirs.size() << " null direction(s)";
    throw CovarianceUnavailableError(msg.str(), std::move(null_dirs));
  }

  WaldTable table;
  table.level = level;
  table.covariance = -(eig.eigenvectors() * values.cwiseInverse().asDiagonal() *
                       eig.eigenvectors().transpose());
  table.covariance = 0.5 * (table.covariance + table.covariance.transpose()).eval();
  const double z = normal_quantile(0.5 + level / 2.0);
  for (Eigen::Index i = 0; i < k; ++i) {
    WaldInterval w;
    w.name = i < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(i)]
                                                         : "p" + std::to_string(i + 1);
    w.estimate = estimates[i];
    const double var = table.covariance(i, i);
    if (var >= 0.0) {
      w.std_error = std::sqrt(var);
      w.lower = w.estimate - z * w.std_error;
      w.upper = w.estimate + z * w.std_error;
    } else {
      w.available = false;
      w.std_error = w.lower = w.upper = 0.0;
    }
    table.intervals.push_back(std::move(w));
  }
  return table;
}

}  // namespace odekernel
