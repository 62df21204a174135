#ifndef ODEKERNEL_SPLINE_HPP
#define ODEKERNEL_SPLINE_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "odekernel/grid.hpp"
#include "odekernel/observations.hpp"

namespace odekernel {

/// Clamped B-spline basis on [lower, upper].
class SplineBasis {
 public:
  /// Breakpoints become the knots: the first and last are the clamped ends,
  /// the rest are interior knots. q = (#breakpoints - 2) + degree + 1.
  static SplineBasis at_breakpoints(const Eigen::VectorXd& breakpoints, int degree = 3);

  /// num_basis functions with equally spaced interior knots on [lower, upper].
  static SplineBasis uniform(double lower, double upper, int num_basis, int degree = 3);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
  const Eigen::VectorXd& knots() const { return knots_; }
  double lower() const { return knots_[degree_]; }
  double upper() const { return knots_[knots_.size() - degree_ - 1]; }
  bool contains(double t) const;

  /// Basis values at t; throws OutOfSpanError outside [lower, upper].
  Eigen::VectorXd evaluate(double t) const;

  /// |points| x q design matrix.
  Eigen::MatrixXd design(const Eigen::VectorXd& points) const;

  /// R = Delta2^T Delta2, Delta2 the locally scaled second differences of the
  /// coefficients (plain second differences on uniform knots).
  Eigen::MatrixXd roughness_penalty() const;

 private:
  SplineBasis(Eigen::VectorXd knots, int degree);

  Eigen::VectorXd knots_;
  int degree_;
};

struct SmoothingOptions {
  /// Fixed smoothing weight; when empty it is chosen per state by GCV over mu_grid.
  std::optional<double> mu;
  std::vector<double> mu_grid = default_mu_grid();
  /// n x n SPD weight matrix; identity when empty.
  std::optional<Eigen::MatrixXd> weights;

  /// 33 log-spaced values 1e-6 .. 1e2.
  static std::vector<double> default_mu_grid();
};

/// Penalized-spline fit of every observed state.
class Surrogate {
 public:
  Surrogate(SplineBasis basis, Eigen::MatrixXd coefficients, Eigen::VectorXd mu,
            Eigen::VectorXd rss, Eigen::VectorXd hat_trace, Eigen::Index num_points);

  const SplineBasis& basis() const { return basis_; }
  /// q x m, one column per state.
  const Eigen::MatrixXd& coefficients() const { return coefficients_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  /// Weighted residual sum of squares per state.
  const Eigen::VectorXd& rss() const { return rss_; }
  /// tr(H) of the smoother per state.
  const Eigen::VectorXd& hat_trace() const { return hat_trace_; }
  Eigen::Index num_states() const { return coefficients_.cols(); }

  /// m x |points| matrix of fitted values.
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& points) const;
  Eigen::MatrixXd evaluate(const TimeGrid& grid) const { return evaluate(grid.times()); }

  /// rss / (n - tr H) per state, or pooled over states when shared.
  Eigen::VectorXd residual_variance(bool shared) const;

 private:
  SplineBasis basis_;
  Eigen::MatrixXd coefficients_;
  Eigen::VectorXd mu_;
  Eigen::VectorXd rss_;
  Eigen::VectorXd hat_trace_;
  Eigen::Index num_points_;
};

/// Solves (Phi^T W Phi + mu R) c_j = Phi^T W y_j for every state.
Surrogate fit_surrogate(const ObservationSet& obs, const SplineBasis& basis,
                        const SmoothingOptions& options = {});

/// Default basis for state surrogates: cubic with knots at the observation times.
SplineBasis observation_basis(const TimeGrid& grid, int degree = 3);

}  // namespace odekernel

#endif  // ODEKERNEL_SPLINE_HPP
