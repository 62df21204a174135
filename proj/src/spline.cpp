#include "odekernel/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "odekernel/errors.hpp"

namespace odekernel {

SplineBasis::SplineBasis(Eigen::VectorXd knots, int degree)
    : knots_(std::move(knots)), degree_(degree) {}

SplineBasis SplineBasis::at_breakpoints(const Eigen::VectorXd& breakpoints, int degree) {
  if (degree < 1) throw InvalidParameterError("spline degree must be >= 1");
  if (breakpoints.size() < 2) throw InvalidParameterError("need at least two breakpoints");
  for (Eigen::Index i = 1; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i] > breakpoints[i - 1])) {
      throw InvalidParameterError("spline breakpoints must be strictly increasing");
    }
  }
  const Eigen::Index nb = breakpoints.size();
  Eigen::VectorXd knots(nb + 2 * degree);
  knots.head(degree).setConstant(breakpoints[0]);
  knots.segment(degree, nb) = breakpoints;
  knots.tail(degree).setConstant(breakpoints[nb - 1]);
  return SplineBasis(std::move(knots), degree);
}

SplineBasis SplineBasis::uniform(double lower, double upper, int num_basis, int degree) {
  if (!(upper > lower)) throw InvalidParameterError("spline span must have upper > lower");
  if (num_basis < degree + 1) {
    throw InvalidParameterError("uniform spline basis needs at least degree + 1 functions");
  }
  const int segments = num_basis - degree;
  Eigen::VectorXd breaks(segments + 1);
  for (int i = 0; i <= segments; ++i) breaks[i] = lower + (upper - lower) * i / segments;
  breaks[segments] = upper;
  return at_breakpoints(breaks, degree);
}

bool SplineBasis::contains(double t) const {
  const double slack = 1e-12 * (upper() - lower());
  return t >= lower() - slack && t <= upper() + slack;
}

Eigen::VectorXd SplineBasis::evaluate(double t) const {
  if (!contains(t)) {
    std::ostringstream msg;
    msg << "spline evaluation at t = " << t << " outside the knot span [" << lower() << ", "
        << upper() << "]";
    throw OutOfSpanError(msg.str());
  }
  t = std::clamp(t, lower(), upper());
  const int p = degree_;
  const int q = size();

  // Span index s with knots[s] <= t < knots[s+1]; the right end uses the last span.
  int s = q - 1;
  if (t < upper()) {
    const auto* begin = knots_.data();
    const auto* it = std::upper_bound(begin + p, begin + q + 1, t);
    s = static_cast<int>(it - begin) - 1;
  }

  // Nonzero basis functions on span s, de Boor's triangular recurrence.
  std::vector<double> n(p + 1, 0.0), left(p + 1), right(p + 1);
  n[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = t - knots_[s + 1 - j];
    right[j] = knots_[s + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom != 0.0 ? n[r] / denom : 0.0;
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(q);
  for (int j = 0; j <= p; ++j) out[s - p + j] = n[j];
  return out;
}

Eigen::MatrixXd SplineBasis::design(const Eigen::VectorXd& points) const {
  Eigen::MatrixXd phi(points.size(), size());
  for (Eigen::Index i = 0; i < points.size(); ++i) phi.row(i) = evaluate(points[i]).transpose();
  return phi;
}

Eigen::MatrixXd SplineBasis::roughness_penalty() const {
  const int q = size();
  const int p = degree_;
  if (q < 3 || p < 2) return Eigen::MatrixXd::Zero(q, q);
  // Divided second differences (the B-spline coefficients of s''), each row
  // rescaled by its own squared knot span. Uniform knots give plain second
  // differences; near clamped ends, where the coefficients crowd together,
  // linear functions are still annihilated.
  const Eigen::VectorXd& t = knots_;
  Eigen::MatrixXd d1 = Eigen::MatrixXd::Zero(q - 1, q);
  for (int i = 0; i < q - 1; ++i) {
    const double w = p / (t[i + p + 1] - t[i + 1]);
    d1(i, i) = -w;
    d1(i, i + 1) = w;
  }
  Eigen::MatrixXd delta(q - 2, q);
  for (int i = 0; i < q - 2; ++i) {
    const double span = (t[i + p + 1] - t[i + 2]) / (p - 1);
    delta.row(i) = span * (d1.row(i + 1) - d1.row(i));
  }
  return delta.transpose() * delta;
}

std::vector<double> SmoothingOptions::default_mu_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 32; ++k) grid.push_back(std::pow(10.0, -6.0 + 0.25 * k));
  return grid;
}

Surrogate::Surrogate(SplineBasis basis, Eigen::MatrixXd coefficients, Eigen::VectorXd mu,
                     Eigen::VectorXd rss, Eigen::VectorXd hat_trace, Eigen::Index num_points)
    : basis_(std::move(basis)),
      coefficients_(std::move(coefficients)),
      mu_(std::move(mu)),
      rss_(std::move(rss)),
      hat_trace_(std::move(hat_trace)),
      num_points_(num_points) {}

Eigen::MatrixXd Surrogate::evaluate(const Eigen::VectorXd& points) const {
  return (basis_.design(points) * coefficients_).transpose();
}

Eigen::VectorXd Surrogate::residual_variance(bool shared) const {
  const Eigen::VectorXd dof =
      (static_cast<double>(num_points_) - hat_trace_.array()).max(1e-8).matrix();
  if (shared) {
    return Eigen::VectorXd::Constant(rss_.size(), rss_.sum() / dof.sum());
  }
  return rss_.cwiseQuotient(dof);
}

namespace {

struct SmoothFit {
  Eigen::VectorXd coefficients;
  double rss = 0.0;
  double hat_trace = 0.0;
};

// One weighted penalized least-squares solve. Returns nullopt if the normal
// matrix is numerically singular.
std::optional<SmoothFit> smooth_once(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& w,
                                     const Eigen::MatrixXd& penalty, const Eigen::VectorXd& y,
                                     double mu) {
  const Eigen::MatrixXd phit_w = phi.transpose() * w;
  Eigen::MatrixXd normal = phit_w * phi + mu * penalty;
  normal = 0.5 * (normal + normal.transpose());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) return std::nullopt;
  // A vanishing pivot means the system is rank deficient regardless of rcond.
  const Eigen::VectorXd pivots = ldlt.vectorD();
  if (pivots.minCoeff() <= 1e-13 * std::max(1.0, pivots.cwiseAbs().maxCoeff())) return std::nullopt;

  SmoothFit fit;
  fit.coefficients = ldlt.solve(phit_w * y);
  const Eigen::VectorXd r = y - phi * fit.coefficients;
  fit.rss = r.dot(w * r);
  fit.hat_trace = (phi * ldlt.solve(phit_w)).trace();
  return fit;
}

}  // namespace

Surrogate fit_surrogate(const ObservationSet& obs, const SplineBasis& basis,
                        const SmoothingOptions& options) {
  const Eigen::Index n = obs.num_times();
  const Eigen::Index m = obs.num_states();
  const Eigen::MatrixXd phi = basis.design(obs.grid.times());
  const Eigen::MatrixXd penalty = basis.roughness_penalty();
  const Eigen::MatrixXd w = options.weights ? *options.weights : Eigen::MatrixXd::Identity(n, n);
  if (w.rows() != n || w.cols() != n) throw InvalidParameterError("weight matrix must be n x n");
  if (options.mu && !(*options.mu >= 0.0)) throw InvalidParameterError("mu must be >= 0");

  Eigen::MatrixXd coefficients(basis.size(), m);
  Eigen::VectorXd mu(m), rss(m), trace(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::VectorXd y = obs.states.row(j).transpose();
    std::optional<SmoothFit> chosen;
    double chosen_mu = 0.0;
    if (options.mu) {
      chosen = smooth_once(phi, w, penalty, y, *options.mu);
      chosen_mu = *options.mu;
      if (!chosen) {
        throw UnderdeterminedSmootherError(
            "smoothing normal equations are rank deficient (q = " + std::to_string(basis.size()) +
            ", n = " + std::to_string(n) + "); use a smoothing weight mu > 0");
      }
    } else {
      double best_gcv = std::numeric_limits<double>::infinity();
      for (double candidate : options.mu_grid) {
        auto fit = smooth_once(phi, w, penalty, y, candidate);
        if (!fit) continue;
        const double resid_dof = static_cast<double>(n) - fit->hat_trace;
        if (resid_dof <= 1e-8) continue;
        const double gcv = static_cast<double>(n) * fit->rss / (resid_dof * resid_dof);
        if (gcv < best_gcv) {
          best_gcv = gcv;
          chosen = std::move(fit);
          chosen_mu = candidate;
        }
      }
      if (!chosen) {
        throw UnderdeterminedSmootherError(
            "no smoothing weight on the GCV grid gives a solvable, non-interpolating fit");
      }
    }
    coefficients.col(j) = chosen->coefficients;
    mu[j] = chosen_mu;
    rss[j] = chosen->rss;
    trace[j] = chosen->hat_trace;
  }
  return Surrogate(basis, std::move(coefficients), std::move(mu), std::move(rss),
                   std::move(trace), n);
}

SplineBasis observation_basis(const TimeGrid& grid, int degree) {
  return SplineBasis::at_breakpoints(grid.times(), degree);
}

}  // namespace odekernel
