#ifndef ODEKERNEL_TEST_SUPPORT_HPP
#define ODEKERNEL_TEST_SUPPORT_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "odekernel/likelihood.hpp"
#include "odekernel/models.hpp"
#include "odekernel/operators.hpp"

namespace odekernel::fixtures {

inline TimeGrid random_grid(std::mt19937_64& rng, int n, double start = 0.0) {
  std::uniform_real_distribution<double> gap(0.2, 1.0);
  std::vector<double> t(static_cast<std::size_t>(n));
  t[0] = start;
  for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + gap(rng);
  return TimeGrid(t);
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> z(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = z(rng);
  return v;
}

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  return (da * db).sum() / std::sqrt(da.square().sum() * db.square().sum());
}

// Negative penalized log-likelihood written out directly, minimized over the
// state values x_j by solving its normal equations in long double:
//   sum_j |y_j - x_j|^2 / (2 s_j) + lambda/2 |P_j x_j - f_j|^2
inline long double explicit_objective(const ProfileContext& ctx, const Eigen::VectorXd& params) {
  using LMatrix = MatrixX<long double>;
  using LVector = VectorX<long double>;
  const ModelSpec& model = ctx.model();
  const auto& obs = ctx.observations();
  const auto d = build_difference_operator<long double>(obs.grid, ctx.difference_operator().stencil());
  const long double lambda = ctx.lambda();
  long double total = 0.0L;
  for (int j = 0; j < model.num_states; ++j) {
    const Eigen::VectorXd theta = model.operator_coefficients(j, params);
    const LMatrix p = operator_polynomial(theta.cast<long double>().eval(), d);
    const LVector f = model.forcing(j, params, ctx.forcing_context()).cast<long double>();
    const LVector y = obs.states.row(j).transpose().cast<long double>();
    const long double s2 = ctx.sigma2().size() == 1 ? ctx.sigma2()[0] : ctx.sigma2()[j];
    const Eigen::Index n = y.size();
    LMatrix a = LMatrix::Identity(n, n) / s2 + lambda * p.transpose() * p;
    const LVector b = y / s2 + lambda * p.transpose() * f;
    const LVector x = a.fullPivLu().solve(b);
    total += (y - x).squaredNorm() / (2.0L * s2) + lambda / 2.0L * (p * x - f).squaredNorm();
  }
  return total;
}

}  // namespace odekernel::fixtures

#endif  // ODEKERNEL_TEST_SUPPORT_HPP
