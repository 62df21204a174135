#ifndef ODEKERNEL_OPERATORS_HPP
#define ODEKERNEL_OPERATORS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "odekernel/errors.hpp"
#include "odekernel/grid.hpp"

namespace odekernel {

/// Interior row convention of the first-order difference operator.
///
/// kCentral uses (t[i+1] - t[i-1])^-1, the consistent central difference.
/// kHalfSpan uses (2 (t[i+1] - t[i-1]))^-1, which approximates half the
/// derivative on interior points. Boundary rows are identical in both.
enum class Stencil { kCentral, kHalfSpan };

/// Operators whose 1-norm condition estimate exceeds this are rejected.
inline constexpr double kMaxConditionEstimate = 1e12;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// n x n first-order difference matrix on a TimeGrid.
template <typename Scalar = double>
class DifferenceOperator {
 public:
  DifferenceOperator(MatrixX<Scalar> matrix, Stencil stencil)
      : matrix_(std::move(matrix)), stencil_(stencil) {}

  const MatrixX<Scalar>& matrix() const { return matrix_; }
  Stencil stencil() const { return stencil_; }
  Eigen::Index size() const { return matrix_.rows(); }

 private:
  MatrixX<Scalar> matrix_;
  Stencil stencil_;
};

template <typename Scalar = double>
DifferenceOperator<Scalar> build_difference_operator(const TimeGrid& grid,
                                                     Stencil stencil = Stencil::kCentral) {
  const Eigen::Index n = grid.size();
  MatrixX<Scalar> d = MatrixX<Scalar>::Zero(n, n);
  const auto t = [&](Eigen::Index i) { return static_cast<Scalar>(grid[i]); };

  const Scalar first = Scalar(1) / (t(1) - t(0));
  d(0, 0) = -first;
  d(0, 1) = first;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const Scalar span = t(i + 1) - t(i - 1);
    const Scalar w = stencil == Stencil::kCentral ? Scalar(1) / span : Scalar(1) / (Scalar(2) * span);
    d(i, i - 1) = -w;
    d(i, i + 1) = w;
  }
  const Scalar last = Scalar(1) / (t(n - 1) - t(n - 2));
  d(n - 1, n - 2) = -last;
  d(n - 1, n - 1) = last;
  return DifferenceOperator<Scalar>(std::move(d), stencil);
}

/// Realized P = sum_k coefficients[k] D^k (D^0 = I) with its LU factorization.
template <typename Scalar = double>
class OperatorMatrix {
 public:
  OperatorMatrix(VectorX<Scalar> coefficients, MatrixX<Scalar> matrix)
      : coefficients_(std::move(coefficients)), matrix_(std::move(matrix)), lu_(matrix_) {}

  Eigen::Index order() const { return coefficients_.size(); }
  Eigen::Index size() const { return matrix_.rows(); }
  const VectorX<Scalar>& coefficients() const { return coefficients_; }
  const MatrixX<Scalar>& matrix() const { return matrix_; }
  const Eigen::PartialPivLU<MatrixX<Scalar>>& lu() const { return lu_; }

  /// Reciprocal 1-norm condition estimate from the LU factors.
  Scalar rcond() const { return lu_.rcond(); }

 private:
  VectorX<Scalar> coefficients_;
  MatrixX<Scalar> matrix_;
  Eigen::PartialPivLU<MatrixX<Scalar>> lu_;
};

/// Polynomial in D with coefficients ordered by power; no factorization.
template <typename Scalar, typename Derived>
MatrixX<Scalar> operator_polynomial(const Eigen::MatrixBase<Derived>& coefficients,
                                    const DifferenceOperator<Scalar>& d) {
  const Eigen::Index n = d.size();
  MatrixX<Scalar> power = MatrixX<Scalar>::Identity(n, n);
  MatrixX<Scalar> p = coefficients(0) * power;
  for (Eigen::Index k = 1; k < coefficients.size(); ++k) {
    power = power * d.matrix();
    p.noalias() += coefficients(k) * power;
  }
  return p;
}

/// Builds P; returns nullopt when P is singular or its condition estimate
/// exceeds kMaxConditionEstimate.
template <typename Scalar, typename Derived>
std::optional<OperatorMatrix<Scalar>> try_build_operator_matrix(
    const Eigen::MatrixBase<Derived>& coefficients, const DifferenceOperator<Scalar>& d) {
  if (coefficients.size() < 1) throw InvalidParameterError("operator order must be >= 1");
  if (!coefficients.allFinite()) throw InvalidParameterError("operator coefficients must be finite");
  VectorX<Scalar> theta = coefficients.template cast<Scalar>();
  OperatorMatrix<Scalar> p(theta, operator_polynomial(theta, d));
  const Scalar rc = p.rcond();
  if (!(rc * Scalar(kMaxConditionEstimate) >= Scalar(1))) return std::nullopt;
  return p;
}

template <typename Scalar, typename Derived>
OperatorMatrix<Scalar> build_operator_matrix(const Eigen::MatrixBase<Derived>& coefficients,
                                             const DifferenceOperator<Scalar>& d) {
  auto p = try_build_operator_matrix(coefficients, d);
  if (!p) {
    std::vector<double> theta(static_cast<std::size_t>(coefficients.size()));
    std::ostringstream msg;
    msg << "operator is singular or ill-conditioned for theta = (";
    for (Eigen::Index k = 0; k < coefficients.size(); ++k) {
      theta[static_cast<std::size_t>(k)] = static_cast<double>(coefficients(k));
      msg << (k ? ", " : "") << theta[static_cast<std::size_t>(k)];
    }
    msg << ")";
    throw SingularOperatorError(msg.str(), std::move(theta));
  }
  return std::move(*p);
}

/// Symmetrized Gram matrix P^T P, the inverse of the discrete Green's kernel.
/// The kernel itself is never formed.
template <typename Scalar = double>
class KernelInverse {
 public:
  explicit KernelInverse(MatrixX<Scalar> gram) : gram_(std::move(gram)) {}
  const MatrixX<Scalar>& gram() const { return gram_; }

 private:
  MatrixX<Scalar> gram_;
};

template <typename Scalar>
MatrixX<Scalar> symmetric_gram(const MatrixX<Scalar>& p) {
  MatrixX<Scalar> g = p.transpose() * p;
  return (g + g.transpose()) * Scalar(0.5);
}

template <typename Scalar>
KernelInverse<Scalar> kernel_inverse(const OperatorMatrix<Scalar>& p) {
  return KernelInverse<Scalar>(symmetric_gram(p.matrix()));
}

/// z with P z = rhs.
template <typename Scalar, typename Derived>
VectorX<Scalar> solve_operator(const OperatorMatrix<Scalar>& p,
                               const Eigen::MatrixBase<Derived>& rhs) {
  if (rhs.size() != p.size()) throw InvalidParameterError("solve_operator: size mismatch");
  return p.lu().solve(rhs.template cast<Scalar>());
}

}  // namespace odekernel

#endif  // ODEKERNEL_OPERATORS_HPP
