#ifndef ODEKERNEL_MODELS_HPP
#define ODEKERNEL_MODELS_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "odekernel/grid.hpp"
#include "odekernel/spline.hpp"

namespace odekernel {

enum class ParameterKind { kTheta, kBeta, kLatent };

/// Everything a forcing evaluator may read. States enter only through the
/// fixed surrogate, never through the raw observations.
struct ForcingContext {
  const TimeGrid& grid;
  const Eigen::MatrixXd& surrogate;  // m x n
  const Eigen::MatrixXd& inputs;     // p x n, possibly empty
};

/// Spline-parameterized unobserved input eta(t) = sum_k a_k phi_k(t).
class LatentInput {
 public:
  LatentInput(SplineBasis basis, int offset) : basis_(std::move(basis)), offset_(offset) {}

  const SplineBasis& basis() const { return basis_; }
  /// Index of a_1 in the model parameter vector.
  int offset() const { return offset_; }
  int size() const { return basis_.size(); }

  bool clamp_nonnegative = false;

  double evaluate(const Eigen::VectorXd& params, double t) const;
  Eigen::VectorXd evaluate(const Eigen::VectorXd& params, const Eigen::VectorXd& points) const;

 private:
  SplineBasis basis_;
  int offset_;
};

/// Min-max scaling to [0, 1]; a constant vector maps to zeros.
Eigen::VectorXd normalize_unit_range(const Eigen::VectorXd& v);

using OperatorCoefficientsFn = std::function<Eigen::VectorXd(int equation, const Eigen::VectorXd& params)>;
using ForcingFn = std::function<Eigen::VectorXd(int equation, const Eigen::VectorXd& params,
                                                const ForcingContext& ctx)>;
/// Right-hand side of the true (non-linearized) system, dx/dt = F(t, x, params).
using VectorField = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x,
                                                  const Eigen::VectorXd& params)>;

/// A system P_theta_j x_j = f_j(x', u, beta), j = 1..m, with a flat parameter
/// vector holding the natural parameters (theta's, beta's, latent coefficients).
struct ModelSpec {
  std::string name;
  int num_states = 0;
  std::vector<std::string> parameter_names;
  std::vector<ParameterKind> parameter_kinds;
  std::vector<int> operator_orders;

  /// Coefficients of P_theta_j in powers of D, length operator_orders[j].
  OperatorCoefficientsFn operator_coefficients;
  ForcingFn forcing;
  /// Parameters that P_theta_j or f_j read, per equation.
  std::vector<std::vector<int>> dependencies;
  VectorField vector_field;
  std::optional<LatentInput> latent;

  /// Equations share a noise variance by default.
  bool shared_variance = false;

  /// Multi-start sampling box.
  Eigen::VectorXd start_lower;
  Eigen::VectorXd start_upper;

  int num_parameters() const { return static_cast<int>(parameter_names.size()); }
  int parameter_index(const std::string& name) const;
};

/// dx/dt - theta x = 0, operator coefficients (-theta, 1), f = 0.
ModelSpec model_exponential();

/// dx1/dt = x1 (theta1 - beta1 x2), dx2/dt = -x2 (theta2 - beta2 x1).
/// Parameters ordered (theta1, beta1, theta2, beta2).
ModelSpec model_lotka_volterra();

/// dx_j/dt + theta_j x_j = beta1_j + beta2_j eta / (beta3_j + eta) with eta a
/// cubic spline with num_latent equally spaced coefficients on [lower, upper].
/// Parameters: theta_1..theta_G, then (beta1_j, beta2_j, beta3_j) per gene,
/// then a_1..a_q.
ModelSpec model_tf_network(int genes, bool shared_variance, double lower, double upper,
                           int num_latent = 15);

/// Smallest allowed beta3_j + eta(t) before the forcing refuses to evaluate.
inline constexpr double kDivisionGuard = 1e-8;

struct ModelOptions {
  int genes = 17;
  bool shared_variance = true;
  int num_latent = 15;
};

/// Looks up `exponential`, `lotka-volterra` or `tf-network`. The grid span is
/// needed by models with a latent input.
ModelSpec make_model(const std::string& name, const TimeGrid& grid, const ModelOptions& options = {});
bool is_known_model(const std::string& name);

/// Parameters that the dependency map claims do not touch equation j but
/// whose perturbation changes P_theta_j or f_j. Empty when the map is sound.
std::vector<std::pair<int, int>> dependency_violations(const ModelSpec& model,
                                                       const Eigen::VectorXd& params,
                                                       const ForcingContext& ctx,
                                                       double perturbation = 1e-3);

}  // namespace odekernel

#endif  // ODEKERNEL_MODELS_HPP
