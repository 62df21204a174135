#include "odekernel/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "odekernel/errors.hpp"

namespace odekernel {

double LatentInput::evaluate(const Eigen::VectorXd& params, double t) const {
  const double eta = basis_.evaluate(t).dot(params.segment(offset_, size()));
  return clamp_nonnegative ? std::max(eta, 0.0) : eta;
}

Eigen::VectorXd LatentInput::evaluate(const Eigen::VectorXd& params,
                                      const Eigen::VectorXd& points) const {
  Eigen::VectorXd eta = basis_.design(points) * params.segment(offset_, size());
  if (clamp_nonnegative) eta = eta.cwiseMax(0.0);
  return eta;
}

Eigen::VectorXd normalize_unit_range(const Eigen::VectorXd& v) {
  if (v.size() == 0) return v;
  const double lo = v.minCoeff();
  const double range = v.maxCoeff() - lo;
  if (!(range > 0.0)) return Eigen::VectorXd::Zero(v.size());
  return (v.array() - lo) / range;
}

int ModelSpec::parameter_index(const std::string& name) const {
  const auto it = std::find(parameter_names.begin(), parameter_names.end(), name);
  if (it == parameter_names.end()) {
    throw InvalidParameterError("model '" + this->name + "' has no parameter '" + name + "'");
  }
  return static_cast<int>(it - parameter_names.begin());
}

ModelSpec model_exponential() {
  ModelSpec m;
  m.name = "exponential";
  m.num_states = 1;
  m.parameter_names = {"theta"};
  m.parameter_kinds = {ParameterKind::kTheta};
  m.operator_orders = {2};
  m.operator_coefficients = [](int, const Eigen::VectorXd& p) {
    return Eigen::Vector2d(-p[0], 1.0).eval();
  };
  m.forcing = [](int, const Eigen::VectorXd&, const ForcingContext& ctx) {
    return Eigen::VectorXd::Zero(ctx.grid.size()).eval();
  };
  m.dependencies = {{0}};
  m.vector_field = [](double, const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
    return (p[0] * x).eval();
  };
  // The decay rates of interest are negative; the theta = 0 point is singular.
  m.start_lower = Eigen::VectorXd::Constant(1, -5.0);
  m.start_upper = Eigen::VectorXd::Constant(1, -0.1);
  return m;
}

ModelSpec model_lotka_volterra() {
  ModelSpec m;
  m.name = "lotka-volterra";
  m.num_states = 2;
  m.parameter_names = {"theta1", "beta1", "theta2", "beta2"};
  m.parameter_kinds = {ParameterKind::kTheta, ParameterKind::kBeta, ParameterKind::kTheta,
                       ParameterKind::kBeta};
  m.operator_orders = {2, 2};
  // First equation: D x1 - theta1 x1 = -beta1 x1' x2'.
  // Second equation: D x2 + theta2 x2 = +beta2 x1' x2'.
  m.operator_coefficients = [](int eq, const Eigen::VectorXd& p) {
    return eq == 0 ? Eigen::Vector2d(-p[0], 1.0).eval() : Eigen::Vector2d(p[2], 1.0).eval();
  };
  m.forcing = [](int eq, const Eigen::VectorXd& p, const ForcingContext& ctx) {
    const Eigen::VectorXd product =
        ctx.surrogate.row(0).transpose().cwiseProduct(ctx.surrogate.row(1).transpose());
    return eq == 0 ? (-p[1] * product).eval() : (p[3] * product).eval();
  };
  m.dependencies = {{0, 1}, {2, 3}};
  m.vector_field = [](double, const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
    Eigen::VectorXd dx(2);
    dx[0] = x[0] * (p[0] - p[1] * x[1]);
    dx[1] = -x[1] * (p[2] - p[3] * x[0]);
    return dx;
  };
  m.start_lower = Eigen::VectorXd::Zero(4);
  m.start_upper = Eigen::VectorXd::Ones(4);
  return m;
}

ModelSpec model_tf_network(int genes, bool shared_variance, double lower, double upper,
                           int num_latent) {
  if (genes < 1) throw InvalidParameterError("tf-network needs at least one gene");
  ModelSpec m;
  m.name = "tf-network";
  m.num_states = genes;
  m.shared_variance = shared_variance;
  for (int j = 0; j < genes; ++j) {
    m.parameter_names.push_back("theta_" + std::to_string(j + 1));
    m.parameter_kinds.push_back(ParameterKind::kTheta);
  }
  for (int j = 0; j < genes; ++j) {
    for (int k = 1; k <= 3; ++k) {
      m.parameter_names.push_back("beta" + std::to_string(k) + "_" + std::to_string(j + 1));
      m.parameter_kinds.push_back(ParameterKind::kBeta);
    }
  }
  const int offset = 4 * genes;
  for (int k = 0; k < num_latent; ++k) {
    m.parameter_names.push_back("a_" + std::to_string(k + 1));
    m.parameter_kinds.push_back(ParameterKind::kLatent);
  }
  m.operator_orders.assign(static_cast<std::size_t>(genes), 2);
  m.latent.emplace(SplineBasis::uniform(lower, upper, num_latent, 3), offset);

  m.operator_coefficients = [](int eq, const Eigen::VectorXd& p) {
    return Eigen::Vector2d(p[eq], 1.0).eval();
  };
  const LatentInput latent = *m.latent;
  m.forcing = [latent, genes](int eq, const Eigen::VectorXd& p, const ForcingContext& ctx) {
    const Eigen::VectorXd eta = latent.evaluate(p, ctx.grid.times());
    const double b1 = p[genes + 3 * eq];
    const double b2 = p[genes + 3 * eq + 1];
    const double b3 = p[genes + 3 * eq + 2];
    Eigen::VectorXd f(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double denom = b3 + eta[i];
      if (!(denom > kDivisionGuard)) {
        std::ostringstream msg;
        msg << "beta3_" << eq + 1 << " + eta(t) = " << denom << " at t = " << ctx.grid[i];
        throw DivisionGuardError(msg.str());
      }
      f[i] = b1 + b2 * eta[i] / denom;
    }
    return f;
  };
  for (int j = 0; j < genes; ++j) {
    std::vector<int> deps = {j, genes + 3 * j, genes + 3 * j + 1, genes + 3 * j + 2};
    for (int k = 0; k < num_latent; ++k) deps.push_back(offset + k);
    m.dependencies.push_back(std::move(deps));
  }
  m.vector_field = [latent, genes](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& p) {
    const double eta = latent.evaluate(p, t);
    Eigen::VectorXd dx(genes);
    for (int j = 0; j < genes; ++j) {
      const double b1 = p[genes + 3 * j];
      const double b2 = p[genes + 3 * j + 1];
      const double b3 = p[genes + 3 * j + 2];
      dx[j] = b1 + b2 * eta / (b3 + eta) - p[j] * x[j];
    }
    return dx;
  };
  m.start_lower = Eigen::VectorXd::Zero(m.num_parameters());
  m.start_upper = Eigen::VectorXd::Ones(m.num_parameters());
  return m;
}

bool is_known_model(const std::string& name) {
  return name == "exponential" || name == "lotka-volterra" || name == "tf-network";
}

ModelSpec make_model(const std::string& name, const TimeGrid& grid, const ModelOptions& options) {
  if (name == "exponential") return model_exponential();
  if (name == "lotka-volterra") return model_lotka_volterra();
  if (name == "tf-network") {
    return model_tf_network(options.genes, options.shared_variance, grid.front(), grid.back(),
                            options.num_latent);
  }
  throw ConfigError("unknown model '" + name +
                    "' (expected exponential, lotka-volterra or tf-network)");
}

std::vector<std::pair<int, int>> dependency_violations(const ModelSpec& model,
                                                       const Eigen::VectorXd& params,
                                                       const ForcingContext& ctx,
                                                       double perturbation) {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < model.num_states; ++j) {
    const auto& deps = model.dependencies[static_cast<std::size_t>(j)];
    const Eigen::VectorXd op0 = model.operator_coefficients(j, params);
    const Eigen::VectorXd f0 = model.forcing(j, params, ctx);
    for (int k = 0; k < model.num_parameters(); ++k) {
      if (std::find(deps.begin(), deps.end(), k) != deps.end()) continue;
      Eigen::VectorXd p = params;
      p[k] += perturbation * std::max(1.0, std::abs(p[k]));
      if (model.operator_coefficients(j, p) != op0 || model.forcing(j, p, ctx) != f0) {
        out.emplace_back(j, k);
      }
    }
  }
  return out;
}

}  // namespace odekernel
