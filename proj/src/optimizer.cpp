#include "odekernel/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "odekernel/errors.hpp"
#include "odekernel/likelihood.hpp"
#include "odekernel/parallel.hpp"
#include "odekernel/random.hpp"

namespace odekernel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, const Eigen::VectorXd& p) {
  const double v = f(p);
  return std::isnan(v) ? kInf : v;
}

}  // namespace

Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& p, double h,
                                   std::optional<double> f_at_p) {
  if (!(h > 0.0)) throw InvalidParameterError("gradient step must be positive");
  Eigen::VectorXd g(p.size());
  Eigen::VectorXd q = p;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double hk = h * std::max(1.0, std::abs(p[k]));
    q[k] = p[k] + hk;
    const double up = safe_eval(f, q);
    q[k] = p[k] - hk;
    const double down = safe_eval(f, q);
    q[k] = p[k];
    const bool up_ok = std::isfinite(up);
    const bool down_ok = std::isfinite(down);
    if (up_ok && down_ok) {
      g[k] = (up - down) / (2.0 * hk);
      continue;
    }
    if (!up_ok && !down_ok) {
      throw GradientUnavailableError(
          "objective is infinite on both sides of coordinate " + std::to_string(k),
          static_cast<int>(k));
    }
    if (!f_at_p) f_at_p = safe_eval(f, p);
    if (!std::isfinite(*f_at_p)) {
      throw GradientUnavailableError("objective is infinite at the gradient point",
                                     static_cast<int>(k));
    }
    g[k] = up_ok ? (up - *f_at_p) / hk : (*f_at_p - down) / hk;
  }
  return g;
}

Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& p) {
  const Eigen::Index dim = p.size();
  Eigen::VectorXd steps(dim);
  for (Eigen::Index k = 0; k < dim; ++k) steps[k] = std::max(1e-4, 1e-4 * std::abs(p[k]));

  // Gradient with the same per-coordinate steps as the outer difference.
  const auto gradient = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(dim);
    Eigen::VectorXd q = x;
    for (Eigen::Index k = 0; k < dim; ++k) {
      q[k] = x[k] + steps[k];
      const double up = safe_eval(f, q);
      q[k] = x[k] - steps[k];
      const double down = safe_eval(f, q);
      q[k] = x[k];
      g[k] = (up - down) / (2.0 * steps[k]);
    }
    return g;
  };

  Eigen::MatrixXd h(dim, dim);
  Eigen::VectorXd q = p;
  for (Eigen::Index k = 0; k < dim; ++k) {
    q[k] = p[k] + steps[k];
    const Eigen::VectorXd up = gradient(q);
    q[k] = p[k] - steps[k];
    const Eigen::VectorXd down = gradient(q);
    q[k] = p[k];
    h.col(k) = (up - down) / (2.0 * steps[k]);
  }
  return 0.5 * (h + h.transpose());
}

StartReport conjugate_gradient(const Objective& f, const Eigen::VectorXd& start,
                               const OptimizerConfig& config) {
  StartReport report;
  report.start = start;
  Eigen::VectorXd x = start;
  double fx = safe_eval(f, x);
  if (!std::isfinite(fx)) {
    report.final_point = x;
    report.final_value = kInf;
    report.gradient_norm = kInf;
    report.stop_reason = "infeasible start";
    return report;
  }

  const Eigen::Index dim = x.size();
  const int restart = config.restart_period > 0 ? config.restart_period
                                                : std::max<int>(10, static_cast<int>(dim));
  const auto converged_at = [&](double gnorm, double value) {
    return gnorm <= config.gradient_tolerance * std::max(1.0, std::abs(value));
  };

  Eigen::VectorXd g;
  try {
    g = numerical_gradient(f, x, config.gradient_step, fx);
  } catch (const GradientUnavailableError&) {
    report.final_point = x;
    report.final_value = fx;
    report.gradient_norm = kInf;
    report.stop_reason = "gradient unavailable";
    return report;
  }
  Eigen::VectorXd d = -g;
  bool steepest = true;
  double prev_decrease = 0.0;
  int since_restart = 0;
  int stalled = 0;
  report.stop_reason = "iteration budget exhausted";

  int it = 0;
  for (; it < config.max_iters; ++it) {
    if (converged_at(g.norm(), fx)) {
      report.converged = true;
      report.stop_reason = "gradient tolerance met";
      break;
    }
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      d = -g;
      slope = -g.squaredNorm();
      steepest = true;
      since_restart = 0;
    }

    // First trial step: unit-ish move on the first iteration, then the
    // quadratic interpolation through the last decrease.
    double alpha = prev_decrease > 0.0 ? std::min(1.0, 2.02 * prev_decrease / -slope)
                                       : std::min(1.0, 1.0 / d.lpNorm<Eigen::Infinity>());
    if (!(alpha > 0.0) || !std::isfinite(alpha)) alpha = 1.0 / d.lpNorm<Eigen::Infinity>();

    const double trial = alpha;

    // Armijo backtracking; +inf counts as a failed trial.
    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = kInf;
    for (int b = 0; b <= config.max_backtracks; ++b) {
      x_new = x + alpha * d;
      f_new = safe_eval(f, x_new);
      if (std::isfinite(f_new) && f_new <= fx + config.armijo_c1 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    // A first-trial acceptance may be far short of the minimum along d;
    // keep doubling while the objective keeps dropping.
    if (accepted && alpha == trial) {
      for (int b = 0; b < config.max_backtracks; ++b) {
        const Eigen::VectorXd x_far = x + 2.0 * alpha * d;
        const double f_far = safe_eval(f, x_far);
        if (!(std::isfinite(f_far) && f_far < f_new && f_far <= fx + config.armijo_c1 * 2.0 * alpha * slope)) break;
        alpha *= 2.0;
        x_new = x_far;
        f_new = f_far;
      }
    }
    // One interpolation step: the minimizer of the parabola through f(x),
    // the slope and the accepted point, kept only if it is lower still.
    if (accepted) {
      const double curvature = f_new - fx - alpha * slope;
      if (curvature > 0.0) {
        const double a_min = -slope * alpha * alpha / (2.0 * curvature);
        if (a_min > 0.1 * alpha && a_min < 10.0 * alpha && std::abs(a_min - alpha) > 1e-3 * alpha) {
          const Eigen::VectorXd x_int = x + a_min * d;
          const double f_int = safe_eval(f, x_int);
          if (std::isfinite(f_int) && f_int < f_new && f_int <= fx + config.armijo_c1 * a_min * slope) {
            alpha = a_min;
            x_new = x_int;
            f_new = f_int;
          }
        }
      }
    }
    if (!accepted) {
      if (!steepest) {
        d = -g;
        steepest = true;
        since_restart = 0;
        prev_decrease = 0.0;
        continue;
      }
      report.stop_reason = "line search failed";
      break;
    }

    const double decrease = fx - f_new;
    x = x_new;
    fx = f_new;
    Eigen::VectorXd g_new;
    try {
      g_new = numerical_gradient(f, x, config.gradient_step, fx);
    } catch (const GradientUnavailableError&) {
      report.stop_reason = "gradient unavailable";
      ++it;
      g = Eigen::VectorXd::Constant(dim, kInf);
      break;
    }

    stalled = decrease <= config.objective_tolerance * std::abs(fx) ? stalled + 1 : 0;
    // A stall along a conjugate direction gets one steepest-descent retry.
    if (stalled >= 2 && !steepest && !converged_at(g_new.norm(), fx)) {
      g = std::move(g_new);
      d = -g;
      steepest = true;
      since_restart = 0;
      prev_decrease = 0.0;
      stalled = 1;
      continue;
    }
    // Stalled along steepest descent too: the objective is flat to working
    // precision even if a badly scaled gradient is not yet small.
    if (stalled >= 2) {
      g = g_new;
      ++it;
      report.converged = true;
      report.stop_reason = converged_at(g.norm(), fx) ? "gradient tolerance met" : "objective tolerance met";
      break;
    }

    ++since_restart;
    double beta = g_new.dot(g_new - g) / g.squaredNorm();
    if (!(beta > 0.0) || since_restart >= restart) {
      beta = 0.0;
      since_restart = 0;
    }
    prev_decrease = decrease;
    d = -g_new + beta * d;
    steepest = beta == 0.0;
    g = std::move(g_new);
  }
  if (it >= config.max_iters && converged_at(g.norm(), fx)) {
    report.converged = true;
    report.stop_reason = "gradient tolerance met";
  }

  report.final_point = x;
  report.final_value = fx;
  report.gradient_norm = g.norm();
  report.iterations = it;
  return report;
}

std::vector<Eigen::VectorXd> start_points(int dim, const OptimizerConfig& config) {
  if (config.num_starts < 1) throw InvalidParameterError("need at least one start");
  Eigen::VectorXd lower = config.start_lower.size() ? config.start_lower : Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd upper = config.start_upper.size() ? config.start_upper : Eigen::VectorXd::Ones(dim);
  if (lower.size() != dim || upper.size() != dim) {
    throw InvalidParameterError("start box dimension does not match the problem");
  }
  std::vector<Eigen::VectorXd> starts;
  if (config.initial_point) {
    if (config.initial_point->size() != dim) {
      throw InvalidParameterError("initial point dimension does not match the problem");
    }
    starts.push_back(*config.initial_point);
  }
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(starts.size()) < config.num_starts) {
    Eigen::VectorXd p(dim);
    for (int k = 0; k < dim; ++k) p[k] = lower[k] + (upper[k] - lower[k]) * unit(rng);
    starts.push_back(std::move(p));
  }
  return starts;
}

OptimizationReport minimize(const Objective& f, int dim, const OptimizerConfig& config) {
  if (config.max_iters < 1 || !(config.gradient_step > 0.0) || !(config.armijo_c1 > 0.0) ||
      !(config.gradient_tolerance > 0.0) || !(config.objective_tolerance > 0.0)) {
    throw InvalidParameterError("optimizer tolerances and budgets must be positive");
  }
  const auto starts = start_points(dim, config);
  OptimizationReport report;
  report.starts.resize(starts.size());
  parallel_for(static_cast<int>(starts.size()), resolve_threads(config.threads), [&](int i) {
    report.starts[static_cast<std::size_t>(i)] =
        conjugate_gradient(f, starts[static_cast<std::size_t>(i)], config);
  });

  double best = kInf;
  for (std::size_t i = 0; i < report.starts.size(); ++i) {
    if (report.starts[i].final_value < best) {
      best = report.starts[i].final_value;
      report.best_start = static_cast<int>(i);
    }
  }
  // Among starts tied with the best value, report one that met the gradient test.
  if (report.best_start >= 0 && !report.starts[static_cast<std::size_t>(report.best_start)].converged) {
    const double tie = 1e-10 * std::max(1.0, std::abs(best));
    for (std::size_t i = 0; i < report.starts.size(); ++i) {
      if (report.starts[i].converged && report.starts[i].final_value <= best + tie) {
        report.best_start = static_cast<int>(i);
        break;
      }
    }
  }
  if (report.best_start < 0) {
    throw NoFeasibleStartError("all " + std::to_string(starts.size()) +
                               " starts landed where the objective is infinite");
  }
  const StartReport& winner = report.starts[static_cast<std::size_t>(report.best_start)];
  report.best_parameters = winner.final_point;
  report.best_value = winner.final_value;
  report.gradient_norm = winner.gradient_norm;
  report.converged = winner.converged;
  return report;
}

std::vector<ParameterBlock> separable_blocks(const std::vector<std::vector<int>>& dependencies,
                                             int num_parameters) {
  const int m = static_cast<int>(dependencies.size());
  // Union-find over equations, joined through shared parameters.
  std::vector<int> parent(static_cast<std::size_t>(m));
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  };
  std::vector<int> owner(static_cast<std::size_t>(num_parameters), -1);
  for (int j = 0; j < m; ++j) {
    for (int k : dependencies[static_cast<std::size_t>(j)]) {
      if (k < 0 || k >= num_parameters) throw InvalidParameterError("dependency index out of range");
      int& o = owner[static_cast<std::size_t>(k)];
      if (o < 0) {
        o = j;
      } else {
        parent[static_cast<std::size_t>(find(j))] = find(o);
      }
    }
  }
  std::vector<ParameterBlock> blocks;
  std::vector<int> block_of(static_cast<std::size_t>(m), -1);
  for (int j = 0; j < m; ++j) {
    const int root = find(j);
    if (block_of[static_cast<std::size_t>(root)] < 0) {
      block_of[static_cast<std::size_t>(root)] = static_cast<int>(blocks.size());
      blocks.emplace_back();
    }
    blocks[static_cast<std::size_t>(block_of[static_cast<std::size_t>(root)])].equations.push_back(j);
  }
  for (int k = 0; k < num_parameters; ++k) {
    const int o = owner[static_cast<std::size_t>(k)];
    if (o >= 0) {
      blocks[static_cast<std::size_t>(block_of[static_cast<std::size_t>(find(o))])].parameters.push_back(k);
    }
  }
  return blocks;
}

BlockFitReport block_separated_fit(const ProfileContext& ctx, const OptimizerConfig& config,
                                   bool allow_separation) {
  const ModelSpec& model = ctx.model();
  const int dim = model.num_parameters();
  BlockFitReport out;
  out.blocks = separable_blocks(model.dependencies, dim);

  const Eigen::VectorXd lower = config.start_lower.size() ? config.start_lower
                                : model.start_lower.size() ? model.start_lower
                                                           : Eigen::VectorXd::Zero(dim);
  const Eigen::VectorXd upper = config.start_upper.size() ? config.start_upper
                                : model.start_upper.size() ? model.start_upper
                                                           : Eigen::VectorXd::Ones(dim);

  if (!allow_separation || out.blocks.size() <= 1) {
    OptimizerConfig joint = config;
    joint.start_lower = lower;
    joint.start_upper = upper;
    out.combined = minimize([&](const Eigen::VectorXd& p) { return profile_objective(ctx, p); },
                            dim, joint);
    out.block_reports = {out.combined};
    if (out.blocks.size() > 1) {
      ParameterBlock all;
      for (int j = 0; j < model.num_states; ++j) all.equations.push_back(j);
      for (int k = 0; k < dim; ++k) all.parameters.push_back(k);
      out.blocks = {all};
    }
    return out;
  }

  out.separated = true;
  Eigen::VectorXd best = Eigen::VectorXd::Zero(dim);
  double total = 0.0;
  double grad_sq = 0.0;
  bool converged = true;
  for (std::size_t b = 0; b < out.blocks.size(); ++b) {
    const ParameterBlock& block = out.blocks[b];
    const int bdim = static_cast<int>(block.parameters.size());
    OptimizerConfig sub = config;
    sub.seed = split_seed(config.seed, b);
    sub.start_lower.resize(bdim);
    sub.start_upper.resize(bdim);
    if (config.initial_point) sub.initial_point = Eigen::VectorXd(bdim);
    for (int i = 0; i < bdim; ++i) {
      const int k = block.parameters[static_cast<std::size_t>(i)];
      sub.start_lower[i] = lower[k];
      sub.start_upper[i] = upper[k];
      if (config.initial_point) (*sub.initial_point)[i] = (*config.initial_point)[k];
    }
    const auto objective = [&](const Eigen::VectorXd& q) {
      Eigen::VectorXd full = Eigen::VectorXd::Zero(dim);
      for (int i = 0; i < bdim; ++i) full[block.parameters[static_cast<std::size_t>(i)]] = q[i];
      return profile_objective(ctx, full, block.equations);
    };
    OptimizationReport r = minimize(objective, bdim, sub);
    for (int i = 0; i < bdim; ++i) best[block.parameters[static_cast<std::size_t>(i)]] = r.best_parameters[i];
    total += r.best_value;
    grad_sq += r.gradient_norm * r.gradient_norm;
    converged = converged && r.converged;
    out.block_reports.push_back(std::move(r));
  }
  out.combined.best_parameters = best;
  out.combined.best_value = total;
  out.combined.gradient_norm = std::sqrt(grad_sq);
  out.combined.converged = converged;
  out.combined.best_start = 0;
  return out;
}

}  // namespace odekernel
