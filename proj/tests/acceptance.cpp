// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion ...]   (default: all eight)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "odekernel/benchmark.hpp"
#include "odekernel/commands.hpp"
#include "odekernel/fit.hpp"
#include "odekernel/likelihood.hpp"
#include "odekernel/operators.hpp"
#include "odekernel/random.hpp"
#include "odekernel/simulate.hpp"
#include "test_support.hpp"

using namespace odekernel;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::string vec(const Eigen::VectorXd& v) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt("%.4g", v[i]);
  return out + ")";
}

const Eigen::Vector4d kLotkaVolterra(0.2, 0.35, 0.7, 0.4);

// 1. Profiled objective against the explicit penalized likelihood.
Verdict oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  double worst = 0.0;
  for (int k = 0; k < 200 && checked < 150; ++k) {
    const int n = 4 + static_cast<int>(u(rng) * 9);
    const TimeGrid grid = fixtures::random_grid(rng, n);
    const double lambda = std::pow(10.0, -2.0 + 6.0 * u(rng));
    const bool lv = k % 2 == 1;
    const ModelSpec model = lv ? model_lotka_volterra() : model_exponential();
    const int m = model.num_states;
    Eigen::MatrixXd y(m, n);
    for (int j = 0; j < m; ++j) y.row(j) = (1.0 + fixtures::random_vector(rng, n, 0.3).array()).transpose();
    const Eigen::MatrixXd surrogate = y.array() + fixtures::random_vector(rng, 1, 0.1)[0];
    Eigen::VectorXd s2(m);
    for (int j = 0; j < m; ++j) s2[j] = 0.01 + u(rng);
    const ProfileContext ctx(ObservationSet(grid, y), surrogate, model, lambda, s2);
    Eigen::VectorXd p(model.num_parameters());
    for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = lv ? 0.1 + u(rng) : -0.2 - 3.0 * u(rng);
    const double value = profile_objective(ctx, p);
    if (!std::isfinite(value)) continue;
    const long double ref = fixtures::explicit_objective(ctx, p);
    const double gap = static_cast<double>(std::abs(value - ref) / std::max(std::abs(ref), 1e-300L));
    worst = std::max(worst, gap);
    ++checked;
  }
  const double elapsed = seconds_since(start);
  return {checked >= 100 && worst <= 1e-8 && elapsed < 10.0,
          std::to_string(checked) + " instances, max rel err " + fmt("%.2e", worst) + ", " +
              fmt("%.2f", elapsed) + " s"};
}

BenchmarkSettings exponential_study(int replicates) {
  BenchmarkSettings s;
  s.model.name = "exponential";
  s.parameters = Eigen::VectorXd::Constant(1, -2.0);
  s.initial_state = Eigen::VectorXd::Constant(1, -1.0);
  s.t_start = 0.0;
  s.t_end = 2.0;
  s.n_values = {10};
  s.sigma_values = {0.25};
  s.replicates = replicates;
  s.seed = 61;
  s.fit.sigma_policy = SigmaPolicy::kKnown;
  s.fit.optimizer.num_starts = 10;
  return s;
}

BenchmarkSettings lotka_volterra_study(std::vector<double> sigmas, int replicates,
                                       std::vector<BenchmarkMethod> methods) {
  BenchmarkSettings s;
  s.model.name = "lotka-volterra";
  s.parameters = kLotkaVolterra;
  s.initial_state = Eigen::Vector2d(1.0, 2.0);
  s.t_start = 0.0;
  s.t_end = 30.0;
  s.n_values = {35};
  s.sigma_values = std::move(sigmas);
  s.replicates = replicates;
  s.seed = 62;
  s.methods = std::move(methods);
  s.fit.lambda = 100.0;
  s.fit.sigma_policy = SigmaPolicy::kKnown;
  return s;
}

const MethodSummary* find_summary(const BenchmarkReport& r, int setting, BenchmarkMethod method) {
  for (const auto& s : r.summaries) {
    if (s.setting == setting && s.method == method) return &s;
  }
  return nullptr;
}

// 2. Small-sample bias of the exponential decay rate.
Verdict bias_study() {
  const auto start = Clock::now();
  const BenchmarkReport r = run_benchmark(exponential_study(500));
  const double elapsed = seconds_since(start);
  const MethodSummary* rk = find_summary(r, 0, BenchmarkMethod::kRkhs);
  const MethodSummary* ml = find_summary(r, 0, BenchmarkMethod::kMle);
  if (!rk || !ml || rk->completed == 0 || ml->completed == 0) return {false, "no completed replicates"};
  const double a = rk->mean_abs_error[0];
  const double b = ml->mean_abs_error[0];
  const bool ok = std::abs(a - 0.53) <= 0.15 && std::abs(b - 0.73) <= 0.25 && a < b && elapsed < 600.0;
  return {ok, "rkhs " + fmt("%.4f", a) + " (" + std::to_string(rk->completed) + " ok), mle " + fmt("%.4f", b) +
                  " (" + std::to_string(ml->completed) + " ok), " + fmt("%.0f", elapsed) + " s"};
}

// 3. Parameter MSEs of the two-species system at lambda = 100.
Verdict lotka_volterra_mse() {
  const auto start = Clock::now();
  const BenchmarkReport r = run_benchmark(lotka_volterra_study({0.1, 0.25}, 100, {BenchmarkMethod::kRkhs}));
  const double elapsed = seconds_since(start);
  const Eigen::Vector4d expected[2] = {{0.0002, 0.0007, 0.0031, 0.0014}, {0.0010, 0.0017, 0.0111, 0.0038}};
  bool ok = elapsed < 1200.0;
  std::string detail;
  for (int s = 0; s < 2; ++s) {
    const MethodSummary* rk = find_summary(r, s, BenchmarkMethod::kRkhs);
    if (!rk || rk->completed == 0) return {false, "no completed replicates"};
    for (int k = 0; k < 4; ++k) {
      const double ratio = rk->mse[k] / expected[s][k];
      ok = ok && ratio <= 3.0 && ratio >= 1.0 / 3.0;
    }
    detail += "sigma " + fmt("%.2g", r.settings[static_cast<std::size_t>(s)].sigma) + " mse " + vec(rk->mse) + "; ";
  }
  return {ok, detail + fmt("%.0f", elapsed) + " s"};
}

// 4. Wall clock of the profiled fit against the solver-in-the-loop fit.
Verdict speed() {
  const BenchmarkReport r =
      run_benchmark(lotka_volterra_study({0.1}, 15, {BenchmarkMethod::kRkhs, BenchmarkMethod::kMle}));
  const MethodSummary* rk = find_summary(r, 0, BenchmarkMethod::kRkhs);
  const MethodSummary* ml = find_summary(r, 0, BenchmarkMethod::kMle);
  if (!rk || !ml) return {false, "missing summaries"};
  const double ratio = ml->median_seconds / rk->median_seconds;
  return {ratio >= 10.0, "median rkhs " + fmt("%.3f", rk->median_seconds) + " s, mle " +
                             fmt("%.3f", ml->median_seconds) + " s, ratio " + fmt("%.1f", ratio)};
}

// |P x - f| over the size of the terms it balances; for a homogeneous
// equation f = 0 and the scale is |D x| instead.
double equation_mismatch(const FitResult& fit, const ModelSpec& model, const TimeGrid& grid, int j) {
  const auto d = build_difference_operator(grid);
  const auto p = build_operator_matrix(model.operator_coefficients(j, fit.parameters), d);
  const Eigen::VectorXd x = fit.states.row(j).transpose();
  const Eigen::VectorXd f = fit.forcing.row(j).transpose();
  return (p.matrix() * x - f).norm() / std::max(f.norm(), (d.matrix() * x).norm());
}

// 5. Huge lambda makes the reconstruction satisfy the discretized ODE.
Verdict large_lambda() {
  FitConfig config;
  config.lambda = 1e8;
  config.sigma_policy = SigmaPolicy::kKnown;
  config.sigma2 = Eigen::VectorXd::Ones(1);
  config.optimizer.num_starts = 3;
  config.optimizer.seed = 5;
  config.compute_covariance = false;
  double worst = 0.0;
  std::string detail;

  SimulationConfig sim;
  sim.parameters = Eigen::VectorXd::Constant(1, -2.0);
  sim.initial_state = Eigen::VectorXd::Constant(1, -1.0);
  sim.t_end = 2.0;
  sim.n = 10;
  const SimulatedData e = simulate(model_exponential(), sim, 1);
  const FitResult fe = fit_model(e.observations, model_exponential(), config);
  const double me = equation_mismatch(fe, model_exponential(), e.observations.grid, 0);
  worst = std::max(worst, me);
  detail += "exponential " + fmt("%.2e", me);

  sim.parameters = kLotkaVolterra;
  sim.initial_state = Eigen::Vector2d(1.0, 2.0);
  sim.t_end = 30.0;
  sim.n = 35;
  const SimulatedData l = simulate(model_lotka_volterra(), sim, 2);
  const FitResult fl = fit_model(l.observations, model_lotka_volterra(), config);
  for (int j = 0; j < 2; ++j) {
    const double mj = equation_mismatch(fl, model_lotka_volterra(), l.observations.grid, j);
    worst = std::max(worst, mj);
    detail += ", lv eq" + std::to_string(j + 1) + " " + fmt("%.2e", mj);
  }
  return {worst <= 1e-3, detail};
}

// 6. Latent regulator recovered from 17 synthetic target genes.
double regulator_truth(double t) {
  return 0.2 + std::exp(-std::pow((t - 21.0) / 3.0, 2)) + 0.8 * std::exp(-std::pow((t - 39.0) / 8.0, 2));
}

Verdict latent_recovery() {
  const auto start = Clock::now();
  const int genes = 17;
  const int coefficients = 15;
  const TimeGrid grid(std::vector<double>{16, 18, 20, 21, 22, 23, 24, 25, 39, 67});
  const ModelSpec model = model_tf_network(genes, true, grid.front(), grid.back(), coefficients);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd truth(model.num_parameters());
  for (int j = 0; j < genes; ++j) truth[j] = 0.5 + u(rng);
  for (int j = 0; j < genes; ++j) {
    truth[genes + 3 * j] = 0.2 + 0.8 * u(rng);
    truth[genes + 3 * j + 1] = 0.5 + u(rng);
    truth[genes + 3 * j + 2] = 1.0 + 2.0 * u(rng);
  }
  // The generating regulator is the least-squares projection of a smooth
  // two-pulse profile onto the model's own spline basis.
  const Eigen::VectorXd dense = Eigen::VectorXd::LinSpaced(400, grid.front(), grid.back());
  Eigen::VectorXd profile(dense.size());
  for (Eigen::Index i = 0; i < dense.size(); ++i) profile[i] = regulator_truth(dense[i]);
  truth.tail(coefficients) = model.latent->basis().design(dense).colPivHouseholderQr().solve(profile);
  Eigen::VectorXd x0(genes);
  for (int j = 0; j < genes; ++j) x0[j] = 0.5 + 2.5 * u(rng);

  SimulationConfig sim;
  sim.parameters = truth;
  sim.initial_state = x0;
  sim.times = grid.times();
  sim.sigma = std::sqrt(0.016);
  const SimulatedData data = simulate(model, sim, split_seed(3, 0));

  FitConfig config;
  config.lambda = 1.0;
  config.compute_covariance = false;
  config.optimizer.num_starts = 3;
  config.optimizer.seed = 7;
  config.optimizer.max_iters = 3000;
  const FitResult fit = fit_model(data.observations, model, config);

  Eigen::VectorXd reference(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) reference[i] = regulator_truth(grid[i]);
  const double corr = fixtures::pearson(normalize_unit_range(reference), *fit.latent);
  return {corr >= 0.9, "pearson " + fmt("%.4f", corr) + ", sigma2 " + fmt("%.4f", fit.sigma2[0]) + ", " +
                           fmt("%.0f", seconds_since(start)) + " s"};
}

// 7. Operator and smoother identities.
Verdict properties() {
  const auto start = Clock::now();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int failures = 0;
  int checks = 0;
  auto expect = [&](bool ok) {
    ++checks;
    if (!ok) ++failures;
  };
  for (int k = 0; k < 200; ++k) {
    const int n = 3 + static_cast<int>(u(rng) * 20);
    const TimeGrid grid = fixtures::random_grid(rng, n, -5.0 + 10.0 * u(rng));
    const Eigen::VectorXd& t = grid.times();
    const double a = -2.0 + 4.0 * u(rng);
    const double b = -2.0 + 4.0 * u(rng);

    // Every stencil differentiates linear functions exactly.
    for (Stencil s : {Stencil::kCentral, Stencil::kHalfSpan}) {
      const auto d = build_difference_operator(grid, s);
      const Eigen::VectorXd lin = (a * t.array() + b).matrix();
      double err = 0.0;
      const Eigen::VectorXd dl = d.matrix() * lin;
      for (int i = 0; i < n; ++i) {
        const bool interior = i > 0 && i < n - 1;
        const double want = s == Stencil::kHalfSpan && interior ? a / 2.0 : a;
        err = std::max(err, std::abs(dl[i] - want));
      }
      expect(err <= 1e-10 * (1.0 + std::abs(a)));
    }

    // Central differences are exact for quadratics on uniform interiors.
    {
      const TimeGrid uniform = TimeGrid::uniform(0.0, 1.0 + u(rng), n);
      const Eigen::VectorXd& tu = uniform.times();
      const Eigen::VectorXd q = (a * tu.array().square() + b * tu.array()).matrix();
      const Eigen::VectorXd dq = build_difference_operator(uniform).matrix() * q;
      double err = 0.0;
      for (int i = 1; i + 1 < n; ++i) err = std::max(err, std::abs(dq[i] - (2.0 * a * tu[i] + b)));
      expect(err <= 1e-9);
    }

    const auto d = build_difference_operator(grid);
    Eigen::VectorXd theta(1 + static_cast<int>(u(rng) * 2));
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = 0.3 + u(rng);
    const auto p = try_build_operator_matrix(theta, d);
    if (!p) continue;
    const Eigen::MatrixXd gram = p->matrix().transpose() * p->matrix();
    const Eigen::VectorXd x = fixtures::random_vector(rng, n);

    // |P x|^2 = x^T P^T P x.
    const double lhs = (p->matrix() * x).squaredNorm();
    expect(std::abs(lhs - x.dot(gram * x)) <= 1e-10 * std::max(1.0, lhs));

    // [I - (I + c K^-1)^-1] y = c (K + c I)^-1 y, written with K^-1 = P^T P.
    const double c = std::pow(10.0, -2.0 + 4.0 * u(rng));
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd left = x - (eye + c * gram).lu().solve(x);
    const Eigen::MatrixXd kernel = gram.inverse();
    const Eigen::VectorXd right = c * (kernel + c * eye).lu().solve(x);
    expect((left - right).norm() <= 1e-7 * std::max(1.0, right.norm()));
    expect(std::abs(penalized_quadratic_form(gram, x, c) - x.dot(left)) <=
           1e-9 * std::max(1.0, std::abs(x.dot(left))));

    // Effective degrees of freedom: n as lambda -> 0 and 0 as lambda -> infinity.
    const double small = effective_df(*p, 1e-12, 1.0);
    const double large = effective_df(*p, 1e14, 1.0);
    expect(std::abs(small - n) <= 1e-6 && large >= 0.0 && large <= 1e-3 * n);
    const double mid_lo = effective_df(*p, 0.1, 1.0);
    const double mid_hi = effective_df(*p, 10.0, 1.0);
    expect(mid_hi <= mid_lo && mid_lo <= n);
  }
  const double elapsed = seconds_since(start);
  return {failures == 0 && elapsed < 5.0, std::to_string(checks - failures) + "/" + std::to_string(checks) +
                                              " checks, " + fmt("%.2f", elapsed) + " s"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files[fs::relative(entry.path(), dir).string()] = slurp(entry.path());
  }
  return files;
}

// 8. Byte-identical outputs from repeated runs of each command.
Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "odekernel_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(root / name) << text;
    return root / name;
  };
  const fs::path sim = write("sim.cfg",
                             "model = lotka-volterra\nparameters = 0.2, 0.35, 0.7, 0.4\ninitial_state = 1, 2\n"
                             "t_end = 30\nn = 35\nsigma = 0.1\nseed = 11\noutput = lv\n");
  const fs::path fit = write("fit.cfg", "model = lotka-volterra\ndata = data/lv.csv\nnum_starts = 3\nseed = 4\n");
  const fs::path select = write("select.cfg",
                                "model = lotka-volterra\ndata = data/lv.csv\nnum_starts = 2\nseed = 4\n"
                                "lambda_grid = 1, 10, 100\n");
  const fs::path bench = write("bench.cfg",
                               "model = exponential\nparameters = -2\ninitial_state = -1\nt_end = 2\n"
                               "n = 10, 20\nsigma = 0.25\nreplicates = 4\nnum_starts = 3\nseed = 9\n");

  auto run = [&](const std::string& command, const fs::path& cfg, const fs::path& out, int threads) {
    CommandOptions options;
    options.config = cfg;
    options.out = out;
    if (threads > 1) {
      const fs::path threaded = write(cfg.stem().string() + "_t.cfg", slurp(cfg) + "threads = " +
                                                                          std::to_string(threads) + "\n");
      options.config = threaded;
    }
    std::ostringstream log;
    return run_command(command, options, log);
  };

  std::string detail;
  bool ok = run("simulate", sim, root / "data", 1) == kExitOk;
  const struct {
    const char* name;
    fs::path cfg;
    int threads;
  } commands[] = {{"simulate", sim, 1}, {"fit", fit, 1}, {"select-lambda", select, 1}, {"benchmark", bench, 2}};
  for (const auto& c : commands) {
    const fs::path a = root / (std::string(c.name) + "_a");
    const fs::path b = root / (std::string(c.name) + "_b");
    const int ca = run(c.name, c.cfg, a, 1);
    const int cb = run(c.name, c.cfg, b, c.threads);
    const bool same = ca == cb && fs::exists(a) && snapshot(a) == snapshot(b) && !snapshot(a).empty();
    ok = ok && same && (ca == kExitOk || ca == kExitNotConverged);
    detail += std::string(c.name) + (same ? " identical" : " DIFFERS") + "; ";
  }
  fs::remove_all(root);
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"profile oracle", oracle},
      {"bias study", bias_study},
      {"lotka-volterra mse", lotka_volterra_mse},
      {"speed direction", speed},
      {"large lambda", large_lambda},
      {"latent recovery", latent_recovery},
      {"property suites", properties},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    all = all && v.pass;
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", number, criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
