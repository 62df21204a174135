#include <gtest/gtest.h>

#include <cmath>

#include "odekernel/errors.hpp"
#include "odekernel/simulate.hpp"

using namespace odekernel;

namespace {

SimulationConfig lotka_volterra_config(int n, double sigma) {
  SimulationConfig sim;
  sim.model = "lotka-volterra";
  sim.parameters = Eigen::Vector4d(0.2, 0.35, 0.7, 0.4);
  sim.initial_state = Eigen::Vector2d(1, 2);
  sim.t_end = 30;
  sim.n = n;
  sim.sigma = sigma;
  return sim;
}

SimulationConfig exponential_config(double sigma) {
  SimulationConfig sim;
  sim.parameters = Eigen::VectorXd::Constant(1, -2.0);
  sim.initial_state = Eigen::VectorXd::Constant(1, -1.0);
  sim.t_end = 2.0;
  sim.n = 10;
  sim.sigma = sigma;
  return sim;
}

}  // namespace

TEST(Rk4, ExponentialClosedForm) {
  const ModelSpec m = model_exponential();
  const TimeGrid grid = TimeGrid::uniform(0, 2, 10);
  const Eigen::MatrixXd x =
      integrate_rk4(m.vector_field, Eigen::VectorXd::Constant(1, -2.0), Eigen::VectorXd::Constant(1, -1.0), grid);
  for (Eigen::Index i = 0; i < grid.size(); ++i) EXPECT_NEAR(x(0, i), -std::exp(-2.0 * grid[i]), 1e-6);
  EXPECT_NEAR(x(0, 9), -std::exp(-4.0), 1e-8);
}

TEST(Rk4, ZeroFieldIsConstant) {
  const VectorField zero = [](double, const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::VectorXd::Zero(x.size()).eval();
  };
  const Eigen::MatrixXd x = integrate_rk4(zero, Eigen::VectorXd(), Eigen::Vector2d(3, -1), TimeGrid::uniform(0, 5, 7));
  for (Eigen::Index i = 0; i < 7; ++i) EXPECT_EQ(x.col(i), Eigen::VectorXd(Eigen::Vector2d(3, -1)));
}

TEST(Rk4, LotkaVolterraSubstepConvergence) {
  const ModelSpec m = model_lotka_volterra();
  const SimulationConfig sim = lotka_volterra_config(35, 0.0);
  const TimeGrid grid = sim.grid();
  const auto run = [&](int substeps) {
    return integrate_rk4(m.vector_field, sim.parameters, sim.initial_state, grid, substeps);
  };
  const Eigen::MatrixXd a = run(20);
  const Eigen::MatrixXd b = run(40);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-6);
  // Oscillates: x1 turns around at least twice.
  int turns = 0;
  for (Eigen::Index i = 1; i + 1 < grid.size(); ++i) {
    if ((a(0, i) - a(0, i - 1)) * (a(0, i + 1) - a(0, i)) < 0.0) ++turns;
  }
  EXPECT_GE(turns, 2);
}

TEST(Rk4, FourthOrderSelfConvergenceRatio) {
  const ModelSpec m = model_lotka_volterra();
  const SimulationConfig sim = lotka_volterra_config(8, 0.0);
  const auto run = [&](int substeps) {
    return integrate_rk4(m.vector_field, sim.parameters, sim.initial_state, sim.grid(), substeps);
  };
  const Eigen::MatrixXd h = run(2);
  const Eigen::MatrixXd h2 = run(4);
  const Eigen::MatrixXd h4 = run(8);
  const double ratio = (h - h2).cwiseAbs().maxCoeff() / (h2 - h4).cwiseAbs().maxCoeff();
  EXPECT_GE(ratio, 8.0);
  EXPECT_LE(ratio, 32.0);
}

TEST(Rk4, DivergenceIsReported) {
  const VectorField blowup = [](double, const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    return Eigen::VectorXd(x.array().square());
  };
  EXPECT_THROW(integrate_rk4(blowup, Eigen::VectorXd(), Eigen::VectorXd::Ones(1), TimeGrid::uniform(0, 10, 5)),
               IntegrationDivergedError);
}

TEST(Noise, ZeroSigmaIsIdentity) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 6);
  EXPECT_EQ(add_noise(x, TimeGrid::uniform(0, 1, 6), 0.0, 7).states, x);
}

TEST(Noise, VarianceWithinTwoPercent) {
  const int n = 100000;
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, n);
  const ObservationSet y = add_noise(x, TimeGrid::uniform(0, 1, n), 0.25, 11);
  const double mean = y.states.mean();
  const double var = (y.states.array() - mean).square().sum() / (n - 1);
  EXPECT_NEAR(var, 0.0625, 0.02 * 0.0625);
  EXPECT_NEAR(mean, 0.0, 0.01);
}

TEST(Noise, SeedsControlTheDraws) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 2000);
  const TimeGrid grid = TimeGrid::uniform(0, 1, 2000);
  const ObservationSet a = add_noise(x, grid, 1.0, 1);
  const ObservationSet b = add_noise(x, grid, 1.0, 1);
  const ObservationSet c = add_noise(x, grid, 1.0, 2);
  EXPECT_EQ(a.states, b.states);
  EXPECT_NE(a.states, c.states);
  EXPECT_NEAR(a.states.array().square().mean(), c.states.array().square().mean(), 0.15);
}

TEST(Simulate, ExponentialTruthAndGrid) {
  const SimulatedData d = simulate(model_exponential(), exponential_config(0.25), 1);
  EXPECT_EQ(d.observations.num_times(), 10);
  EXPECT_DOUBLE_EQ(d.observations.grid.back(), 2.0);
  EXPECT_NEAR(d.truth(0, 0), -1.0, 0.0);
  EXPECT_GT((d.observations.states - d.truth).norm(), 0.0);
}

TEST(Simulate, ExplicitTimesOverrideUniformGrid) {
  SimulationConfig sim = exponential_config(0.0);
  sim.times = Eigen::Vector3d(0.0, 0.5, 3.0);
  EXPECT_EQ(sim.grid().times(), sim.times);
}

TEST(Mle, NoiselessExponentialIsRecovered) {
  const SimulatedData d = simulate(model_exponential(), exponential_config(0.0), 1);
  OptimizerConfig config;
  config.num_starts = 3;
  config.start_lower = Eigen::VectorXd::Constant(1, -5.0);
  config.start_upper = Eigen::VectorXd::Constant(1, -0.1);
  const MleResult r = mle_fit(d.observations, model_exponential(), Eigen::VectorXd::Ones(1), config);
  EXPECT_NEAR(r.parameters[0], -2.0, 1e-4);
  EXPECT_NEAR(r.initial_state[0], -1.0, 1e-4);
}

TEST(Mle, NoiselessLotkaVolterraIsRecovered) {
  const ModelSpec m = model_lotka_volterra();
  const SimulatedData d = simulate(m, lotka_volterra_config(35, 0.0), 1);
  OptimizerConfig config;
  config.num_starts = 4;
  config.seed = 5;
  const MleResult r = mle_fit(d.observations, m, Eigen::VectorXd::Ones(2), config);
  EXPECT_LT((r.parameters - Eigen::Vector4d(0.2, 0.35, 0.7, 0.4)).cwiseAbs().maxCoeff(), 1e-3);
}
