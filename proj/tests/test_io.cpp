#include <gtest/gtest.h>

#include "odekernel/config.hpp"
#include "odekernel/dataset.hpp"
#include "odekernel/errors.hpp"

using namespace odekernel;

TEST(RunConfig, ParsesKeysCommentsAndLists) {
  const RunConfig c = RunConfig::parse(
      "# comment\n"
      "model = lotka-volterra\n"
      "\n"
      "parameters = 0.2, 0.35,0.7 , 0.4   # trailing comment\n"
      "n = 35\n"
      "timing = true\n");
  EXPECT_EQ(c.get_string("model", ""), "lotka-volterra");
  EXPECT_EQ(c.get_vector("parameters"), Eigen::VectorXd(Eigen::Vector4d(0.2, 0.35, 0.7, 0.4)));
  EXPECT_EQ(c.get_int("n", 0), 35);
  EXPECT_TRUE(c.get_bool("timing", false));
  EXPECT_EQ(c.get_double("sigma", 0.5), 0.5);
  EXPECT_FALSE(c.get_optional_double("lambda").has_value());
}

TEST(RunConfig, RejectsMalformedInput) {
  EXPECT_THROW(RunConfig::parse("model\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("= 3\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("n = 3\nn = 4\n"), ConfigError);
  EXPECT_THROW(RunConfig::parse("n = 3.5\n").get_int("n", 0), ConfigError);
  EXPECT_THROW(RunConfig::parse("sigma = abc\n").get_double("sigma", 0), ConfigError);
  EXPECT_THROW(RunConfig::parse("timing = yes please\n").get_bool("timing", false), ConfigError);
  EXPECT_THROW(RunConfig::load("/nonexistent/odekernel.cfg"), ConfigError);
}

TEST(RunConfig, UnknownKeysAreRejectedPerCommand) {
  const RunConfig c = RunConfig::parse("model = exponential\ndata = x.csv\nreplicates = 3\n");
  EXPECT_THROW(fit_settings(c, "fit"), ConfigError);
  EXPECT_TRUE(allowed_keys("simulate").count("replicates"));
  EXPECT_FALSE(allowed_keys("fit").count("replicates"));
}

TEST(RunConfig, FitSettings) {
  const RunConfig c = RunConfig::parse(
      "model = lotka-volterra\ndata = d.csv\nlambda = 100\nsigma_policy = known\nsigma2 = 0.01\n"
      "stencil = half-span\nnum_starts = 4\nstart_lower = 0,0,0,0\nstart_upper = 1,1,1,1\n",
      "/tmp/cfg/run.cfg");
  const FitSettings s = fit_settings(c, "fit");
  EXPECT_EQ(s.model.name, "lotka-volterra");
  EXPECT_EQ(s.data, std::filesystem::path("/tmp/cfg/d.csv"));
  EXPECT_EQ(*s.fit.lambda, 100.0);
  EXPECT_EQ(*s.fit.sigma_policy, SigmaPolicy::kKnown);
  EXPECT_EQ(s.fit.stencil, Stencil::kHalfSpan);
  EXPECT_EQ(s.fit.optimizer.num_starts, 4);
  EXPECT_EQ(s.fit.optimizer.start_upper.size(), 4);
}

TEST(RunConfig, InvalidValuesAreRejected) {
  const auto fit = [](const std::string& extra) {
    return fit_settings(RunConfig::parse("model = exponential\ndata = d.csv\n" + extra), "fit");
  };
  EXPECT_THROW(fit("lambda = -1\n"), ConfigError);
  EXPECT_THROW(fit("lambda_grid = 1, 0\n"), ConfigError);
  EXPECT_THROW(fit("sigma_policy = guess\n"), ConfigError);
  EXPECT_THROW(fit("stencil = upwind\n"), ConfigError);
  EXPECT_THROW(fit("wald_level = 1.5\n"), ConfigError);
  EXPECT_THROW(fit("start_lower = 1\nstart_upper = 0\n"), ConfigError);
  EXPECT_THROW(fit_settings(RunConfig::parse("model = logistic\ndata = d.csv\n"), "fit"), ConfigError);
  EXPECT_THROW(fit_settings(RunConfig::parse("model = exponential\n"), "fit"), ConfigError);
}

TEST(RunConfig, SimulateAndBenchmarkSettings) {
  const SimulateSettings sim = simulate_settings(RunConfig::parse(
      "model = exponential\nparameters = -2\ninitial_state = -1\nt_end = 2\nn = 10\nsigma = 0.25\nseed = 1\n"));
  EXPECT_EQ(sim.simulation.n, 10);
  EXPECT_EQ(sim.simulation.seed, 1u);
  EXPECT_EQ(sim.output, "data");
  EXPECT_THROW(simulate_settings(RunConfig::parse("model = exponential\ninitial_state = -1\n")), ConfigError);

  const BenchmarkSettings b = benchmark_settings(RunConfig::parse(
      "model = lotka-volterra\nparameters = 0.2,0.35,0.7,0.4\ninitial_state = 1,2\nt_end = 30\n"
      "n = 35, 70\nsigma = 0.1, 0.25\nreplicates = 5\nmethods = rkhs\n"));
  EXPECT_EQ(b.n_values, (std::vector<int>{35, 70}));
  EXPECT_EQ(b.sigma_values, (std::vector<double>{0.1, 0.25}));
  EXPECT_EQ(b.methods, std::vector<BenchmarkMethod>{BenchmarkMethod::kRkhs});
  EXPECT_EQ(*b.fit.sigma_policy, SigmaPolicy::kKnown);
  EXPECT_FALSE(b.timing);
}

TEST(Dataset, RoundTripsExactly) {
  const TimeGrid grid(std::vector<double>{0.0, 0.1, 0.30000000000000004});
  Eigen::MatrixXd states(2, 3);
  states << 1.0 / 3.0, -2.5e-17, 7.0, 1e300, 0.0, -0.125;
  Eigen::MatrixXd inputs(1, 3);
  inputs << 5, 6, 7;
  const std::string text = format_dataset(grid, states, inputs);
  EXPECT_EQ(text.substr(0, text.find('\n')), "time,state_1,state_2,input_1");
  const ObservationSet back = parse_dataset(text);
  EXPECT_EQ(back.grid.times(), grid.times());
  EXPECT_EQ(back.states, states);
  EXPECT_EQ(back.inputs, inputs);
  EXPECT_EQ(format_dataset(back.grid, back.states, back.inputs), text);
}

TEST(Dataset, SchemaViolations) {
  const std::string ok = "time,state_1\n0,1\n1,2\n2,3\n";
  EXPECT_NO_THROW(parse_dataset(ok));
  EXPECT_THROW(parse_dataset(""), SchemaError);
  EXPECT_THROW(parse_dataset("t,state_1\n0,1\n1,2\n2,3\n"), SchemaError);
  EXPECT_THROW(parse_dataset("time,input_1\n0,1\n1,2\n2,3\n"), SchemaError);
  EXPECT_THROW(parse_dataset("time,state_2\n0,1\n1,2\n2,3\n"), SchemaError);
  EXPECT_THROW(parse_dataset("time,state_1\n0,1\n1,\n2,3\n"), SchemaError);
  EXPECT_THROW(parse_dataset("time,state_1\n0,1\n1,nan\n2,3\n"), SchemaError);
  EXPECT_THROW(parse_dataset("time,state_1\n0,1\n1,2,3\n2,3\n"), SchemaError);
  EXPECT_THROW(parse_dataset("time,state_1\n0,1\n0,2\n2,3\n"), SchemaError);
  EXPECT_THROW(parse_dataset("time,state_1\n0,1\n\n1,2\n2,3\n"), SchemaError);
  EXPECT_THROW(parse_dataset("time,state_1\n0,1\n1,2\n"), SchemaError);
  EXPECT_THROW(read_dataset("/nonexistent/data.csv"), SchemaError);
}

TEST(Dataset, ToleratesCrlf) {
  const ObservationSet obs = parse_dataset("time,state_1\r\n0,1\r\n1,2\r\n2,3\r\n");
  EXPECT_EQ(obs.num_times(), 3);
}
