#include "odekernel/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "odekernel/errors.hpp"

namespace odekernel {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a number");
  }
  return value;
}

long long parse_integer(const std::string& key, const std::string& text) {
  long long value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("key '" + key + "': '" + text + "' is not an integer");
  }
  return value;
}

const std::set<std::string> kCommonKeys = {"model", "genes", "num_latent", "shared_variance",
                                           "seed", "threads", "out_dir"};
const std::set<std::string> kSimulateKeys = {"parameters", "initial_state", "t_start", "t_end", "n",
                                             "times", "sigma", "replicates", "substeps", "output"};
const std::set<std::string> kOptimizerKeys = {
    "max_iters",   "gradient_step", "restart_period",     "armijo_c1",           "max_backtracks",
    "num_starts",  "start_lower",   "start_upper",        "gradient_tolerance",  "objective_tolerance",
    "initial_point"};
const std::set<std::string> kFitKeys = {"data",     "lambda",  "lambda_grid",        "sigma_policy",
                                        "sigma2",   "smoothing_mu", "stencil",       "separate_blocks",
                                        "compute_covariance", "wald_level"};
const std::set<std::string> kBenchmarkKeys = {
    "parameters", "initial_state", "t_start",      "t_end",   "n",       "sigma",
    "replicates", "substeps",      "methods",      "lambda",  "lambda_grid", "sigma_policy",
    "stencil",    "smoothing_mu",  "separate_blocks", "timing"};

ModelChoice model_choice(const RunConfig& c) {
  ModelChoice m;
  m.name = c.get_string("model", m.name);
  if (!is_known_model(m.name)) {
    throw ConfigError("unknown model '" + m.name +
                      "' (expected exponential, lotka-volterra or tf-network)");
  }
  m.options.genes = c.get_int("genes", m.options.genes);
  m.options.num_latent = c.get_int("num_latent", m.options.num_latent);
  m.options.shared_variance = c.get_bool("shared_variance", m.options.shared_variance);
  if (m.options.genes < 1) throw ConfigError("genes must be >= 1");
  if (m.options.num_latent < 4) throw ConfigError("num_latent must be >= 4 for a cubic spline");
  return m;
}

OptimizerConfig optimizer_config(const RunConfig& c) {
  OptimizerConfig o;
  o.max_iters = c.get_int("max_iters", o.max_iters);
  o.gradient_step = c.get_double("gradient_step", o.gradient_step);
  o.restart_period = c.get_int("restart_period", o.restart_period);
  o.armijo_c1 = c.get_double("armijo_c1", o.armijo_c1);
  o.max_backtracks = c.get_int("max_backtracks", o.max_backtracks);
  o.num_starts = c.get_int("num_starts", o.num_starts);
  o.start_lower = c.get_vector("start_lower");
  o.start_upper = c.get_vector("start_upper");
  o.gradient_tolerance = c.get_double("gradient_tolerance", o.gradient_tolerance);
  o.objective_tolerance = c.get_double("objective_tolerance", o.objective_tolerance);
  if (c.has("initial_point")) o.initial_point = c.get_vector("initial_point");
  o.seed = c.get_uint64("seed", o.seed);
  if (o.max_iters < 1 || o.num_starts < 1 || o.max_backtracks < 0 || o.restart_period < 0) {
    throw ConfigError("max_iters and num_starts must be >= 1; max_backtracks, restart_period >= 0");
  }
  if (!(o.gradient_step > 0.0) || !(o.armijo_c1 > 0.0) || !(o.armijo_c1 < 1.0) ||
      !(o.gradient_tolerance > 0.0) || !(o.objective_tolerance > 0.0)) {
    throw ConfigError("optimizer tolerances must be positive (armijo_c1 in (0, 1))");
  }
  if (o.start_lower.size() != o.start_upper.size()) {
    throw ConfigError("start_lower and start_upper must have the same length");
  }
  if ((o.start_lower.array() > o.start_upper.array()).any()) {
    throw ConfigError("start_lower must not exceed start_upper");
  }
  return o;
}

SigmaPolicy parse_sigma_policy(const std::string& s) {
  if (s == "estimate") return SigmaPolicy::kEstimate;
  if (s == "shared") return SigmaPolicy::kEstimateShared;
  if (s == "known") return SigmaPolicy::kKnown;
  throw ConfigError("sigma_policy must be estimate, shared or known, got '" + s + "'");
}

Stencil parse_stencil(const std::string& s) {
  if (s == "central") return Stencil::kCentral;
  if (s == "half-span") return Stencil::kHalfSpan;
  throw ConfigError("stencil must be central or half-span, got '" + s + "'");
}

void read_fit_keys(const RunConfig& c, FitConfig& f) {
  f.lambda = c.get_optional_double("lambda");
  if (f.lambda && !(*f.lambda > 0.0 && std::isfinite(*f.lambda))) {
    throw ConfigError("lambda must be positive and finite");
  }
  if (c.has("lambda_grid")) f.lambda_grid = c.get_doubles("lambda_grid");
  if (f.lambda_grid.empty()) throw ConfigError("lambda_grid is empty");
  for (double l : f.lambda_grid) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("lambda_grid values must be positive");
  }
  if (c.has("sigma_policy")) f.sigma_policy = parse_sigma_policy(c.get_string("sigma_policy", ""));
  if (c.has("sigma2")) f.sigma2 = c.get_vector("sigma2");
  if (c.has("smoothing_mu")) {
    const double mu = c.get_double("smoothing_mu", 0.0);
    if (!(mu >= 0.0)) throw ConfigError("smoothing_mu must be >= 0");
    f.smoothing.mu = mu;
  }
  f.stencil = parse_stencil(c.get_string("stencil", "central"));
  f.separate_blocks = c.get_bool("separate_blocks", f.separate_blocks);
  f.compute_covariance = c.get_bool("compute_covariance", f.compute_covariance);
  f.wald_level = c.get_double("wald_level", f.wald_level);
  if (!(f.wald_level > 0.0 && f.wald_level < 1.0)) throw ConfigError("wald_level must be in (0, 1)");
  f.optimizer = optimizer_config(c);
  f.optimizer.threads = c.get_int("threads", 1);
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text, const std::string& source) {
  RunConfig c;
  c.source_ = source;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(number);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (c.values_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    c.values_[key] = value;
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.string());
}

void RunConfig::require_known(const std::set<std::string>& allowed, const std::string& command) const {
  for (const auto& [key, value] : values_) {
    if (!allowed.count(key)) {
      throw ConfigError(source_ + ": unknown key '" + key + "' for command '" + command + "'");
    }
  }
}

const std::string& RunConfig::raw(const std::string& key) const { return values_.at(key); }

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? parse_double(key, raw(key)) : fallback;
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const long long v = parse_integer(key, raw(key));
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError("key '" + key + "' is out of range");
  }
  return static_cast<int>(v);
}

std::uint64_t RunConfig::get_uint64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  std::uint64_t value = 0;
  const std::string& text = raw(key);
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a non-negative integer");
  }
  return value;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = raw(key);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

std::optional<double> RunConfig::get_optional_double(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return parse_double(key, raw(key));
}

std::vector<double> RunConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  if (!has(key) || raw(key).empty()) return out;
  for (const auto& item : split_list(raw(key))) out.push_back(parse_double(key, item));
  return out;
}

std::vector<int> RunConfig::get_ints(const std::string& key) const {
  std::vector<int> out;
  if (!has(key) || raw(key).empty()) return out;
  for (const auto& item : split_list(raw(key))) {
    out.push_back(static_cast<int>(parse_integer(key, item)));
  }
  return out;
}

std::vector<std::string> RunConfig::get_strings(const std::string& key) const {
  if (!has(key) || raw(key).empty()) return {};
  return split_list(raw(key));
}

Eigen::VectorXd RunConfig::get_vector(const std::string& key) const {
  const std::vector<double> v = get_doubles(key);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::set<std::string> allowed_keys(const std::string& command) {
  std::set<std::string> keys = kCommonKeys;
  const auto add = [&keys](const std::set<std::string>& more) { keys.insert(more.begin(), more.end()); };
  if (command == "simulate") {
    add(kSimulateKeys);
  } else if (command == "fit" || command == "select-lambda") {
    add(kFitKeys);
    add(kOptimizerKeys);
  } else if (command == "benchmark") {
    add(kBenchmarkKeys);
    add(kOptimizerKeys);
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  return keys;
}

SimulateSettings simulate_settings(const RunConfig& c) {
  c.require_known(allowed_keys("simulate"), "simulate");
  SimulateSettings s;
  s.model = model_choice(c);
  SimulationConfig& sim = s.simulation;
  sim.model = s.model.name;
  if (!c.has("parameters")) throw ConfigError("simulate needs 'parameters'");
  if (!c.has("initial_state")) throw ConfigError("simulate needs 'initial_state'");
  sim.parameters = c.get_vector("parameters");
  sim.initial_state = c.get_vector("initial_state");
  sim.t_start = c.get_double("t_start", sim.t_start);
  sim.t_end = c.get_double("t_end", sim.t_end);
  sim.n = c.get_int("n", sim.n);
  sim.times = c.get_vector("times");
  sim.sigma = c.get_double("sigma", sim.sigma);
  sim.replicates = c.get_int("replicates", sim.replicates);
  sim.seed = c.get_uint64("seed", sim.seed);
  sim.substeps = c.get_int("substeps", sim.substeps);
  s.output = c.get_string("output", s.output);
  s.out_dir = c.get_string("out_dir", ".");
  if (!(sim.sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
  if (sim.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (sim.substeps < 1) throw ConfigError("substeps must be >= 1");
  if (s.output.empty() || s.output.find('/') != std::string::npos) {
    throw ConfigError("output must be a plain file stem");
  }
  if (sim.times.size() == 0) {
    if (!(sim.t_end > sim.t_start)) throw ConfigError("t_end must exceed t_start");
    if (sim.n < 3) throw ConfigError("n must be >= 3");
  }
  return s;
}

FitSettings fit_settings(const RunConfig& c, const std::string& command) {
  c.require_known(allowed_keys(command), command);
  FitSettings s;
  s.model = model_choice(c);
  if (!c.has("data")) throw ConfigError(command + " needs 'data'");
  s.data = c.get_string("data", "");
  // Relative data paths resolve against the config file's directory.
  if (s.data.is_relative() && c.source() != "<config>") {
    s.data = std::filesystem::path(c.source()).parent_path() / s.data;
  }
  read_fit_keys(c, s.fit);
  s.out_dir = c.get_string("out_dir", ".");
  return s;
}

BenchmarkSettings benchmark_settings(const RunConfig& c) {
  c.require_known(allowed_keys("benchmark"), "benchmark");
  BenchmarkSettings s;
  s.model = model_choice(c);
  if (!c.has("parameters")) throw ConfigError("benchmark needs 'parameters'");
  if (!c.has("initial_state")) throw ConfigError("benchmark needs 'initial_state'");
  s.parameters = c.get_vector("parameters");
  s.initial_state = c.get_vector("initial_state");
  s.t_start = c.get_double("t_start", s.t_start);
  s.t_end = c.get_double("t_end", s.t_end);
  if (c.has("n")) s.n_values = c.get_ints("n");
  if (c.has("sigma")) s.sigma_values = c.get_doubles("sigma");
  s.replicates = c.get_int("replicates", s.replicates);
  s.substeps = c.get_int("substeps", s.substeps);
  s.seed = c.get_uint64("seed", s.seed);
  s.threads = c.get_int("threads", s.threads);
  s.timing = c.get_bool("timing", s.timing);
  s.out_dir = c.get_string("out_dir", ".");
  if (c.has("methods")) {
    s.methods.clear();
    for (const auto& m : c.get_strings("methods")) {
      if (m == "rkhs") {
        s.methods.push_back(BenchmarkMethod::kRkhs);
      } else if (m == "mle") {
        s.methods.push_back(BenchmarkMethod::kMle);
      } else {
        throw ConfigError("methods entries must be rkhs or mle, got '" + m + "'");
      }
    }
    if (s.methods.empty()) throw ConfigError("methods is empty");
  }
  read_fit_keys(c, s.fit);
  s.fit.optimizer.threads = 1;
  if (!s.fit.sigma_policy) s.fit.sigma_policy = SigmaPolicy::kKnown;
  if (s.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (s.substeps < 1) throw ConfigError("substeps must be >= 1");
  if (!(s.t_end > s.t_start)) throw ConfigError("t_end must exceed t_start");
  if (s.n_values.empty() || s.sigma_values.empty()) throw ConfigError("n and sigma need values");
  for (int n : s.n_values) {
    if (n < 3) throw ConfigError("every n must be >= 3");
  }
  for (double sigma : s.sigma_values) {
    if (!(sigma >= 0.0)) throw ConfigError("every sigma must be >= 0");
  }
  return s;
}

}  // namespace odekernel
