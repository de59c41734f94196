#include "cgp/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cgp/error.hpp"
#include "cgp/model.hpp"
#include "cgp/rng.hpp"
#include "cgp/testfunctions.hpp"
#include "cgp/tuning.hpp"
#include "parallel.hpp"

namespace cgp {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe out;
  if (v.empty()) return out;
  const double n = static_cast<double>(v.size());
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

double median(std::vector<double> v) { return empirical_quantile(v, 0.5); }

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string format_x(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Stream for replication `rep` of item `item`; every replication owns an
// independent stream regardless of scheduling.
RngStream rep_stream(std::uint64_t seed, std::uint64_t item, std::uint64_t rep) {
  return RngStream(seed).split(item).split(rep);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Probability level -> standard normal quantile, by bisection on erfc.
double normal_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct Sample {
  Matrix x;
  Vector y;
};

Sample draw_sample(const TestFunction& tf, Index n, double noise, RngStream& rng) {
  Sample s{Matrix(n, tf.dim), Vector(n)};
  std::vector<double> x(tf.dim);
  for (Index i = 0; i < n; ++i) {
    for (int m = 0; m < tf.dim; ++m) {
      // (lower, upper]
      x[m] = tf.lower[m] + (tf.upper[m] - tf.lower[m]) * rng.uniform_open_low();
      s.x(i, m) = x[m];
    }
    s.y[i] = tf(x) + noise * rng.normal();
  }
  return s;
}

ShapeConstraint constraint_for(const ExperimentConfig& c, const TestFunction& tf) {
  return c.constraint.empty() ? tf.shape : parse_constraint(c.constraint);
}

std::vector<std::string> function_list(const ExperimentConfig& c, std::vector<std::string> defaults) {
  if (c.function.empty()) return defaults;
  find_test_function(c.function);
  return {c.function};
}

ModelOptions model_options(const ExperimentConfig& c, const TestFunction& tf, std::vector<double> theta, int grid_n,
                           double noise, bool center) {
  ModelOptions o;
  o.constraint = constraint_for(c, tf);
  o.family = parse_kernel_family(c.kernel);
  o.variance = c.variance;
  o.lengthscales = std::move(theta);
  o.subdivisions = grid_n;
  o.domain = DomainMap(tf.lower, tf.upper);
  o.noise_sd = noise;
  o.center = center;
  return o;
}

// Lengthscales for a test function: explicit config, cross-validation on
// an independent sample, or the built-in defaults.
std::vector<double> pick_theta(const ExperimentConfig& c, const TestFunction& tf, int grid_n, Index n, double noise,
                               std::uint64_t item) {
  if (c.cv) {
    RngStream rng = RngStream(c.seed).split(item).split(~std::uint64_t{0});
    const Sample s = draw_sample(tf, n, noise, rng);
    const ModelOptions o = model_options(c, tf, tf.default_theta, grid_n, noise, c.center);
    const DomainMap domain(tf.lower, tf.upper);
    ObservationSet data;
    data.inputs = Matrix(n, tf.dim);
    std::vector<double> x(tf.dim);
    for (Index i = 0; i < n; ++i) {
      for (int m = 0; m < tf.dim; ++m) x[m] = s.x(i, m);
      const auto u = domain.to_unit(x);
      for (int m = 0; m < tf.dim; ++m) data.inputs(i, m) = u[m];
    }
    data.values = (s.y.array() - (c.center ? s.y.mean() : 0.0)).matrix();
    data.noise_sd = noise;
    CvConfig cv = CvConfig::default_grid(tf.dim);
    cv.variance = c.variance;
    cv.threads = c.threads;
    const ModelKind kind = default_model_kind(o.constraint, tf.dim);
    const KernelSpec k = cv_select(kind, KnotGrid(tf.dim, grid_n), o.family, data, cv);
    std::vector<double> theta(tf.dim);
    for (int m = 0; m < tf.dim; ++m) theta[m] = k.lengthscales()[m] * (tf.upper[m] - tf.lower[m]);
    return theta;
  }
  if (!c.theta.empty()) {
    if (static_cast<int>(c.theta.size()) == tf.dim) return c.theta;
    if (c.theta.size() == 1) return std::vector<double>(tf.dim, c.theta[0]);
    throw ConfigurationError("theta must have one value or one per input dimension");
  }
  return tf.default_theta;
}

template <typename Body>
void run_replications(const ExperimentConfig& c, const std::string& label, std::size_t count, Body&& body) {
  detail::parallel_for(count, c.threads, [&](std::size_t r) {
    try {
      body(r);
    } catch (const Error& e) {
      rethrow_with_context(e, label + " replication " + std::to_string(r));
    }
  });
}

void add_row(ResultTable& t, const std::string& f, const std::string& est, const std::string& metric, double value,
             double se, long reps, std::uint64_t seed) {
  t.rows.push_back({f, est, metric, value, se, reps, seed});
}

double rmse(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

int shape_probes(int dim, int grid_n) { return dim == 1 ? 1000 : 10 * grid_n + 1; }

json theta_json(const std::vector<double>& t) { return json(t); }

}  // namespace

void ExperimentConfig::validate() const {
  if (replications < 1) throw ConfigurationError("replications must be >= 1");
  if (samples < 1) throw ConfigurationError("samples must be >= 1");
  if (grid_n && *grid_n < 1) throw ConfigurationError("grid_n must be >= 1");
  if (n && *n < 1) throw ConfigurationError("n must be >= 1");
  if (noise && !(*noise >= 0.0)) throw ConfigurationError("noise must be >= 0");
  if (!(variance > 0.0)) throw ConfigurationError("variance must be positive");
  for (double t : theta)
    if (!(t > 0.0)) throw ConfigurationError("theta values must be positive");
  if (!(level >= 0.0 && level <= 1.0)) throw ConfigurationError("level must lie in [0, 1]");
  if (!(holdout >= 0.0 && holdout < 1.0)) throw ConfigurationError("holdout must lie in [0, 1)");
  for (int s : sizes)
    if (s < 1) throw ConfigurationError("sizes must be >= 1");
  if (lower.size() != upper.size()) throw ConfigurationError("lower and upper must have the same length");
  for (std::size_t m = 0; m < lower.size(); ++m)
    if (!(upper[m] > lower[m])) throw ConfigurationError("upper must exceed lower");
  if (!constraint.empty()) parse_constraint(constraint).validate();
  parse_kernel_family(kernel);
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what(), 0);
  }
  if (!j.is_object()) throw ParseError("config: top-level value must be an object", 0);
  ExperimentConfig c;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const json& v = it.value();
      if (k == "function") c.function = v.get<std::string>();
      else if (k == "dataset") c.dataset = v.get<std::string>();
      else if (k == "constraint") c.constraint = v.get<std::string>();
      else if (k == "kernel") c.kernel = v.get<std::string>();
      else if (k == "variance") c.variance = v.get<double>();
      else if (k == "theta") c.theta = v.get<std::vector<double>>();
      else if (k == "cv") c.cv = v.get<bool>();
      else if (k == "grid_n") c.grid_n = v.get<int>();
      else if (k == "n") c.n = v.get<int>();
      else if (k == "noise") c.noise = v.get<double>();
      else if (k == "replications") c.replications = v.get<int>();
      else if (k == "samples") c.samples = v.get<int>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "out") c.out = v.get<std::string>();
      else if (k == "center") c.center = v.get<bool>();
      else if (k == "level") c.level = v.get<double>();
      else if (k == "sizes") c.sizes = v.get<std::vector<int>>();
      else if (k == "points") c.points = v.get<std::vector<double>>();
      else if (k == "holdout") c.holdout = v.get<double>();
      else if (k == "holdout_index") c.holdout_index = v.get<std::string>();
      else if (k == "lower") c.lower = v.get<std::vector<double>>();
      else if (k == "upper") c.upper = v.get<std::vector<double>>();
      else if (k == "threads") c.threads = v.get<unsigned>();
      else throw ConfigurationError("config: unknown field '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string to_json(const ExperimentConfig& c) {
  json j;
  j["function"] = c.function;
  j["dataset"] = c.dataset;
  j["constraint"] = c.constraint;
  j["kernel"] = c.kernel;
  j["variance"] = c.variance;
  j["theta"] = c.theta;
  j["cv"] = c.cv;
  j["grid_n"] = c.grid_n ? json(*c.grid_n) : json(nullptr);
  j["n"] = c.n ? json(*c.n) : json(nullptr);
  j["noise"] = c.noise ? json(*c.noise) : json(nullptr);
  j["replications"] = c.replications;
  j["samples"] = c.samples;
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["center"] = c.center;
  j["level"] = c.level;
  j["sizes"] = c.sizes;
  j["points"] = c.points;
  j["holdout"] = c.holdout;
  j["holdout_index"] = c.holdout_index;
  j["lower"] = c.lower;
  j["upper"] = c.upper;
  j["threads"] = c.threads;
  // Unset optionals are omitted so the text parses back.
  for (const char* k : {"grid_n", "n", "noise"})
    if (j[k].is_null()) j.erase(k);
  return j.dump();
}

const ResultRow& ResultTable::find(const std::string& function, const std::string& estimator,
                                   const std::string& metric) const {
  for (const auto& r : rows)
    if (r.function == function && r.estimator == estimator && r.metric == metric) return r;
  throw ArgumentError("no result row " + function + "/" + estimator + "/" + metric + " in table " + name);
}

ResultTable run_rmse_benchmark(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = Clock::now();
  ResultTable table;
  table.name = "rmse";
  const Index n = c.n.value_or(100);
  const double noise = c.noise.value_or(1.0);
  const int grid_n = c.grid_n.value_or(50);
  const auto ids = function_list(c, test_function_ids_1d());
  json log = json::object();

  for (std::size_t fi = 0; fi < ids.size(); ++fi) {
    const TestFunction& tf = find_test_function(ids[fi]);
    if (tf.dim != 1) throw ConfigurationError("rmse-bench needs a 1-D test function");
    const auto theta = pick_theta(c, tf, grid_n, n, noise, fi);
    const Model centered(model_options(c, tf, theta, grid_n, noise, true));
    const Model plain(model_options(c, tf, theta, grid_n, noise, false));

    Matrix probes(100, 1);
    std::vector<double> truth(100);
    for (int i = 0; i < 100; ++i) {
      probes(i, 0) = tf.lower[0] + (tf.upper[0] - tf.lower[0]) * (i + 1) / 100.0;
      truth[i] = tf(probes(i, 0));
    }

    const std::size_t reps = c.replications;
    std::vector<double> map_c(reps), map_u(reps), free_c(reps), iters(reps);
    std::vector<int> bad(reps);
    run_replications(c, tf.id, reps, [&](std::size_t r) {
      RngStream rng = rep_stream(c.seed, fi, r);
      const Sample s = draw_sample(tf, n, noise, rng);
      Model a = centered;
      a.fit(s.x, s.y);
      Model b = plain;
      b.fit(s.x, s.y);
      map_c[r] = 100.0 * rmse(a.predict_map(probes), truth);
      free_c[r] = 100.0 * rmse(a.predict_unconstrained(probes), truth);
      map_u[r] = 100.0 * rmse(b.predict_map(probes), truth);
      iters[r] = static_cast<double>(a.mode().iterations);
      const int probes_shape = shape_probes(1, grid_n);
      bad[r] = (a.map_satisfies_shape(probes_shape) ? 0 : 1) + (b.map_satisfies_shape(probes_shape) ? 0 : 1);
    });

    const long R = static_cast<long>(reps);
    const auto mc = mean_se(map_c), mu = mean_se(map_u), fc = mean_se(free_c);
    add_row(table, tf.id, "map", "rmse_x100", mc.mean, mc.se, R, c.seed);
    add_row(table, tf.id, "map_uncentered", "rmse_x100", mu.mean, mu.se, R, c.seed);
    add_row(table, tf.id, "unconstrained", "rmse_x100", fc.mean, fc.se, R, c.seed);
    add_row(table, tf.id, "map", "shape_violations", std::accumulate(bad.begin(), bad.end(), 0), 0.0, R, c.seed);
    add_row(table, tf.id, "map", "theta", theta[0], 0.0, R, c.seed);
    log[tf.id] = {{"theta", theta_json(theta)}, {"mean_qp_iterations", mean_se(iters).mean}};
  }
  table.wall_seconds = seconds_since(t0);
  table.log_json = log.dump();
  return table;
}

ResultTable run_coverage_benchmark(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = Clock::now();
  ResultTable table;
  table.name = "coverage";
  const TestFunction& tf = find_test_function(c.function.empty() ? "sinusoidal" : c.function);
  if (tf.dim != 1) throw ConfigurationError("coverage-bench needs a 1-D test function");
  const Index n = c.n.value_or(100);
  const double noise = c.noise.value_or(1.0);
  const int grid_n = c.grid_n.value_or(50);
  const std::vector<double> xs =
      c.points.empty() ? std::vector<double>{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0} : c.points;
  const auto theta = pick_theta(c, tf, grid_n, n, noise, 0);
  const Model base(model_options(c, tf, theta, grid_n, noise, c.center));
  const KernelSpec exact = base.unit_kernel();
  const double z = normal_quantile(0.5 + 0.5 * c.level);

  const Index P = static_cast<Index>(xs.size());
  Matrix probes(P, 1);
  for (Index k = 0; k < P; ++k) probes(k, 0) = xs[k];
  const Matrix probes_unit = base.to_unit(probes);

  const std::size_t reps = c.replications;
  Matrix hit_band = Matrix::Zero(reps, P), hit_krig = Matrix::Zero(reps, P);
  std::vector<double> accept(reps);
  std::vector<int> bad(reps);
  run_replications(c, tf.id, reps, [&](std::size_t r) {
    RngStream rng = rep_stream(c.seed, 0, r);
    const Sample s = draw_sample(tf, n, noise, rng);
    Model m = base;
    m.fit(s.x, s.y);
    bad[r] = m.map_satisfies_shape(shape_probes(1, grid_n)) ? 0 : 1;
    const SampleBatch batch = m.sample(c.samples, rng.split(1).seed());
    accept[r] = batch.acceptance_rate;
    const auto [lo, hi] = m.band(batch, probes, c.level);

    const double off = c.center ? s.y.mean() : 0.0;
    const Matrix xu = m.to_unit(s.x);
    const Vector yc = (s.y.array() - off).matrix();
    const auto krig = reference_kriging(exact, xu, yc, noise, probes_unit);
    for (Index k = 0; k < P; ++k) {
      const double f = tf(xs[k]);
      hit_band(r, k) = (lo[k] <= f && f <= hi[k]) ? 1.0 : 0.0;
      const double half = z * std::sqrt(std::max(krig[k].variance, 0.0));
      const double mk = off + krig[k].mean;
      hit_krig(r, k) = (mk - half <= f && f <= mk + half) ? 1.0 : 0.0;
    }
  });

  const long R = static_cast<long>(reps);
  for (Index k = 0; k < P; ++k) {
    const std::string metric = "coverage_pct@x=" + format_x(xs[k]);
    for (int e = 0; e < 2; ++e) {
      const double p = (e == 0 ? hit_band : hit_krig).col(k).mean();
      add_row(table, tf.id, e == 0 ? "map_band" : "kriging", metric, 100.0 * p,
              100.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(R)), R, c.seed);
    }
  }
  const auto acc = mean_se(accept);
  add_row(table, tf.id, "map_band", "acceptance_rate", acc.mean, acc.se, R, c.seed);
  add_row(table, tf.id, "map", "shape_violations", std::accumulate(bad.begin(), bad.end(), 0), 0.0, R, c.seed);
  add_row(table, tf.id, "map", "theta", theta[0], 0.0, R, c.seed);
  table.wall_seconds = seconds_since(t0);
  table.log_json = json{{"theta", theta_json(theta)}, {"samples", c.samples}, {"level", c.level}}.dump();
  return table;
}

ResultTable run_mse2d_benchmark(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = Clock::now();
  ResultTable table;
  table.name = "mse2d";
  const Index n = c.n.value_or(1024);
  const double noise = c.noise.value_or(0.1);
  const int grid_n = c.grid_n.value_or(kDefaultGrid2d);
  const auto ids = function_list(c, test_function_ids_2d());
  json log = json::object();

  Matrix probes(32 * 32, 2);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) {
      probes(32 * i + j, 0) = i / 31.0;
      probes(32 * i + j, 1) = j / 31.0;
    }

  for (std::size_t fi = 0; fi < ids.size(); ++fi) {
    const TestFunction& tf = find_test_function(ids[fi]);
    if (tf.dim != 2) throw ConfigurationError("mse2d-bench needs a 2-D test function");
    const auto theta = pick_theta(c, tf, grid_n, n, noise, fi);
    const Model base(model_options(c, tf, theta, grid_n, noise, c.center));
    std::vector<double> truth(probes.rows());
    for (Index k = 0; k < probes.rows(); ++k) {
      const double x[2] = {probes(k, 0), probes(k, 1)};
      truth[k] = tf(x);
    }
    auto mse = [&](const std::vector<double>& pred) {
      double s = 0.0;
      for (std::size_t k = 0; k < pred.size(); ++k) s += (pred[k] - truth[k]) * (pred[k] - truth[k]);
      return s / static_cast<double>(pred.size());
    };

    const std::size_t reps = c.replications;
    std::vector<double> map_mse(reps), free_mse(reps), iters(reps);
    std::vector<int> bad(reps);
    run_replications(c, tf.id, reps, [&](std::size_t r) {
      RngStream rng = rep_stream(c.seed, fi, r);
      const Sample s = draw_sample(tf, n, noise, rng);
      Model m = base;
      m.fit(s.x, s.y);
      map_mse[r] = 100.0 * mse(m.predict_map(probes));
      free_mse[r] = 100.0 * mse(m.predict_unconstrained(probes));
      iters[r] = static_cast<double>(m.mode().iterations);
      bad[r] = m.map_satisfies_shape(shape_probes(2, grid_n)) ? 0 : 1;
    });
    long wins = 0;
    for (std::size_t r = 0; r < reps; ++r) wins += map_mse[r] <= free_mse[r] ? 1 : 0;

    const long R = static_cast<long>(reps);
    const auto a = mean_se(map_mse), b = mean_se(free_mse);
    add_row(table, tf.id, "map", "mse_x100", a.mean, a.se, R, c.seed);
    add_row(table, tf.id, "unconstrained", "mse_x100", b.mean, b.se, R, c.seed);
    add_row(table, tf.id, "map", "dominance_fraction", static_cast<double>(wins) / R, 0.0, R, c.seed);
    add_row(table, tf.id, "map", "shape_violations", std::accumulate(bad.begin(), bad.end(), 0), 0.0, R, c.seed);
    add_row(table, tf.id, "map", "theta_1", theta[0], 0.0, R, c.seed);
    add_row(table, tf.id, "map", "theta_2", theta[1], 0.0, R, c.seed);
    log[tf.id] = {{"theta", theta_json(theta)}, {"mean_qp_iterations", mean_se(iters).mean}};
  }
  table.wall_seconds = seconds_since(t0);
  table.log_json = log.dump();
  return table;
}

ResultTable run_sample_size_sweep(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = Clock::now();
  ResultTable table;
  table.name = "sweep";
  const TestFunction& tf = find_test_function(c.function.empty() ? "logistic2" : c.function);
  if (tf.dim != 1) throw ConfigurationError("sweep needs a 1-D test function");
  const double noise = c.noise.value_or(0.5);
  const int grid_n = c.grid_n.value_or(50);
  const std::vector<int> sizes = c.sizes.empty() ? std::vector<int>{25, 50, 100, 160, 200, 400} : c.sizes;
  const Index cv_n = c.n.value_or(100);
  const auto theta = pick_theta(c, tf, grid_n, cv_n, noise, 0);
  const Model base(model_options(c, tf, theta, grid_n, noise, c.center));

  Matrix probes(100, 1);
  std::vector<double> truth(100);
  for (int i = 0; i < 100; ++i) {
    probes(i, 0) = tf.lower[0] + (tf.upper[0] - tf.lower[0]) * (i + 1) / 100.0;
    truth[i] = tf(probes(i, 0));
  }

  const long R = c.replications;
  int bad_total = 0;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const Index n = sizes[si];
    std::vector<double> map_r(R), free_r(R);
    std::vector<int> bad(R);
    run_replications(c, tf.id + " n=" + std::to_string(n), R, [&](std::size_t r) {
      // Seeds depend on n, not its position in the list.
      RngStream rng = rep_stream(c.seed, static_cast<std::uint64_t>(n), r);
      const Sample s = draw_sample(tf, n, noise, rng);
      Model m = base;
      m.fit(s.x, s.y);
      map_r[r] = rmse(m.predict_map(probes), truth);
      free_r[r] = rmse(m.predict_unconstrained(probes), truth);
      bad[r] = m.map_satisfies_shape(shape_probes(1, grid_n)) ? 0 : 1;
    });
    const std::string at = "@n=" + std::to_string(n);
    const auto a = mean_se(map_r), b = mean_se(free_r);
    add_row(table, tf.id, "map", "rmse" + at, a.mean, a.se, R, c.seed);
    add_row(table, tf.id, "map", "median_rmse" + at, median(map_r), 0.0, R, c.seed);
    add_row(table, tf.id, "unconstrained", "rmse" + at, b.mean, b.se, R, c.seed);
    bad_total += std::accumulate(bad.begin(), bad.end(), 0);
  }
  add_row(table, tf.id, "map", "shape_violations", bad_total, 0.0, R, c.seed);
  add_row(table, tf.id, "map", "theta", theta[0], 0.0, R, c.seed);
  table.wall_seconds = seconds_since(t0);
  table.log_json = json{{"theta", theta_json(theta)}, {"sizes", sizes}}.dump();
  return table;
}

double q_squared(const Vector& truth, const Vector& predicted) {
  if (truth.size() != predicted.size() || truth.size() == 0) throw ArgumentError("q_squared: size mismatch");
  const double ybar = truth.mean();
  const double num = (truth - predicted).squaredNorm();
  const double den = (truth.array() - ybar).matrix().squaredNorm();
  if (den == 0.0) throw ArgumentError("q_squared: constant holdout responses");
  return 1.0 - num / den;
}

Dataset parse_dataset_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  std::size_t width = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = s.find(',', start);
      out.push_back(s.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      const auto head = split(line);
      if (head.size() < 2) throw ParseError("dataset: header needs at least x1,y", 1);
      for (std::size_t k = 0; k + 1 < head.size(); ++k)
        if (head[k] != "x" + std::to_string(k + 1))
          throw ParseError("dataset: header column " + std::to_string(k + 1) + " must be x" + std::to_string(k + 1), 1);
      if (head.back() != "y") throw ParseError("dataset: last header column must be y", 1);
      width = head.size();
      continue;
    }
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != width)
      throw ParseError("dataset: expected " + std::to_string(width) + " fields, found " + std::to_string(cells.size()),
                       lineno);
    std::vector<double> row(width);
    for (std::size_t k = 0; k < width; ++k) {
      const std::string& cell = cells[k];
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      while (first < last && *first == ' ') ++first;
      while (last > first && last[-1] == ' ') --last;
      if (first < last && *first == '+') ++first;
      const auto res = std::from_chars(first, last, row[k]);
      if (res.ec != std::errc() || res.ptr != last || !std::isfinite(row[k]))
        throw ParseError("dataset: bad number '" + cell + "' in column " + std::to_string(k + 1), lineno);
    }
    rows.push_back(std::move(row));
  }
  if (lineno == 0) throw ParseError("dataset: empty file", 0);
  Dataset d{Matrix(rows.size(), width - 1), Vector(rows.size())};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k + 1 < width; ++k) d.inputs(i, k) = rows[i][k];
    d.values[i] = rows[i].back();
  }
  return d;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open dataset '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_dataset_csv(ss.str());
}

namespace {

std::vector<Index> read_index_file(const std::string& path, Index n) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open holdout index file '" + path + "'");
  std::vector<Index> idx;
  std::string line;
  long lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    long v = -1;
    const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
    if (res.ec != std::errc() || res.ptr != line.data() + line.size() || v < 0 || v >= n)
      throw ParseError("holdout index: bad row index '" + line + "'", lineno);
    idx.push_back(v);
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

Matrix take_rows(const Matrix& m, const std::vector<Index>& idx) {
  Matrix out(idx.size(), m.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(k) = m.row(idx[k]);
  return out;
}

Vector take(const Vector& v, const std::vector<Index>& idx) {
  Vector out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = v[idx[k]];
  return out;
}

struct PreparedDataset {
  std::string name;
  Dataset data;
  DomainMap domain = DomainMap::unit(1);
  std::vector<long> rejected_lines;
};

PreparedDataset prepare_dataset(const ExperimentConfig& c) {
  PreparedDataset p;
  p.name = std::filesystem::path(c.dataset).stem().string();
  const Dataset raw = read_dataset_csv(c.dataset);
  const Index d = raw.inputs.cols();
  if (raw.values.size() == 0) throw ParseError("dataset: no data rows", 0);
  std::vector<double> lo(d), hi(d);
  if (!c.lower.empty()) {
    if (static_cast<Index>(c.lower.size()) != d) throw ConfigurationError("lower/upper must have one entry per input");
    lo = c.lower;
    hi = c.upper;
  } else {
    for (Index m = 0; m < d; ++m) {
      lo[m] = raw.inputs.col(m).minCoeff();
      hi[m] = raw.inputs.col(m).maxCoeff();
      if (!(hi[m] > lo[m]))
        throw ConfigurationError("dataset: input x" + std::to_string(m + 1) + " is constant; give lower/upper");
    }
  }
  p.domain = DomainMap(lo, hi);
  std::vector<Index> keep;
  std::vector<double> x(d);
  for (Index i = 0; i < raw.inputs.rows(); ++i) {
    for (Index m = 0; m < d; ++m) x[m] = raw.inputs(i, m);
    if (p.domain.contains(x))
      keep.push_back(i);
    else
      p.rejected_lines.push_back(static_cast<long>(i) + 2);  // header is line 1
  }
  p.data = {take_rows(raw.inputs, keep), take(raw.values, keep)};
  return p;
}

ObservationSet unit_observations(const PreparedDataset& p, double noise, double offset) {
  ObservationSet o;
  const Index n = p.data.values.size(), d = p.data.inputs.cols();
  o.inputs.resize(n, d);
  std::vector<double> x(d);
  for (Index i = 0; i < n; ++i) {
    for (Index m = 0; m < d; ++m) x[m] = p.data.inputs(i, m);
    const auto u = p.domain.to_unit(x);
    for (Index m = 0; m < d; ++m) o.inputs(i, m) = u[m];
  }
  o.values = (p.data.values.array() - offset).matrix();
  o.noise_sd = noise;
  return o;
}

}  // namespace

ResultTable fit_csv(const ExperimentConfig& c) {
  c.validate();
  if (c.dataset.empty()) throw ConfigurationError("fit needs a dataset");
  const auto t0 = Clock::now();
  const PreparedDataset p = prepare_dataset(c);
  const Index n = p.data.values.size();
  const int d = static_cast<int>(p.data.inputs.cols());

  std::vector<Index> hold;
  if (!c.holdout_index.empty()) {
    hold = read_index_file(c.holdout_index, n);
  } else if (c.holdout > 0.0) {
    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), Index{0});
    RngStream rng(c.seed);
    for (Index i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    const Index h = std::max<Index>(1, static_cast<Index>(std::llround(c.holdout * n)));
    hold.assign(perm.begin(), perm.begin() + std::min(h, n - 1));
    std::sort(hold.begin(), hold.end());
  }
  std::vector<Index> train;
  for (Index i = 0, k = 0; i < n; ++i) {
    if (k < static_cast<Index>(hold.size()) && hold[k] == i) {
      ++k;
      continue;
    }
    train.push_back(i);
  }
  if (train.empty()) throw ConfigurationError("fit: the holdout leaves no training rows");
  const bool self_test = hold.empty();
  if (self_test) hold = train;

  ModelOptions o;
  o.constraint = c.constraint.empty() ? ShapeConstraint::unconstrained() : parse_constraint(c.constraint);
  o.family = parse_kernel_family(c.kernel);
  o.variance = c.variance;
  o.subdivisions = c.grid_n.value_or(d == 1 ? 50 : 20);
  o.domain = p.domain;
  o.noise_sd = c.noise.value_or(1e-6);
  o.center = c.center;

  const Matrix xtr = take_rows(p.data.inputs, train);
  const Vector ytr = take(p.data.values, train);
  if (!c.theta.empty() && !c.cv) {
    if (static_cast<int>(c.theta.size()) == d)
      o.lengthscales = c.theta;
    else if (c.theta.size() == 1)
      o.lengthscales.assign(d, c.theta[0]);
    else
      throw ConfigurationError("theta must have one value or one per input dimension");
  } else {
    PreparedDataset tr = p;
    tr.data = {xtr, ytr};
    const ObservationSet obs = unit_observations(tr, o.noise_sd, c.center ? ytr.mean() : 0.0);
    CvConfig cv = CvConfig::default_grid(d);
    cv.variance = c.variance;
    cv.threads = c.threads;
    const ModelKind kind = default_model_kind(o.constraint, d);
    const KernelSpec k = cv_select(kind, KnotGrid(d, o.subdivisions), o.family, obs, cv);
    o.lengthscales.resize(d);
    for (int m = 0; m < d; ++m) o.lengthscales[m] = k.lengthscales()[m] * p.domain.width(m);
  }

  Model model(o);
  model.fit(xtr, ytr);
  const Matrix xh = take_rows(p.data.inputs, hold);
  const Vector yh = take(p.data.values, hold);
  const auto pu = model.predict_unconstrained(xh);
  const auto pm = model.predict_map(xh);
  const Vector vu = Eigen::Map<const Vector>(pu.data(), pu.size());
  const Vector vm = Eigen::Map<const Vector>(pm.data(), pm.size());
  const double q_free = q_squared(yh, vu);
  const double q_map = q_squared(yh, vm);

  ResultTable table;
  table.name = "fit";
  add_row(table, p.name, "unconstrained", "q2", q_free, 0.0, 1, c.seed);
  add_row(table, p.name, "map", "q2", q_map, 0.0, 1, c.seed);
  add_row(table, p.name, "map", "n_train", static_cast<double>(train.size()), 0.0, 1, c.seed);
  add_row(table, p.name, "map", "n_holdout", static_cast<double>(hold.size()), 0.0, 1, c.seed);
  add_row(table, p.name, "map", "rejected_rows", static_cast<double>(p.rejected_lines.size()), 0.0, 1, c.seed);
  for (int m = 0; m < d; ++m)
    add_row(table, p.name, "map", "theta_" + std::to_string(m + 1), o.lengthscales[m], 0.0, 1, c.seed);

  const auto& post = model.posterior();
  const auto& mode = model.mode();
  json artifact;
  artifact["config"] = json::parse(to_json(c));
  artifact["model"] = {{"basis", std::string(to_string(model.kind()))},
                       {"constraint", to_string(o.constraint)},
                       {"kernel", std::string(to_string(o.family))},
                       {"variance", o.variance},
                       {"lengthscales", o.lengthscales},
                       {"grid_n", o.subdivisions},
                       {"noise", o.noise_sd},
                       {"lower", p.domain.lower()},
                       {"upper", p.domain.upper()},
                       {"offset", model.offset()}};
  artifact["coefficients"] = {{"zeta_unconstrained", std::vector<double>(post.mean.data(), post.mean.data() + post.mean.size())},
                              {"mu", std::vector<double>(mode.mu.data(), mode.mu.data() + mode.mu.size())}};
  artifact["gamma_cond_dims"] = {post.covariance.dim(), post.covariance.dim()};
  artifact["q2"] = {{"unconstrained", q_free}, {"map", q_map}, {"holdout_is_training", self_test}};
  artifact["rejected_lines"] = p.rejected_lines;
  artifact["qp"] = {{"iterations", mode.iterations}, {"kkt_residual", mode.kkt_residual}, {"active", mode.active.size()}};
  table.log_json = json{{"artifact", "fit.json"}, {"rejected_lines", p.rejected_lines}}.dump();
  table.artifacts.push_back({"fit.json", artifact.dump(2) + "\n"});
  table.wall_seconds = seconds_since(t0);
  return table;
}

ResultTable run_cv(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = Clock::now();
  ResultTable table;
  table.name = "cv";
  ObservationSet obs;
  std::string label;
  std::vector<double> widths;
  std::vector<double> paper;
  ShapeConstraint shape;
  int d = 1;
  if (!c.dataset.empty()) {
    const PreparedDataset p = prepare_dataset(c);
    d = static_cast<int>(p.data.inputs.cols());
    label = p.name;
    obs = unit_observations(p, c.noise.value_or(1e-6), c.center ? p.data.values.mean() : 0.0);
    for (int m = 0; m < d; ++m) widths.push_back(p.domain.width(m));
    shape = c.constraint.empty() ? ShapeConstraint::unconstrained() : parse_constraint(c.constraint);
  } else {
    const TestFunction& tf = find_test_function(c.function.empty() ? "sinusoidal" : c.function);
    d = tf.dim;
    label = tf.id;
    const double noise = c.noise.value_or(d == 1 ? 1.0 : 0.1);
    RngStream rng = rep_stream(c.seed, 0, 0);
    const Sample s = draw_sample(tf, c.n.value_or(d == 1 ? 100 : 1024), noise, rng);
    PreparedDataset p;
    p.data = {s.x, s.y};
    p.domain = DomainMap(tf.lower, tf.upper);
    obs = unit_observations(p, noise, c.center ? s.y.mean() : 0.0);
    for (int m = 0; m < d; ++m) widths.push_back(tf.upper[m] - tf.lower[m]);
    paper = tf.default_theta;
    shape = constraint_for(c, tf);
  }
  const int grid_n = c.grid_n.value_or(d == 1 ? 50 : 20);
  CvConfig cv = CvConfig::default_grid(d);
  if (!c.theta.empty()) {
    // Explicit grid in original units, shared by every dimension.
    cv.theta_grid.assign(d, {});
    for (int m = 0; m < d; ++m)
      for (double t : c.theta) cv.theta_grid[m].push_back(t / widths[m]);
    cv = cv.normalized();
  }
  cv.variance = c.variance;
  cv.threads = c.threads;
  const CvResult res =
      cv_search(default_model_kind(shape, d), KnotGrid(d, grid_n), parse_kernel_family(c.kernel), obs, cv);
  for (int m = 0; m < d; ++m) {
    const std::string suffix = d == 1 ? "" : "_" + std::to_string(m + 1);
    add_row(table, label, "cv", "theta" + suffix, res.kernel.lengthscales()[m] * widths[m], 0.0, 1, c.seed);
    if (!paper.empty()) add_row(table, label, "reference", "theta" + suffix, paper[m], 0.0, 1, c.seed);
  }
  add_row(table, label, "cv", "loo_mse", res.score, 0.0, 1, c.seed);
  table.wall_seconds = seconds_since(t0);
  table.log_json = json{{"grid_points", res.scores.size()}, {"n", obs.size()}}.dump();
  return table;
}

ResultTable run_experiment(const std::string& sub, const ExperimentConfig& config) {
  if (sub == "rmse-bench") return run_rmse_benchmark(config);
  if (sub == "coverage-bench") return run_coverage_benchmark(config);
  if (sub == "mse2d-bench") return run_mse2d_benchmark(config);
  if (sub == "sweep") return run_sample_size_sweep(config);
  if (sub == "fit") return fit_csv(config);
  if (sub == "cv") return run_cv(config);
  throw ConfigurationError("unknown subcommand '" + sub + "'");
}

std::string to_csv(const ResultTable& t) {
  std::string out = "function,estimator,metric,value,stderr,replications,seed\n";
  for (const auto& r : t.rows) {
    out += r.function + "," + r.estimator + "," + r.metric + "," + format_number(r.value) + "," +
           format_number(r.stderr_value) + "," + std::to_string(r.replications) + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

void write_outputs(const ResultTable& t, const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw IoError("cannot create output directory '" + config.out + "': " + ec.message());
  auto write = [&](const std::string& name, const std::string& text) {
    const fs::path path = fs::path(config.out) / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f || !(f << text)) throw IoError("cannot write '" + path.string() + "'");
  };
  write(t.name + ".csv", to_csv(t));
  for (const auto& [name, text] : t.artifacts) write(name, text);

  json line;
  line["table"] = t.name;
  line["csv"] = t.name + ".csv";
  line["seed"] = config.seed;
  line["wall_seconds"] = t.wall_seconds;
  line["config"] = json::parse(to_json(config));
  line["details"] = json::parse(t.log_json);
  const fs::path log = fs::path(config.out) / "run.jsonl";
  std::ofstream f(log, std::ios::binary | std::ios::app);
  if (!f || !(f << line.dump() << "\n")) throw IoError("cannot append to '" + log.string() + "'");
}

}  // namespace cgp
