// Acceptance run: one PASS/FAIL line per criterion at full tolerance.
//
// Exit status is 0 when the set of failing criteria equals the set given
// with --known-failures (empty by default), so a criterion that is known to
// be out of reach keeps printing FAIL without breaking the test suite, and
// any change in either direction is reported.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cgp/bench.hpp"
#include "cgp/error.hpp"
#include "cgp/model.hpp"
#include "cgp/qp.hpp"
#include "cgp/sampler.hpp"
#include "equivalence.hpp"
#include "oracles.hpp"

using namespace cgp;
using namespace cgp::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// 1. is_member <=> check_function_shape on lattice coefficient vectors.
void equivalence(Outcome& o) {
  const auto t0 = Clock::now();
  int trials = 0, disagreements = 0, members = 0;
  for (const auto& ec : equivalence_cases()) {
    const int max_n = ec.dim == 1 ? 6 : 4;
    for (int n = 2; n <= max_n; ++n) {
      const auto t = run_equivalence(ec, n, 100, RngStream(1000 + n).split(ec.name.size()));
      trials += t.trials;
      members += t.members;
      disagreements += t.disagreements;
      if (t.disagreements) o.detail << " " << ec.name << "@N=" << n << ":" << t.disagreements;
    }
  }
  const double secs = seconds_since(t0);
  o.detail << " vectors=" << trials << " members=" << members << " disagreements=" << disagreements
           << " time=" << fmt(secs) << "s";
  o.require(disagreements == 0, "disagreements");
  o.require(secs < 60.0, "runtime < 1 min");
}

// 2. sup |K_N - K| nonincreasing in N; N = 160, theta = 0.3 within 0.01.
void convergence(Outcome& o) {
  const auto t0 = Clock::now();
  double final_03 = 0.0;
  for (double theta : {0.1, 0.3, 1.0}) {
    double prev = kInfinity;
    o.detail << " theta=" << theta << ":";
    for (int n : {5, 10, 20, 40, 80, 160}) {
      const double e = kn_sup_error(n, theta);
      o.detail << " " << fmt(e);
      o.require(e <= prev + 1e-12, "monotone decrease at theta=" + fmt(theta) + " N=" + std::to_string(n));
      prev = e;
    }
    if (theta == 0.3) final_03 = prev;
  }
  const double secs = seconds_since(t0);
  o.detail << " time=" << fmt(secs) << "s";
  o.require(final_03 <= 0.01, "N=160 theta=0.3 error <= 0.01");
  o.require(secs < 60.0, "runtime < 1 min");
}

// 3. condition() against dense joint-Gaussian conditioning.
void conditioning(Outcome& o) {
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const auto c = conditioning_instance(k);
    worst = std::max({worst, c.mean_error, c.covariance_error});
  }
  o.detail << " max entrywise error=" << fmt(worst);
  o.require(worst <= 1e-8, "entrywise error <= 1e-8");
}

// 4. KKT residuals, feasible centers, covariance scaling.
void qp(Outcome& o) {
  double kkt = 0.0, scaling = 0.0;
  int feasible_mismatch = 0;
  for (int k = 0; k < 100; ++k) {
    const QpProblem p = random_qp(k);
    const QpSolution s = solve_qp(p);
    kkt = std::max({kkt, s.kkt_residual, independent_kkt(p, s)});
    for (double c : {0.01, 100.0}) {
      QpProblem q = p;
      q.covariance = SymmetricMatrix(c * p.covariance.dense());
      scaling = std::max(scaling, (solve_qp(q).mu - s.mu).cwiseAbs().maxCoeff());
    }
    // Shrink the center into the set (every row contains 0 in its interior).
    QpProblem f = p;
    while (!is_member(f.system, f.center, 0.0)) f.center *= 0.5;
    if (!(solve_qp(f).mu == f.center)) ++feasible_mismatch;
  }
  o.detail << " max kkt=" << fmt(kkt) << " feasible-center mismatches=" << feasible_mismatch
           << " max scaling change=" << fmt(scaling);
  o.require(kkt <= 1e-6, "KKT residual <= 1e-6");
  o.require(feasible_mismatch == 0, "mu = zeta_I when feasible");
  o.require(scaling <= 1e-7, "scale invariance <= 1e-7");
}

// 5. Truncated normal moments, feasibility, reproducibility.
void sampler(Outcome& o) {
  const auto post = gaussian(Vector::Constant(1, -1.0), Matrix::Identity(1, 1));
  const auto sys = orthant_system(1);
  const auto mode = solve_map(post, sys);
  const auto batch = sample_truncated(post, sys, mode, 100000, RngStream(71));
  const auto [mean, var] = truncated_normal_moments(-1.0, 1.0, 0.0);
  const auto mc = moment_check(batch.samples, 0, mean, var);
  o.detail << " mean=" << fmt(mc.mean) << " (closed form " << fmt(mean) << ", " << fmt(mc.mean_z)
           << " SE) var=" << fmt(mc.variance) << " (closed form " << fmt(var) << ", " << fmt(mc.variance_z) << " SE)";
  o.require(mc.mean_z <= 4.0, "mean within 4 SE");
  o.require(mc.variance_z <= 4.0, "variance within 4 SE");

  // Feasibility on a fitted monotone model.
  ModelOptions opts;
  opts.constraint = ShapeConstraint::monotone();
  opts.domain = DomainMap({0.0}, {10.0});
  opts.lengthscales = {2.5};
  opts.noise_sd = 1.0;
  opts.center = true;
  Model m(opts);
  RngStream rng(5);
  Matrix x(100, 1);
  Vector y(100);
  for (Index i = 0; i < 100; ++i) {
    x(i, 0) = 10.0 * rng.uniform_open_low();
    y[i] = std::log(20.0 * x(i, 0) + 1.0) + rng.normal();
  }
  m.fit(x, y);
  const auto draws = m.sample(2000, 17);
  int infeasible = (batch.samples.array() < 0.0).count();
  for (Index r = 0; r < draws.samples.rows(); ++r) {
    const Vector z = draws.samples.row(r).transpose();
    if (!is_member(m.system(), z, 1e-8 * (1.0 + z.cwiseAbs().maxCoeff()))) ++infeasible;
  }
  o.detail << " infeasible=" << infeasible << "/" << batch.samples.rows() + draws.samples.rows();
  o.require(infeasible == 0, "100% feasibility");

  SamplerOptions three;
  three.threads = 3;
  const auto again = m.sample(2000, 17);
  const auto threaded = m.sample(2000, 17, three);
  const bool same = again.samples == draws.samples && threaded.samples == draws.samples;
  o.detail << " reproducible=" << (same ? "yes" : "no");
  o.require(same, "bit-exact reproducibility");
}

ExperimentConfig full_scale() {
  ExperimentConfig c;
  c.out = "acceptance_out";
  return c;
}

// 6. RMSE x 100 at n = 100, 200 replications.
ResultTable rmse_table;
void rmse(Outcome& o) {
  const auto t0 = Clock::now();
  rmse_table = run_rmse_benchmark(full_scale());
  const double secs = seconds_since(t0);
  const std::vector<std::pair<std::string, double>> targets = {
      {"sinusoidal", 20.6}, {"flat", 8.2}, {"linear", 15.8}, {"exponential", 20.8}, {"logistic", 21.0}};
  for (const auto& [id, target] : targets) {
    const double v = rmse_table.find(id, "map", "rmse_x100").value;
    o.detail << " " << id << "=" << fmt(v) << " (" << target << "+-3)";
    o.require(std::abs(v - target) <= 3.0, id);
  }
  const double step = rmse_table.find("step", "map", "rmse_x100").value;
  o.detail << " step=" << fmt(step) << " (<=50) time=" << fmt(secs) << "s";
  o.require(step <= 50.0, "step");
  o.require(secs < 600.0, "runtime < 10 min");
}

// 7. Coverage of 95% bands at x = 0.5, 3, 5.
ResultTable coverage_table;
void coverage(Outcome& o) {
  coverage_table = run_coverage_benchmark(full_scale());
  const std::vector<std::pair<std::string, double>> targets = {{"0.5", 97.0}, {"3", 97.1}, {"5", 86.7}};
  for (const auto& [x, target] : targets) {
    const double v = coverage_table.find("sinusoidal", "map_band", "coverage_pct@x=" + x).value;
    o.detail << " x=" << x << ":" << fmt(v) << "% (" << target << "+-6)";
    o.require(std::abs(v - target) <= 6.0, "x=" + x);
  }
}

// 8. logistic2 sample-size sweep.
ResultTable sweep_table;
void sweep(Outcome& o) {
  sweep_table = run_sample_size_sweep(full_scale());
  const double r100 = sweep_table.find("logistic2", "map", "rmse@n=100").value;
  const double r160 = sweep_table.find("logistic2", "map", "rmse@n=160").value;
  o.detail << " rmse@100=" << fmt(r100) << " (in [0.05, 0.10]) rmse@160=" << fmt(r160) << " (<=0.075)";
  o.require(r160 <= 0.075, "n=160");
  o.require(r100 >= 0.05 && r100 <= 0.10, "n=100 anchor");
}

// 9. 2-D MSE x 100 at n = 1024, noise 0.1, 20 replications.
void mse2d(Outcome& o) {
  const auto t0 = Clock::now();
  ExperimentConfig c = full_scale();
  c.replications = 20;
  const ResultTable t = run_mse2d_benchmark(c);
  const double secs = seconds_since(t0);
  for (const char* id : {"f1", "f2", "f3", "f4", "f5", "f6"}) {
    const double v = t.find(id, "map", "mse_x100").value;
    const double bound = (id[1] <= '3') ? 0.05 : 1.0;
    o.detail << " " << id << "=" << fmt(v) << " (<" << bound << ")";
    o.require(v < bound, id);
  }
  o.detail << " time=" << fmt(secs) << "s";
  o.require(secs < 1200.0, "runtime < 20 min");
}

// 10. Same seed, byte-identical CSVs.
void determinism(Outcome& o) {
  // Full-scale reruns of the tables produced above.
  const bool rmse_same = to_csv(run_rmse_benchmark(full_scale())) == to_csv(rmse_table);
  const bool cov_same = to_csv(run_coverage_benchmark(full_scale())) == to_csv(coverage_table);
  const bool sweep_same = to_csv(run_sample_size_sweep(full_scale())) == to_csv(sweep_table);
  ExperimentConfig small = full_scale();
  small.replications = 3;
  small.n = 256;
  small.grid_n = 10;
  const bool mse_same = to_csv(run_mse2d_benchmark(small)) == to_csv(run_mse2d_benchmark(small));
  ExperimentConfig cv = full_scale();
  cv.function = "sinusoidal";
  const bool cv_same = to_csv(run_cv(cv)) == to_csv(run_cv(cv));
  o.detail << " rmse=" << rmse_same << " coverage=" << cov_same << " sweep=" << sweep_same
           << " mse2d=" << mse_same << " cv=" << cv_same;
  o.require(rmse_same && cov_same && sweep_same && mse_same && cv_same, "byte-identical CSVs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> known;
  std::vector<int> only;
  app.add_option("--known-failures", known, "criteria expected to fail")->delimiter(',');
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"constraint equivalence", equivalence},
      {"kernel approximation convergence", convergence},
      {"conditioning oracle", conditioning},
      {"QP correctness", qp},
      {"sampler correctness", sampler},
      {"RMSE table (n=100, 200 reps)", rmse},
      {"credible band coverage (200 reps)", coverage},
      {"logistic2 sample-size sweep (200 reps)", sweep},
      {"2-D MSE table (n=1024, 20 reps)", mse2d},
      {"end-to-end determinism", determinism},
  };

  std::set<int> failed;
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    if (!o.pass) failed.insert(id);
    std::printf("criterion %2d: %s  %s:%s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("total time %.1f s\n", seconds_since(t0));

  std::set<int> expected;
  for (int k : known)
    if (only.empty() || std::find(only.begin(), only.end(), k) != only.end()) expected.insert(k);
  if (failed == expected) {
    if (!expected.empty()) std::printf("failing criteria match the known failures\n");
    return 0;
  }
  for (int k : failed)
    if (!expected.count(k)) std::printf("unexpected failure: criterion %d\n", k);
  for (int k : expected)
    if (!failed.count(k)) std::printf("known failure now passes: criterion %d (update --known-failures)\n", k);
  return 1;
}
