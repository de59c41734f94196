#include "cgp/cgp.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "cgp/bench.hpp"
#include "cgp/error.hpp"
#include "cgp/model.hpp"

struct cgp_model {
  cgp::Model model;
};

namespace {

thread_local std::string last_error;

cgp_status status_of(cgp::ErrorCode code) {
  switch (code) {
    case cgp::ErrorCode::Argument: return CGP_ERROR_ARGUMENT;
    case cgp::ErrorCode::Configuration: return CGP_ERROR_CONFIGURATION;
    case cgp::ErrorCode::Conditioning: return CGP_ERROR_CONDITIONING;
    case cgp::ErrorCode::Infeasible: return CGP_ERROR_INFEASIBLE;
    case cgp::ErrorCode::UnsupportedDerivative: return CGP_ERROR_UNSUPPORTED_DERIVATIVE;
    case cgp::ErrorCode::SamplerStall: return CGP_ERROR_SAMPLER_STALL;
    case cgp::ErrorCode::IterationLimit: return CGP_ERROR_ITERATION_LIMIT;
    case cgp::ErrorCode::Parse: return CGP_ERROR_PARSE;
    case cgp::ErrorCode::Io: return CGP_ERROR_IO;
  }
  return CGP_ERROR_INTERNAL;
}

template <typename F>
cgp_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return CGP_OK;
  } catch (const cgp::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown exception";
  }
  return CGP_ERROR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw cgp::ArgumentError(what);
}

cgp::Matrix points(const double* x, std::size_t m, int dim) {
  require(x != nullptr || m == 0, "null input array");
  cgp::Matrix p(static_cast<cgp::Index>(m), dim);
  for (std::size_t i = 0; i < m; ++i)
    for (int k = 0; k < dim; ++k) p(i, k) = x[i * dim + k];
  return p;
}

}  // namespace

extern "C" {

const char* cgp_last_error(void) { return last_error.c_str(); }

const char* cgp_status_name(cgp_status status) {
  switch (status) {
    case CGP_OK: return "ok";
    case CGP_ERROR_ARGUMENT: return "argument error";
    case CGP_ERROR_CONFIGURATION: return "configuration error";
    case CGP_ERROR_CONDITIONING: return "conditioning error";
    case CGP_ERROR_INFEASIBLE: return "infeasible constraints";
    case CGP_ERROR_UNSUPPORTED_DERIVATIVE: return "unsupported derivative";
    case CGP_ERROR_SAMPLER_STALL: return "sampler stall";
    case CGP_ERROR_ITERATION_LIMIT: return "iteration limit";
    case CGP_ERROR_PARSE: return "parse error";
    case CGP_ERROR_IO: return "i/o error";
    case CGP_ERROR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* cgp_version(void) { return "0.1.0"; }

cgp_status cgp_model_create(const cgp_model_spec* spec, cgp_model** out) {
  return guarded([&] {
    require(spec != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    require(spec->dim >= 1, "dim must be >= 1");
    require(spec->lengthscales && spec->lower && spec->upper, "null array in model spec");
    const std::size_t d = static_cast<std::size_t>(spec->dim);
    cgp::ModelOptions o;
    o.constraint = cgp::parse_constraint(spec->constraint ? spec->constraint : "none");
    o.family = cgp::parse_kernel_family(spec->kernel ? spec->kernel : "se");
    o.variance = spec->variance;
    o.lengthscales.assign(spec->lengthscales, spec->lengthscales + d);
    o.domain = cgp::DomainMap(std::vector<double>(spec->lower, spec->lower + d),
                              std::vector<double>(spec->upper, spec->upper + d));
    o.subdivisions = spec->subdivisions;
    o.noise_sd = spec->noise_sd;
    o.center = spec->center != 0;
    *out = new cgp_model{cgp::Model(std::move(o))};
  });
}

void cgp_model_destroy(cgp_model* model) { delete model; }

cgp_status cgp_model_fit(cgp_model* model, const double* x, const double* y, size_t n) {
  return guarded([&] {
    require(model != nullptr, "null model");
    require(y != nullptr || n == 0, "null output array");
    const cgp::Matrix p = points(x, n, model->model.dim());
    model->model.fit(p, Eigen::Map<const cgp::Vector>(y, static_cast<cgp::Index>(n)));
  });
}

cgp_status cgp_model_predict(const cgp_model* model, cgp_estimator which, const double* x, size_t m, double* out) {
  return guarded([&] {
    require(model != nullptr && (out != nullptr || m == 0), "null argument");
    const cgp::Matrix p = points(x, m, model->model.dim());
    const auto v = which == CGP_MAP ? model->model.predict_map(p) : model->model.predict_unconstrained(p);
    std::copy(v.begin(), v.end(), out);
  });
}

cgp_status cgp_model_coefficients(const cgp_model* model, cgp_estimator which, double* out, size_t capacity,
                                  size_t* count) {
  return guarded([&] {
    require(model != nullptr && count != nullptr, "null argument");
    const cgp::Vector& c = which == CGP_MAP ? model->model.mode().mu : model->model.posterior().mean;
    *count = static_cast<size_t>(c.size());
    require(out != nullptr || capacity == 0, "null output array");
    for (size_t k = 0; k < capacity && k < *count; ++k) out[k] = c[k];
  });
}

cgp_status cgp_model_sample(const cgp_model* model, size_t count, uint64_t seed, const double* x, size_t m,
                            double* paths, double* acceptance) {
  return guarded([&] {
    require(model != nullptr && (paths != nullptr || count * m == 0), "null argument");
    const cgp::Matrix p = points(x, m, model->model.dim());
    const cgp::SampleBatch batch = model->model.sample(static_cast<cgp::Index>(count), seed);
    const cgp::Matrix v = model->model.sample_paths(batch, p);
    for (size_t s = 0; s < count; ++s)
      for (size_t k = 0; k < m; ++k) paths[s * m + k] = v(s, k);
    if (acceptance) *acceptance = batch.acceptance_rate;
  });
}

cgp_status cgp_model_band(const cgp_model* model, size_t count, uint64_t seed, double level, const double* x,
                          size_t m, double* lower, double* upper) {
  return guarded([&] {
    require(model != nullptr && ((lower != nullptr && upper != nullptr) || m == 0), "null argument");
    const cgp::Matrix p = points(x, m, model->model.dim());
    const cgp::SampleBatch batch = model->model.sample(static_cast<cgp::Index>(count), seed);
    const auto [lo, hi] = model->model.band(batch, p, level);
    for (size_t k = 0; k < m; ++k) {
      lower[k] = lo[k];
      upper[k] = hi[k];
    }
  });
}

cgp_status cgp_run_experiment(const char* subcommand, const char* config_json, char** csv_out) {
  if (csv_out) *csv_out = nullptr;
  return guarded([&] {
    require(subcommand != nullptr, "null subcommand");
    const cgp::ExperimentConfig config = cgp::parse_experiment_config(config_json ? config_json : "{}");
    const cgp::ResultTable table = cgp::run_experiment(subcommand, config);
    cgp::write_outputs(table, config);
    if (csv_out) {
      const std::string csv = cgp::to_csv(table);
      char* buf = static_cast<char*>(std::malloc(csv.size() + 1));
      if (!buf) throw std::bad_alloc();
      std::memcpy(buf, csv.c_str(), csv.size() + 1);
      *csv_out = buf;
    }
  });
}

void cgp_free_string(char* text) { std::free(text); }

}  // extern "C"
