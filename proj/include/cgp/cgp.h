/* C interface to the constrained GP library. All handles are opaque; every
 * call returns a status and leaves a message for cgp_last_error() on failure. */
#ifndef CGP_CGP_H
#define CGP_CGP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CGP_API __declspec(dllexport)
#else
#define CGP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cgp_status {
  CGP_OK = 0,
  CGP_ERROR_ARGUMENT = 1,
  CGP_ERROR_CONFIGURATION = 2,
  CGP_ERROR_CONDITIONING = 3,
  CGP_ERROR_INFEASIBLE = 4,
  CGP_ERROR_UNSUPPORTED_DERIVATIVE = 5,
  CGP_ERROR_SAMPLER_STALL = 6,
  CGP_ERROR_ITERATION_LIMIT = 7,
  CGP_ERROR_PARSE = 8,
  CGP_ERROR_IO = 9,
  CGP_ERROR_INTERNAL = 10
} cgp_status;

typedef enum cgp_estimator {
  CGP_UNCONSTRAINED_MEAN = 0,
  CGP_MAP = 1
} cgp_estimator;

typedef struct cgp_model cgp_model;

/* Model description. Arrays have `dim` entries; lengthscales are in the
 * units of the inputs. `constraint` and `kernel` use the CLI spellings
 * ("monotone", "isotonic", "bounded:0:inf", ...; "se", "matern52", ...). */
typedef struct cgp_model_spec {
  int dim;
  const char* constraint;
  const char* kernel;
  double variance;
  const double* lengthscales;
  const double* lower;
  const double* upper;
  int subdivisions;
  double noise_sd;
  int center;
} cgp_model_spec;

/* Message of the last failed call on this thread ("" if none). */
CGP_API const char* cgp_last_error(void);
CGP_API const char* cgp_status_name(cgp_status status);
CGP_API const char* cgp_version(void);

CGP_API cgp_status cgp_model_create(const cgp_model_spec* spec, cgp_model** out);
CGP_API void cgp_model_destroy(cgp_model* model);

/* x is n x dim, row-major. */
CGP_API cgp_status cgp_model_fit(cgp_model* model, const double* x, const double* y, size_t n);
CGP_API cgp_status cgp_model_predict(const cgp_model* model, cgp_estimator which, const double* x, size_t m,
                                     double* out);
/* Writes min(capacity, count) coefficients; *count receives the full length. */
CGP_API cgp_status cgp_model_coefficients(const cgp_model* model, cgp_estimator which, double* out,
                                          size_t capacity, size_t* count);
/* Draws `count` constrained posterior paths evaluated at the m rows of x;
 * paths is count x m, row-major. acceptance may be NULL. */
CGP_API cgp_status cgp_model_sample(const cgp_model* model, size_t count, uint64_t seed, const double* x, size_t m,
                                    double* paths, double* acceptance);
/* Pointwise equal-tailed band of `level` from `count` >= 100 draws. */
CGP_API cgp_status cgp_model_band(const cgp_model* model, size_t count, uint64_t seed, double level,
                                  const double* x, size_t m, double* lower, double* upper);

/* Runs a CLI subcommand with a JSON config (ExperimentConfig field names),
 * writes <out>/<table>.csv and appends to <out>/run.jsonl. If csv_out is
 * non-NULL it receives the CSV text, released with cgp_free_string. */
CGP_API cgp_status cgp_run_experiment(const char* subcommand, const char* config_json, char** csv_out);
CGP_API void cgp_free_string(char* text);

#ifdef __cplusplus
}
#endif

#endif
