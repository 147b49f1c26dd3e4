/* C interface to the rmfgp library: opaque handles + integer status codes.
 * All functions return RMFGP_OK (0) on success; on failure they return a
 * negative code and leave a thread-local message readable via
 * rmfgp_last_error(). Output handles are only written on success and must be
 * released with the matching *_free function. */

#ifndef RMFGP_H
#define RMFGP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined _WIN32 || defined __CYGWIN__
#define RMFGP_API __declspec(dllexport)
#else
#define RMFGP_API __attribute__((visibility("default")))
#endif

enum rmfgp_status {
  RMFGP_OK = 0,
  RMFGP_ERR_INVALID_ARGUMENT = -1,
  RMFGP_ERR_DIMENSION_MISMATCH = -2,
  RMFGP_ERR_NUMERIC = -3,   /* singular covariance, failed factorization, ... */
  RMFGP_ERR_CONFIG = -4,    /* config parse/validation failure */
  RMFGP_ERR_IO = -5,
  RMFGP_ERR_RUNTIME = -6,   /* any other library error */
  RMFGP_ERR_BUFFER_TOO_SMALL = -7
};

enum rmfgp_fidelity {
  RMFGP_FIDELITY_LOW = 0,
  RMFGP_FIDELITY_HIGH = 1,
  RMFGP_FIDELITY_TEST = 2
};

typedef struct rmfgp_dataset_st rmfgp_dataset_t;
typedef struct rmfgp_gp_st rmfgp_gp_t;
typedef struct rmfgp_nargp_st rmfgp_nargp_t;
typedef struct rmfgp_sdr_st rmfgp_sdr_t;

/* Library version as "major.minor.patch". */
RMFGP_API const char* rmfgp_version(void);

/* Message for the most recent failure on this thread ("" if none). */
RMFGP_API const char* rmfgp_last_error(void);

/* Frees any string returned through a char** out-parameter. */
RMFGP_API void rmfgp_string_free(char* s);

/* -------- datasets -------- */

/* X is row-major n*p, y has length n. */
RMFGP_API int rmfgp_dataset_create(const double* X, const double* y, size_t n,
                                   size_t p, int fidelity,
                                   rmfgp_dataset_t** out);
RMFGP_API int rmfgp_dataset_from_csv(const char* path, int fidelity,
                                     rmfgp_dataset_t** out);
RMFGP_API int rmfgp_dataset_to_csv(const rmfgp_dataset_t* dataset,
                                   const char* path);
RMFGP_API int rmfgp_dataset_dims(const rmfgp_dataset_t* dataset, size_t* n,
                                 size_t* p);
/* Copies the inputs (row-major) and responses into caller buffers. */
RMFGP_API int rmfgp_dataset_copy(const rmfgp_dataset_t* dataset, double* X_out,
                                 double* y_out);
RMFGP_API void rmfgp_dataset_free(rmfgp_dataset_t* dataset);

/* Uniform [0,1) design, bit-identical for identical (n, p, seed). */
RMFGP_API int rmfgp_sample_uniform(size_t n, size_t p, uint64_t seed,
                                   double* X_out);

/* -------- single-fidelity GP -------- */

typedef struct rmfgp_fit_options_st {
  int restarts;          /* <=0 selects the default (10) */
  uint64_t seed;
  int pin_noise_to_zero; /* nonzero: noise fixed at 0 instead of learned */
  int max_iters;         /* <=0 selects the default (200) */
} rmfgp_fit_options;

RMFGP_API int rmfgp_gp_fit(const rmfgp_dataset_t* data,
                           const rmfgp_fit_options* options, rmfgp_gp_t** out);
/* X row-major m*p; mean/variance buffers of length m. */
RMFGP_API int rmfgp_gp_predict(const rmfgp_gp_t* model, const double* X,
                               size_t m, size_t p, double* mean,
                               double* variance);
RMFGP_API int rmfgp_gp_to_json(const rmfgp_gp_t* model, char** json_out);
RMFGP_API void rmfgp_gp_free(rmfgp_gp_t* model);

/* -------- two-level nonlinear multi-fidelity GP -------- */

RMFGP_API int rmfgp_nargp_fit(const rmfgp_dataset_t* low,
                              const rmfgp_dataset_t* high,
                              const rmfgp_fit_options* options,
                              rmfgp_nargp_t** out);
RMFGP_API int rmfgp_nargp_predict(const rmfgp_nargp_t* model, const double* X,
                                  size_t m, size_t p, int n_mc, uint64_t seed,
                                  double* mean, double* variance);
RMFGP_API void rmfgp_nargp_free(rmfgp_nargp_t* model);

/* -------- sufficient dimension reduction -------- */

RMFGP_API int rmfgp_save_fit(const rmfgp_dataset_t* data, int n_slices,
                             rmfgp_sdr_t** out);
RMFGP_API int rmfgp_sir_fit(const rmfgp_dataset_t* data, int n_slices,
                            rmfgp_sdr_t** out);
/* eigenvalues: length p; rotation/directions: column-major p*p. */
RMFGP_API int rmfgp_sdr_eigenvalues(const rmfgp_sdr_t* sdr, double* out,
                                    size_t capacity);
RMFGP_API int rmfgp_sdr_rotation(const rmfgp_sdr_t* sdr, double* out,
                                 size_t capacity);
RMFGP_API int rmfgp_sdr_directions(const rmfgp_sdr_t* sdr, double* out,
                                   size_t capacity);
RMFGP_API void rmfgp_sdr_free(rmfgp_sdr_t* sdr);

/* G(k) over k=1..p-1 from eigenvalues of Vhat+I (descending, length p);
 * g_out may be NULL when only d_hat is wanted. c_n <= 0 selects the default
 * penalty sequence. */
RMFGP_API int rmfgp_bic_dimension(const double* eigenvalues, size_t p, size_t n,
                                  double c_n, size_t* d_hat, double* g_out);

/* A: column-major p*d1, A_hat: column-major p*d2. */
RMFGP_API int rmfgp_subspace_distance(const double* A, size_t p, size_t d1,
                                      const double* A_hat, size_t d2,
                                      double* out);

/* -------- benchmark experiments -------- */

/* Paper-matching default configuration for "linear", "nonlinear",
 * "advection" or "elliptic". */
RMFGP_API int rmfgp_experiment_default_config(const char* problem,
                                              char** json_out);

/* Validates config_json and runs the full experiment, writing CSV tables and
 * the JSON manifest under out_dir. seed_override is an optional
 * comma-separated list replacing the config's seeds. On success writes a
 * short JSON summary to summary_json_out (optional). RMFGP_ERR_CONFIG
 * signals an invalid configuration. */
RMFGP_API int rmfgp_experiment_run(const char* config_json, const char* out_dir,
                                   const char* seed_override,
                                   char** summary_json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* RMFGP_H */
