#ifndef HAWKESRUIN_H
#define HAWKESRUIN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HR_API __declspec(dllexport)
#else
#define HR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hr_status {
  HR_OK = 0,
  HR_INVALID_PARAMETER,
  HR_UNSTABLE_KERNEL,
  HR_INTEGRAL_DIVERGENCE,
  HR_GRID_MISMATCH,
  HR_NOT_SAMPLABLE,
  HR_PATH_BUDGET_EXCEEDED,
  HR_INSUFFICIENT_SAMPLES,
  HR_ASYMPTOTIC_INAPPLICABLE,
  HR_NO_CONVERGENCE,
  HR_INVALID_ORDER,
  HR_IO_ERROR,
  HR_INTERNAL_ERROR
} hr_status;

typedef enum hr_formulas { HR_FORMULAS_DERIVED = 0, HR_FORMULAS_PRINTED = 1 } hr_formulas;
typedef enum hr_monitoring { HR_MONITOR_CONTINUOUS = 0, HR_MONITOR_GRID = 1 } hr_monitoring;
typedef enum hr_importance { HR_IS_AUTO = 0, HR_IS_OFF = 1, HR_IS_ON = 2 } hr_importance;
typedef enum hr_method { HR_METHOD_MC_GAUSSIAN = 0, HR_METHOD_MC_DIRECT, HR_METHOD_ASYMPTOTIC } hr_method;
typedef enum hr_gtilde { HR_GTILDE_AS_PRINTED = 0, HR_GTILDE_MAGNITUDE = 1 } hr_gtilde;
typedef enum hr_cov_source {
  HR_COV_ANALYTIC_EXPONENTIAL = 0,
  HR_COV_ANALYTIC_POISSON,
  HR_COV_MC_ESTIMATED
} hr_cov_source;

/* Message of the last failing call on this thread; empty after success. */
HR_API const char* hr_last_error(void);
HR_API const char* hr_status_name(hr_status status);
HR_API const char* hr_version(void);

/* Kernel plus claim distribution. Claims default to Exponential(1). */
typedef struct hr_model hr_model;

HR_API hr_status hr_model_zero(hr_model** out);
HR_API hr_status hr_model_exponential(double alpha, double beta, hr_model** out);
HR_API hr_status hr_model_tabulated(const double* times, const double* values, size_t n,
                                    hr_model** out);
HR_API void hr_model_destroy(hr_model* model);

HR_API hr_status hr_model_claims_exponential(hr_model* model, double rate);
HR_API hr_status hr_model_claims_gamma(hr_model* model, double shape, double rate);
HR_API hr_status hr_model_claims_moments(hr_model* model, double m1, double m2);

/* stable = ||h|| < 1; closed_forms is 1/0 for exponential kernels, -1 otherwise. */
HR_API hr_status hr_model_stability(const hr_model* model, int* stable, double* norm,
                                    int* closed_forms);
HR_API hr_status hr_model_claim_moments(const hr_model* model, double* m1, double* m2);

/* Rectangular table of doubles with named columns and optional row labels. */
typedef struct hr_table hr_table;

HR_API void hr_table_destroy(hr_table* table);
HR_API size_t hr_table_rows(const hr_table* table);
HR_API size_t hr_table_columns(const hr_table* table);
HR_API const char* hr_table_column_name(const hr_table* table, size_t column);
HR_API double hr_table_value(const hr_table* table, size_t row, size_t column);
/* NULL when the table has no labels. */
HR_API const char* hr_table_row_label(const hr_table* table, size_t row);
/* Header row, shortest round-trip doubles; a "label" first column if labelled. */
HR_API hr_status hr_table_write_csv(const hr_table* table, const char* path);

/* Columns t, g1, g2, mean_N, var_N, var_G on [0, horizon] at `step`, for
   baseline mu; exponential kernels add g1_closed, g2_closed, mean_N_closed,
   var_N_closed. */
HR_API hr_status hr_moments(const hr_model* model, double mu, double horizon, double step,
                            hr_formulas formulas, hr_table** out);

/* Var G(t). Closed forms for exponential kernels, m2 t for the zero kernel,
   the integral equations at volterra_step otherwise. */
HR_API hr_status hr_var_G(const hr_model* model, double t, double volterra_step,
                          hr_formulas formulas, double* out);

/* Event-level paths: columns path, time, claim. */
HR_API hr_status hr_simulate_events(const hr_model* model, double mu, double horizon,
                                    size_t n_paths, uint64_t seed, hr_table** out);

/* Scaled centred claims on a grid: columns path, t, value. */
HR_API hr_status hr_simulate_scaled(const hr_model* model, double mu, double horizon,
                                    double grid_step, size_t n_paths, uint64_t seed,
                                    unsigned threads, hr_table** out);

typedef struct hr_fclt_report {
  double mu;
  size_t n_paths;
  double horizon;
  double model_variance_T;
  double reference_variance_T;
  double sample_variance_T;
  double sample_mean_T;
  double ks_statistic;
  double ks_p_value;
  double max_cov_deviation_se;
  double worst_t_i;
  double worst_t_j;
  hr_cov_source model_source;
} hr_fclt_report;

/* reference_variance <= 0 tests against the model variance at T. */
HR_API hr_status hr_fclt_check(const hr_model* model, double mu, double horizon,
                               double grid_step, size_t n_paths, uint64_t seed,
                               unsigned threads, double reference_variance,
                               hr_formulas formulas, hr_fclt_report* out);

/* Columns t_i, t_j, cov over nodes past t = 0. */
HR_API hr_status hr_covariance(const hr_model* model, double horizon, double grid_step,
                               hr_formulas formulas, uint64_t seed, unsigned threads,
                               hr_cov_source* source, double* jitter, hr_table** out);

typedef struct hr_ruin_problem {
  double u;
  double c;
  double horizon;
} hr_ruin_problem;

typedef struct hr_mc_options {
  size_t n_paths;
  uint64_t seed;
  unsigned threads;
  double grid_step;
  hr_monitoring monitoring;
  hr_importance importance;  /* Gaussian only */
  int bias_check;            /* Gaussian only */
  hr_formulas formulas;
  double volterra_step;
  double mu;                 /* direct only */
  size_t max_events;         /* direct only */
} hr_mc_options;

HR_API hr_mc_options hr_mc_options_default(void);

typedef struct hr_ruin_result {
  double p_hat;
  double std_err;
  double ci_low;
  double ci_high;
  hr_method method;
  hr_monitoring monitoring;
  size_t n_paths;
  double grid_step;
  uint64_t seed;
  double mu;
  int importance_sampled;
  double tilt;
  int has_bias;
  double refined_p_hat;
  double bias_difference;
  double bias_difference_se;
  int bias_within_two_se;
  double piterbarg;
  double tail;
} hr_ruin_result;

HR_API hr_status hr_ruin_gaussian(const hr_model* model, const hr_ruin_problem* problem,
                                  const hr_mc_options* options, hr_ruin_result* out);
HR_API hr_status hr_ruin_direct(const hr_model* model, const hr_ruin_problem* problem,
                                const hr_mc_options* options, hr_ruin_result* out);
HR_API double hr_brownian_ruin(double u, double c, double horizon, double sigma2);
HR_API double hr_normal_tail(double x);

typedef struct hr_asymptotic_inputs {
  double g1;
  double g2;
  double int_g1;
  double int_g2;
  double cov_N_lambda;
  double sigma_T;
  double n_tilde;
  double g_tilde;
  double piterbarg_argument;  /* 0 when inapplicable */
} hr_asymptotic_inputs;

/* Fills every field it can before reporting HR_ASYMPTOTIC_INAPPLICABLE. */
HR_API hr_status hr_asymptotic_inputs_eval(const hr_model* model, const hr_ruin_problem* problem,
                                           hr_gtilde convention, hr_formulas formulas,
                                           uint64_t seed, unsigned threads,
                                           hr_asymptotic_inputs* out);

typedef struct hr_piterbarg_options {
  double tolerance;
  size_t n_paths;
  uint64_t seed;
  unsigned threads;
  double initial_horizon;
  double max_horizon;
} hr_piterbarg_options;

HR_API hr_piterbarg_options hr_piterbarg_options_default(void);

typedef struct hr_piterbarg_result {
  double value;
  double std_err;
  double closed_form;
  double horizon;
  double step;
  double last_relative_change;
  size_t doublings;
} hr_piterbarg_result;

HR_API hr_status hr_piterbarg(double R, const hr_piterbarg_options* options,
                              hr_piterbarg_result* out);

HR_API hr_status hr_ruin_asymptotic(const hr_model* model, const hr_ruin_problem* problem,
                                    hr_gtilde convention, hr_formulas formulas,
                                    const hr_piterbarg_options* options, hr_ruin_result* out);

/* Monte Carlo gate of the exponential closed forms. Rows labelled by
   quantity; columns s, t, printed, derived, mc_mean, mc_se. selected is the
   formula set the library would run with. */
HR_API hr_status hr_validate_formulas(double alpha, double beta, size_t n_paths, uint64_t seed,
                                      unsigned threads, int* printed_pass, int* derived_pass,
                                      hr_formulas* selected, hr_table** out);

#ifdef __cplusplus
}
#endif

#endif
