#include "hawkesruin.h"

#include <cmath>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "hawkesruin/analytic_exp.hpp"
#include "hawkesruin/gaussian.hpp"
#include "hawkesruin/hawkes_sim.hpp"
#include "hawkesruin/io.hpp"
#include "hawkesruin/ruin.hpp"
#include "hawkesruin/stats.hpp"
#include "hawkesruin/volterra.hpp"

#ifndef HAWKESRUIN_VERSION
#define HAWKESRUIN_VERSION "0.0.0"
#endif

using namespace hawkesruin;

struct hr_model {
  ExcitingKernel kernel;
  ClaimDistribution claims = ClaimDistribution::exponential(1.0);
};

struct hr_table {
  std::vector<std::string> columns;
  std::vector<double> data;  // row-major
  std::vector<std::string> labels;

  std::size_t rows() const { return columns.empty() ? 0 : data.size() / columns.size(); }
  void add(std::initializer_list<double> row) { data.insert(data.end(), row); }
};

namespace {

thread_local std::string last_error;

hr_status map_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_parameter: return HR_INVALID_PARAMETER;
    case ErrorCode::unstable_kernel: return HR_UNSTABLE_KERNEL;
    case ErrorCode::integral_divergence: return HR_INTEGRAL_DIVERGENCE;
    case ErrorCode::grid_mismatch: return HR_GRID_MISMATCH;
    case ErrorCode::not_samplable: return HR_NOT_SAMPLABLE;
    case ErrorCode::path_budget_exceeded: return HR_PATH_BUDGET_EXCEEDED;
    case ErrorCode::insufficient_samples: return HR_INSUFFICIENT_SAMPLES;
    case ErrorCode::asymptotic_inapplicable: return HR_ASYMPTOTIC_INAPPLICABLE;
    case ErrorCode::no_convergence: return HR_NO_CONVERGENCE;
    case ErrorCode::invalid_order: return HR_INVALID_ORDER;
    case ErrorCode::io_error: return HR_IO_ERROR;
  }
  return HR_INTERNAL_ERROR;
}

template <class Fn>
hr_status guard(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return HR_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return HR_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return HR_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown error";
    return HR_INTERNAL_ERROR;
  }
}

void need(const void* p, const char* name) {
  if (p == nullptr) fail(ErrorCode::invalid_parameter, std::string(name) + ": null pointer");
}

analytic::FormulaSet to_set(hr_formulas f) {
  return f == HR_FORMULAS_PRINTED ? analytic::FormulaSet::printed : analytic::FormulaSet::derived;
}

TimeGrid covering_grid(double horizon, double step) {
  require(std::isfinite(step) && step > 0.0, ErrorCode::invalid_parameter, "step: must be > 0");
  const double t_max = std::ceil(horizon / step - 1e-9) * step;
  return TimeGrid(std::max(t_max, step), step);
}

RuinProblem to_problem(const hr_model* model, const hr_ruin_problem* problem) {
  need(model, "model");
  need(problem, "problem");
  return RuinProblem{problem->u, problem->c, problem->horizon, model->kernel, model->claims};
}

hr_ruin_result to_result(const RuinEstimate& e) {
  hr_ruin_result r{};
  r.p_hat = e.p_hat;
  r.std_err = e.std_err;
  r.ci_low = e.ci95.first;
  r.ci_high = e.ci95.second;
  r.method = e.method == RuinMethod::mc_gaussian ? HR_METHOD_MC_GAUSSIAN
             : e.method == RuinMethod::mc_direct ? HR_METHOD_MC_DIRECT
                                                 : HR_METHOD_ASYMPTOTIC;
  r.monitoring = e.monitoring == Monitoring::grid ? HR_MONITOR_GRID : HR_MONITOR_CONTINUOUS;
  r.n_paths = e.n_paths;
  r.grid_step = e.grid_step;
  r.seed = e.seed;
  r.mu = e.mu;
  r.importance_sampled = e.importance_sampled ? 1 : 0;
  r.tilt = e.tilt;
  if (e.bias) {
    r.has_bias = 1;
    r.refined_p_hat = e.bias->refined_p_hat;
    r.bias_difference = e.bias->difference;
    r.bias_difference_se = e.bias->difference_se;
    r.bias_within_two_se = e.bias->within_two_se ? 1 : 0;
  }
  r.piterbarg = e.piterbarg;
  r.tail = e.tail;
  return r;
}

hr_cov_source to_source(CovarianceSource s) {
  switch (s) {
    case CovarianceSource::analytic_exponential: return HR_COV_ANALYTIC_EXPONENTIAL;
    case CovarianceSource::analytic_poisson: return HR_COV_ANALYTIC_POISSON;
    case CovarianceSource::mc_estimated: return HR_COV_MC_ESTIMATED;
  }
  return HR_COV_MC_ESTIMATED;
}

PiterbargOptions to_piterbarg(const hr_piterbarg_options* o) {
  PiterbargOptions p;
  if (o != nullptr) {
    p.tolerance = o->tolerance;
    p.n_paths = o->n_paths;
    p.seed = o->seed;
    p.threads = o->threads;
    p.initial_horizon = o->initial_horizon;
    p.max_horizon = o->max_horizon;
  }
  return p;
}

}  // namespace

extern "C" {

const char* hr_last_error(void) { return last_error.c_str(); }

const char* hr_status_name(hr_status status) {
  switch (status) {
    case HR_OK: return "Ok";
    case HR_INVALID_PARAMETER: return "InvalidParameter";
    case HR_UNSTABLE_KERNEL: return "UnstableKernel";
    case HR_INTEGRAL_DIVERGENCE: return "IntegralDivergence";
    case HR_GRID_MISMATCH: return "GridMismatch";
    case HR_NOT_SAMPLABLE: return "NotSamplable";
    case HR_PATH_BUDGET_EXCEEDED: return "PathBudgetExceeded";
    case HR_INSUFFICIENT_SAMPLES: return "InsufficientSamples";
    case HR_ASYMPTOTIC_INAPPLICABLE: return "AsymptoticInapplicable";
    case HR_NO_CONVERGENCE: return "NoConvergence";
    case HR_INVALID_ORDER: return "InvalidOrder";
    case HR_IO_ERROR: return "IoError";
    case HR_INTERNAL_ERROR: return "InternalError";
  }
  return "Unknown";
}

const char* hr_version(void) { return HAWKESRUIN_VERSION; }

hr_status hr_model_zero(hr_model** out) {
  return guard([&] {
    need(out, "out");
    *out = new hr_model{ExcitingKernel::zero()};
  });
}

hr_status hr_model_exponential(double alpha, double beta, hr_model** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    auto k = ExcitingKernel::exponential(alpha, beta);
    *out = new hr_model{std::move(k)};
  });
}

hr_status hr_model_tabulated(const double* times, const double* values, size_t n,
                             hr_model** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    need(times, "times");
    need(values, "values");
    auto k = ExcitingKernel::tabulated(std::vector<double>(times, times + n),
                                       std::vector<double>(values, values + n));
    *out = new hr_model{std::move(k)};
  });
}

void hr_model_destroy(hr_model* model) { delete model; }

hr_status hr_model_claims_exponential(hr_model* model, double rate) {
  return guard([&] {
    need(model, "model");
    model->claims = ClaimDistribution::exponential(rate);
  });
}

hr_status hr_model_claims_gamma(hr_model* model, double shape, double rate) {
  return guard([&] {
    need(model, "model");
    model->claims = ClaimDistribution::gamma(shape, rate);
  });
}

hr_status hr_model_claims_moments(hr_model* model, double m1, double m2) {
  return guard([&] {
    need(model, "model");
    model->claims = ClaimDistribution::moments_only(m1, m2);
  });
}

hr_status hr_model_stability(const hr_model* model, int* stable, double* norm, int* closed_forms) {
  return guard([&] {
    need(model, "model");
    const auto r = stability_check(model->kernel);
    if (stable) *stable = r.stable ? 1 : 0;
    if (norm) *norm = r.norm;
    if (closed_forms) *closed_forms = r.closed_forms_valid ? (*r.closed_forms_valid ? 1 : 0) : -1;
  });
}

hr_status hr_model_claim_moments(const hr_model* model, double* m1, double* m2) {
  return guard([&] {
    need(model, "model");
    const auto m = model->claims.moments();
    if (m1) *m1 = m.m1;
    if (m2) *m2 = m.m2;
  });
}

void hr_table_destroy(hr_table* table) { delete table; }
size_t hr_table_rows(const hr_table* table) { return table ? table->rows() : 0; }
size_t hr_table_columns(const hr_table* table) { return table ? table->columns.size() : 0; }

const char* hr_table_column_name(const hr_table* table, size_t column) {
  if (!table || column >= table->columns.size()) return nullptr;
  return table->columns[column].c_str();
}

double hr_table_value(const hr_table* table, size_t row, size_t column) {
  if (!table || column >= table->columns.size() || row >= table->rows()) return std::nan("");
  return table->data[row * table->columns.size() + column];
}

const char* hr_table_row_label(const hr_table* table, size_t row) {
  if (!table || row >= table->labels.size()) return nullptr;
  return table->labels[row].c_str();
}

hr_status hr_table_write_csv(const hr_table* table, const char* path) {
  return guard([&] {
    need(table, "table");
    need(path, "path");
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io_error, std::string("cannot open ") + path);
    const bool labelled = !table->labels.empty();
    if (labelled) out << "label,";
    for (std::size_t j = 0; j < table->columns.size(); ++j) {
      out << (j ? "," : "") << table->columns[j];
    }
    out << '\n';
    const std::size_t cols = table->columns.size();
    for (std::size_t i = 0; i < table->rows(); ++i) {
      if (labelled) out << table->labels[i] << ',';
      for (std::size_t j = 0; j < cols; ++j) {
        out << (j ? "," : "") << io::format_double(table->data[i * cols + j]);
      }
      out << '\n';
    }
    if (!out) fail(ErrorCode::io_error, std::string("write failed: ") + path);
  });
}

hr_status hr_moments(const hr_model* model, double mu, double horizon, double step,
                     hr_formulas formulas, hr_table** out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    *out = nullptr;
    require_stable(model->kernel);
    const TimeGrid grid(horizon, step);
    const auto mf = solve_moment_functions(model->kernel, grid);
    const auto counts = count_moments(mu, mf.g1, mf.g2);
    const auto sigma = sigma_function(model->claims, mf.g1, mf.g2);
    const auto* e = model->kernel.as_exponential();
    std::optional<analytic::ExpKernelParams> p;
    if (e) p.emplace(e->alpha, e->beta);

    auto table = std::make_unique<hr_table>();
    table->columns = {"t", "g1", "g2", "mean_N", "var_N", "var_G"};
    if (p) {
      for (const char* c : {"g1_closed", "g2_closed", "mean_N_closed", "var_N_closed"}) {
        table->columns.emplace_back(c);
      }
    }
    const auto set = to_set(formulas);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double t = grid.node(k);
      table->add({t, mf.g1[k], mf.g2[k], counts.mean[k], counts.variance[k], sigma[k] * sigma[k]});
      if (p) {
        table->add({analytic::g1_closed(*p, t), analytic::g2_closed(*p, t, set),
                    mu * analytic::mean_N1(*p, t), mu * analytic::var_N1(*p, t, set)});
      }
    }
    *out = table.release();
  });
}

hr_status hr_var_G(const hr_model* model, double t, double volterra_step, hr_formulas formulas,
                   double* out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    require(std::isfinite(t) && t >= 0.0, ErrorCode::invalid_parameter, "t: must be >= 0");
    require_stable(model->kernel);
    const auto m = model->claims.moments();
    if (model->kernel.is_zero()) {
      *out = m.m2 * t;
    } else if (const auto* e = model->kernel.as_exponential()) {
      *out = analytic::var_G(analytic::ExpKernelParams(e->alpha, e->beta), m, t, to_set(formulas));
    } else if (t == 0.0) {
      *out = 0.0;
    } else {
      const auto mf = solve_moment_functions(model->kernel, covering_grid(t, volterra_step));
      *out = m.m1 * m.m1 * mf.int_g2.at(t) + m.variance() * mf.int_g1.at(t);
    }
  });
}

hr_status hr_simulate_events(const hr_model* model, double mu, double horizon, size_t n_paths,
                             uint64_t seed, hr_table** out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    *out = nullptr;
    auto table = std::make_unique<hr_table>();
    table->columns = {"path", "time", "claim"};
    for (std::size_t p = 0; p < n_paths; ++p) {
      const auto path =
          simulate_compound(model->kernel, mu, horizon, model->claims, StreamKey{seed, p});
      for (std::size_t i = 0; i < path.claim_sizes.size(); ++i) {
        table->add({static_cast<double>(p), path.events.event_times[i], path.claim_sizes[i]});
      }
    }
    *out = table.release();
  });
}

hr_status hr_simulate_scaled(const hr_model* model, double mu, double horizon, double grid_step,
                             size_t n_paths, uint64_t seed, unsigned threads, hr_table** out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    *out = nullptr;
    const TimeGrid grid(horizon, grid_step);
    const auto paths =
        simulate_scaled_claims(model->kernel, model->claims, mu, grid, n_paths, seed, threads);
    auto table = std::make_unique<hr_table>();
    table->columns = {"path", "t", "value"};
    for (std::size_t p = 0; p < paths.size(); ++p) {
      for (std::size_t k = 0; k < grid.size(); ++k) {
        table->add({static_cast<double>(p), grid.node(k), paths[p][k]});
      }
    }
    *out = table.release();
  });
}

hr_status hr_fclt_check(const hr_model* model, double mu, double horizon, double grid_step,
                        size_t n_paths, uint64_t seed, unsigned threads, double reference_variance,
                        hr_formulas formulas, hr_fclt_report* out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    const TimeGrid grid(horizon, grid_step);
    FcltOptions opts;
    opts.seed = seed;
    opts.threads = threads;
    if (reference_variance > 0.0) opts.reference_variance = reference_variance;
    opts.covariance.formulas = to_set(formulas);
    opts.covariance.seed = mix_seed(seed, 0xc0f);
    opts.covariance.threads = threads;
    const auto r = fclt_check(model->kernel, model->claims, mu, grid, n_paths, opts);
    hr_fclt_report rep{};
    rep.mu = r.mu;
    rep.n_paths = r.n_paths;
    rep.horizon = r.horizon;
    rep.model_variance_T = r.model_variance_T;
    rep.reference_variance_T = opts.reference_variance.value_or(r.model_variance_T);
    rep.sample_variance_T = r.sample_variance_T;
    rep.sample_mean_T = r.sample_mean_T;
    rep.ks_statistic = r.ks_statistic;
    rep.ks_p_value = r.ks_p_value;
    rep.max_cov_deviation_se = r.max_cov_deviation_se;
    rep.worst_t_i = grid.node(r.worst_i + 1);
    rep.worst_t_j = grid.node(r.worst_j + 1);
    rep.model_source = to_source(r.model_source);
    *out = rep;
  });
}

hr_status hr_covariance(const hr_model* model, double horizon, double grid_step,
                        hr_formulas formulas, uint64_t seed, unsigned threads,
                        hr_cov_source* source, double* jitter, hr_table** out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    *out = nullptr;
    CovarianceBuildOptions opts;
    opts.formulas = to_set(formulas);
    opts.seed = seed;
    opts.threads = threads;
    auto cov = build_covariance(model->kernel, model->claims, TimeGrid(horizon, grid_step), opts);
    auto table = std::make_unique<hr_table>();
    table->columns = {"t_i", "t_j", "cov"};
    for (std::size_t i = 0; i < cov.dimension(); ++i) {
      for (std::size_t j = 0; j < cov.dimension(); ++j) {
        table->add({cov.node(i), cov.node(j),
                    cov.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
      }
    }
    if (source) *source = to_source(cov.source);
    if (jitter) *jitter = GaussianSampler(std::move(cov)).jitter();
    *out = table.release();
  });
}

hr_mc_options hr_mc_options_default(void) {
  hr_mc_options o{};
  o.n_paths = 10000;
  o.seed = 1;
  o.threads = 1;
  o.grid_step = 0.01;
  o.monitoring = HR_MONITOR_CONTINUOUS;
  o.importance = HR_IS_AUTO;
  o.bias_check = 1;
  o.formulas = HR_FORMULAS_DERIVED;
  o.volterra_step = 1e-3;
  o.mu = 400.0;
  o.max_events = 10'000'000;
  return o;
}

hr_status hr_ruin_gaussian(const hr_model* model, const hr_ruin_problem* problem,
                           const hr_mc_options* options, hr_ruin_result* out) {
  return guard([&] {
    need(options, "options");
    need(out, "out");
    const auto pr = to_problem(model, problem);
    GaussianRuinOptions o;
    o.n_paths = options->n_paths;
    o.seed = options->seed;
    o.threads = options->threads;
    o.monitoring = options->monitoring == HR_MONITOR_GRID ? Monitoring::grid : Monitoring::continuous;
    o.importance = options->importance == HR_IS_OFF  ? ImportanceSampling::off
                   : options->importance == HR_IS_ON ? ImportanceSampling::on
                                                     : ImportanceSampling::automatic;
    o.bias_check = options->bias_check != 0;
    o.formulas = to_set(options->formulas);
    o.volterra_step = options->volterra_step;
    *out = to_result(ruin_mc_gaussian(pr, TimeGrid(pr.horizon, options->grid_step), o));
  });
}

hr_status hr_ruin_direct(const hr_model* model, const hr_ruin_problem* problem,
                         const hr_mc_options* options, hr_ruin_result* out) {
  return guard([&] {
    need(options, "options");
    need(out, "out");
    const auto pr = to_problem(model, problem);
    DirectRuinOptions o;
    o.n_paths = options->n_paths;
    o.seed = options->seed;
    o.threads = options->threads;
    o.monitoring = options->monitoring == HR_MONITOR_GRID ? Monitoring::grid : Monitoring::continuous;
    o.volterra_step = options->volterra_step;
    o.max_events = options->max_events;
    *out = to_result(ruin_mc_direct(pr, options->mu, TimeGrid(pr.horizon, options->grid_step), o));
  });
}

double hr_brownian_ruin(double u, double c, double horizon, double sigma2) {
  return brownian_ruin_probability(u, c, horizon, sigma2);
}

double hr_normal_tail(double x) { return stats::normal_tail(x); }

hr_status hr_asymptotic_inputs_eval(const hr_model* model, const hr_ruin_problem* problem,
                                    hr_gtilde convention, hr_formulas formulas, uint64_t seed,
                                    unsigned threads, hr_asymptotic_inputs* out) {
  return guard([&] {
    need(out, "out");
    const auto pr = to_problem(model, problem);
    HorizonMomentOptions mo;
    mo.formulas = to_set(formulas);
    mo.seed = seed;
    mo.threads = threads;
    const auto hm = horizon_moments(pr, mo);
    hr_asymptotic_inputs r{};
    r.g1 = hm.g1;
    r.g2 = hm.g2;
    r.int_g1 = hm.int_g1;
    r.int_g2 = hm.int_g2;
    r.cov_N_lambda = hm.cov_N_lambda;
    const auto m = pr.claims.moments();
    r.sigma_T = std::sqrt(m.m1 * m.m1 * hm.int_g2 + m.variance() * hm.int_g1);
    r.n_tilde = 0.5 * (m.m1 * m.m1 * hm.g2 + m.variance() * hm.g1);
    r.g_tilde = 0.5 * (m.m1 * m.m1 * (2.0 * hm.cov_N_lambda - hm.g2) - m.variance() * hm.g1);
    *out = r;
    const auto in = asymptotic_inputs(pr, hm,
                                      convention == HR_GTILDE_MAGNITUDE ? GTildeConvention::magnitude
                                                                        : GTildeConvention::as_printed);
    out->piterbarg_argument = in.piterbarg_argument;
  });
}

hr_piterbarg_options hr_piterbarg_options_default(void) {
  const PiterbargOptions d;
  return hr_piterbarg_options{d.tolerance, d.n_paths, d.seed, d.threads, d.initial_horizon,
                              d.max_horizon};
}

hr_status hr_piterbarg(double R, const hr_piterbarg_options* options, hr_piterbarg_result* out) {
  return guard([&] {
    need(out, "out");
    const auto e = piterbarg_constant(R, to_piterbarg(options));
    *out = hr_piterbarg_result{e.value, e.std_err, e.closed_form, e.horizon, e.step,
                               e.last_relative_change, e.doublings};
  });
}

hr_status hr_ruin_asymptotic(const hr_model* model, const hr_ruin_problem* problem,
                             hr_gtilde convention, hr_formulas formulas,
                             const hr_piterbarg_options* options, hr_ruin_result* out) {
  return guard([&] {
    need(out, "out");
    const auto pr = to_problem(model, problem);
    HorizonMomentOptions mo;
    mo.formulas = to_set(formulas);
    const auto popts = to_piterbarg(options);
    mo.seed = mix_seed(popts.seed, 0xa5);
    mo.threads = popts.threads;
    const auto in = asymptotic_inputs(pr, horizon_moments(pr, mo),
                                      convention == HR_GTILDE_MAGNITUDE ? GTildeConvention::magnitude
                                                                        : GTildeConvention::as_printed);
    *out = to_result(ruin_asymptotic(pr, in, popts));
  });
}

hr_status hr_validate_formulas(double alpha, double beta, size_t n_paths, uint64_t seed,
                               unsigned threads, int* printed_pass, int* derived_pass,
                               hr_formulas* selected, hr_table** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    analytic::ValidationOptions o;
    o.n_paths = n_paths;
    o.seed = seed;
    o.threads = threads;
    const auto rep = analytic::validate_formulas(analytic::ExpKernelParams(alpha, beta), o);
    auto table = std::make_unique<hr_table>();
    table->columns = {"s", "t", "printed", "derived", "mc_mean", "mc_se"};
    for (const auto& c : rep.checks) {
      table->labels.push_back(c.quantity);
      table->add({c.s, c.t, c.printed, c.derived, c.mc_mean, c.mc_se});
    }
    if (printed_pass) *printed_pass = rep.printed_passes() ? 1 : 0;
    if (derived_pass) *derived_pass = rep.derived_passes() ? 1 : 0;
    if (selected) {
      *selected = rep.selected() == analytic::FormulaSet::printed ? HR_FORMULAS_PRINTED
                                                                  : HR_FORMULAS_DERIVED;
    }
    *out = table.release();
  });
}

}  // extern "C"
