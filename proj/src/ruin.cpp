#include "hawkesruin/ruin.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hawkesruin/gaussian.hpp"
#include "hawkesruin/hawkes_sim.hpp"
#include "hawkesruin/parallel.hpp"
#include "hawkesruin/stats.hpp"

namespace hawkesruin {

void RuinProblem::validate() const {
  require(std::isfinite(u) && u > 0.0, ErrorCode::invalid_parameter, "u: must be > 0");
  require(std::isfinite(c) && c > 0.0, ErrorCode::invalid_parameter, "c: must be > 0");
  require(std::isfinite(horizon) && horizon > 0.0, ErrorCode::invalid_parameter,
          "horizon: must be > 0");
  require_stable(kernel);
}

std::string_view to_string(RuinMethod method) noexcept {
  switch (method) {
    case RuinMethod::mc_gaussian: return "mc-gaussian";
    case RuinMethod::mc_direct: return "mc-direct";
    case RuinMethod::asymptotic: return "asymptotic";
  }
  return "unknown";
}

double brownian_ruin_probability(double u, double c, double horizon, double sigma2) noexcept {
  const double s = std::sqrt(sigma2 * horizon);
  const double first = stats::normal_tail((u + c * horizon) / s);
  // exp(-2cu/sigma2) Psi(.) can underflow term by term; combine in logs.
  const double tail = stats::normal_tail((u - c * horizon) / s);
  const double second = tail > 0.0 ? std::exp(-2.0 * c * u / sigma2 + std::log(tail)) : 0.0;
  return std::min(1.0, first + second);
}

namespace {

using Index = Eigen::Index;

void check_grid(const RuinProblem& problem, const TimeGrid& grid) {
  require(grid.size() >= 2, ErrorCode::grid_mismatch, "ruin grid needs a node past t = 0");
  require(std::abs(grid.last() - problem.horizon) <= 1e-9 * problem.horizon,
          ErrorCode::grid_mismatch, "ruin grid must end at the horizon");
}

std::pair<double, double> clipped_ci(double p, double se) {
  return {std::clamp(p - 1.96 * se, 0.0, 1.0), std::clamp(p + 1.96 * se, 0.0, 1.0)};
}

// int_0^t g1 at each grid node.
std::vector<double> compensator_at_nodes(const ExcitingKernel& kernel, const TimeGrid& grid,
                                         double volterra_step) {
  std::vector<double> out(grid.size());
  if (kernel.is_zero()) {
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = grid.node(k);
    return out;
  }
  if (const auto* e = kernel.as_exponential()) {
    const analytic::ExpKernelParams p(e->alpha, e->beta);
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = analytic::mean_N1(p, grid.node(k));
    return out;
  }
  const double t_max = std::ceil(grid.last() / volterra_step - 1e-9) * volterra_step;
  const auto int_g1 = cumulative_integral(solve_g1(kernel, TimeGrid(t_max, volterra_step)));
  for (std::size_t k = 0; k < grid.size(); ++k) out[k] = int_g1.at(grid.node(k));
  return out;
}

// Probability that a path with excess values x (G - c t, x[0] = 0 at t = 0)
// exceeds u somewhere on [0, T]. Node values are taken from every `stride`-th
// entry; between retained nodes a Brownian bridge with variance var[k] over
// the k-th retained interval is assumed.
double exceedance(std::span<const double> x, double u, std::size_t stride, Monitoring monitoring,
                  std::span<const double> var) {
  double survive = 1.0;
  double prev = x[0];
  if (prev > u) return 1.0;
  std::size_t k = 0;
  for (std::size_t i = stride; i < x.size(); i += stride, ++k) {
    const double cur = x[i];
    if (cur > u) return 1.0;
    if (monitoring == Monitoring::continuous && var[k] > 0.0) {
      survive *= -std::expm1(-2.0 * (u - prev) * (u - cur) / var[k]);
    }
    prev = cur;
  }
  return 1.0 - survive;
}

struct WeightedSums {
  stats::RunningStats coarse;
  stats::RunningStats refined;
  stats::RunningStats difference;
};

}  // namespace

RuinEstimate ruin_mc_gaussian(const RuinProblem& problem, const TimeGrid& grid,
                              const GaussianRuinOptions& options) {
  problem.validate();
  check_grid(problem, grid);
  require(options.n_paths >= min_ruin_paths, ErrorCode::insufficient_samples,
          "ruin Monte Carlo needs at least 100 paths");
  require_limit_assumptions(problem.kernel);

  const std::size_t stride = options.bias_check ? 2 : 1;
  const TimeGrid fine = options.bias_check ? TimeGrid(grid.last(), grid.step() / 2.0) : grid;
  CovarianceBuildOptions cov_opts;
  cov_opts.formulas = options.formulas;
  cov_opts.seed = mix_seed(options.seed, 0xc0f);
  cov_opts.threads = options.threads;
  cov_opts.volterra_step = options.volterra_step;
  const GaussianSampler sampler(build_covariance(problem.kernel, problem.claims, fine, cov_opts));
  const std::size_t dim = sampler.dimension();

  const double m2 = problem.claims.moments().m2;
  const auto comp = compensator_at_nodes(problem.kernel, fine, options.volterra_step);
  std::vector<double> var_fine(fine.size() - 1), var_coarse;
  for (std::size_t k = 0; k + 1 < fine.size(); ++k) var_fine[k] = m2 * (comp[k + 1] - comp[k]);
  for (std::size_t k = 0; k + stride < fine.size(); k += stride) {
    var_coarse.push_back(m2 * (comp[k + stride] - comp[k]));
  }

  // Exponential tilt of the terminal marginal: z ~ N(nu, I), nu = theta L^T e_n.
  const double var_T = sampler.model().matrix(static_cast<Index>(dim - 1), static_cast<Index>(dim - 1));
  const double level = problem.u + problem.c * problem.horizon;
  const double arg = level / std::sqrt(var_T);
  const bool tilt = options.importance == ImportanceSampling::on ||
                    (options.importance == ImportanceSampling::automatic && arg > rare_event_threshold);
  std::vector<double> nu(dim, 0.0);
  double nu_norm2 = 0.0;
  if (tilt) {
    const double theta = level / var_T;
    const auto& l = sampler.cholesky();
    for (std::size_t j = 0; j < dim; ++j) {
      nu[j] = theta * l(static_cast<Index>(dim - 1), static_cast<Index>(j));
      nu_norm2 += nu[j] * nu[j];
    }
  }

  // One accumulator per static block keeps the reduction order fixed.
  const std::size_t n = options.n_paths;
  const std::size_t blocks = std::min<std::size_t>(n, 64);
  std::vector<WeightedSums> sums(blocks);
  parallel_for(blocks, options.threads, [&](std::size_t b) {
    const std::size_t begin = b * n / blocks, end = (b + 1) * n / blocks;
    std::vector<double> z(dim), g(dim), x(dim + 1);
    std::normal_distribution<double> normal;
    for (std::size_t p = begin; p < end; ++p) {
      auto engine = StreamKey{options.seed, p}.engine();
      normal.reset();
      double log_w = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const double eps = normal(engine);
        z[j] = eps + nu[j];
        log_w -= nu[j] * eps;
      }
      const double w = tilt ? std::exp(log_w - 0.5 * nu_norm2) : 1.0;
      sampler.transform(z, g);
      x[0] = 0.0;
      for (std::size_t k = 0; k < dim; ++k) x[k + 1] = g[k] - problem.c * fine.node(k + 1);
      const double coarse = w * exceedance(x, problem.u, stride, options.monitoring, var_coarse);
      sums[b].coarse.add(coarse);
      if (options.bias_check) {
        const double refined = w * exceedance(x, problem.u, 1, options.monitoring, var_fine);
        sums[b].refined.add(refined);
        sums[b].difference.add(refined - coarse);
      }
    }
  });
  WeightedSums total;
  for (const auto& s : sums) {
    total.coarse.merge(s.coarse);
    total.refined.merge(s.refined);
    total.difference.merge(s.difference);
  }

  RuinEstimate est;
  est.method = RuinMethod::mc_gaussian;
  est.monitoring = options.monitoring;
  est.n_paths = n;
  est.grid_step = grid.step();
  est.seed = options.seed;
  est.importance_sampled = tilt;
  est.tilt = tilt ? level : 0.0;
  est.p_hat = std::clamp(total.coarse.mean(), 0.0, 1.0);
  est.std_err = total.coarse.std_err();
  est.ci95 = clipped_ci(est.p_hat, est.std_err);
  if (options.bias_check) {
    GridBias bias;
    bias.refined_p_hat = std::clamp(total.refined.mean(), 0.0, 1.0);
    bias.difference = total.difference.mean();
    bias.difference_se = total.difference.std_err();
    bias.within_two_se = std::abs(bias.difference) < 2.0 * est.std_err ||
                         (est.std_err == 0.0 && bias.difference == 0.0);
    est.bias = bias;
  }
  return est;
}

RuinEstimate ruin_mc_direct(const RuinProblem& problem, double mu, const TimeGrid& grid,
                            const DirectRuinOptions& options) {
  problem.validate();
  check_grid(problem, grid);
  require(options.n_paths >= min_ruin_paths, ErrorCode::insufficient_samples,
          "ruin Monte Carlo needs at least 100 paths");
  require(problem.claims.samplable(), ErrorCode::not_samplable,
          "direct simulation needs a samplable claim distribution");

  RiskPathConfig config;
  config.u = problem.u;
  config.c = problem.c;
  config.mu = mu;
  config.claims = problem.claims;
  config.kernel = problem.kernel;
  config.horizon = problem.horizon;
  SimulationLimits limits;
  limits.max_events = options.max_events;
  const RiskPathSimulator sim(config, options.volterra_step, limits);

  std::vector<unsigned char> ruined(options.n_paths, 0);
  parallel_for(options.n_paths, options.threads, [&](std::size_t p) {
    const auto path = sim.simulate_claims(StreamKey{options.seed, p});
    bool hit = false;
    if (options.monitoring == Monitoring::continuous) {
      hit = sim.running_max_excess(path) > problem.u;
    } else {
      const auto w = sim.wealth(path, grid);
      hit = std::any_of(w.values.begin(), w.values.end(), [](double v) { return v < 0.0; });
    }
    ruined[p] = hit ? 1 : 0;
  });
  const double hits = static_cast<double>(std::count(ruined.begin(), ruined.end(), 1));
  const double nd = static_cast<double>(options.n_paths);

  RuinEstimate est;
  est.method = RuinMethod::mc_direct;
  est.monitoring = options.monitoring;
  est.n_paths = options.n_paths;
  est.grid_step = grid.step();
  est.seed = options.seed;
  est.mu = mu;
  est.p_hat = hits / nd;
  est.std_err = std::sqrt(est.p_hat * (1.0 - est.p_hat) / nd);
  est.ci95 = clipped_ci(est.p_hat, est.std_err);
  return est;
}

HorizonMoments horizon_moments(const RuinProblem& problem, const HorizonMomentOptions& options) {
  problem.validate();
  const double T = problem.horizon;
  HorizonMoments out;
  if (problem.kernel.is_zero()) {
    out.g1 = out.g2 = 1.0;
    out.int_g1 = out.int_g2 = T;
    return out;
  }
  if (const auto* e = problem.kernel.as_exponential()) {
    const analytic::ExpKernelParams p(e->alpha, e->beta);
    out.g1 = analytic::g1_closed(p, T);
    out.g2 = analytic::g2_closed(p, T, options.formulas);
    out.int_g1 = analytic::mean_N1(p, T);
    out.int_g2 = analytic::var_N1(p, T, options.formulas);
    out.cov_N_lambda = analytic::cov_N_lambda(p, T, options.formulas);
    return out;
  }
  const double step = options.volterra_step;
  const double t_max = std::ceil(T / step - 1e-9) * step;
  const auto mf = solve_moment_functions(problem.kernel, TimeGrid(t_max, step));
  out.g1 = mf.g1.at(T);
  out.g2 = mf.g2.at(T);
  out.int_g1 = mf.int_g1.at(T);
  out.int_g2 = mf.int_g2.at(T);

  require(options.mc_paths >= 2, ErrorCode::insufficient_samples,
          "Cov(N_T, lambda_T) estimate needs at least two paths");
  std::vector<double> counts(options.mc_paths), excitation(options.mc_paths);
  parallel_for(options.mc_paths, options.threads, [&](std::size_t i) {
    const auto path = simulate_hawkes(problem.kernel, 1.0, T, StreamKey{options.seed, i});
    counts[i] = static_cast<double>(path.event_times.size());
    excitation[i] = excitation_at(problem.kernel, path, T);
  });
  const auto a = stats::summarize(counts);
  const auto b = stats::summarize(excitation);
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    acc += (counts[i] - a.mean()) * (excitation[i] - b.mean());
  }
  out.cov_N_lambda = acc / static_cast<double>(counts.size() - 1);
  return out;
}

AsymptoticInputs asymptotic_inputs(const RuinProblem& problem, const HorizonMoments& moments,
                                   GTildeConvention convention) {
  const auto m = problem.claims.moments();
  const double m1sq = m.m1 * m.m1;
  const double noise = m.variance();
  AsymptoticInputs in;
  in.convention = convention;
  in.sigma_T = std::sqrt(m1sq * moments.int_g2 + noise * moments.int_g1);
  require(in.sigma_T > 0.0, ErrorCode::invalid_parameter, "sigma(T) must be > 0");
  in.n_tilde = 0.5 * (m1sq * moments.g2 + noise * moments.g1);
  in.g_tilde = 0.5 * (m1sq * (2.0 * moments.cov_N_lambda - moments.g2) - noise * moments.g1);
  if (convention == GTildeConvention::as_printed) {
    if (!(in.g_tilde > 0.0)) {
      std::ostringstream msg;
      msg << "G~ = " << in.g_tilde << " <= 0, so N~/G~ is not a positive Piterbarg argument";
      fail(ErrorCode::asymptotic_inapplicable, msg.str());
    }
    in.piterbarg_argument = in.n_tilde / in.g_tilde;
  } else {
    require(in.g_tilde != 0.0, ErrorCode::asymptotic_inapplicable, "G~ = 0");
    in.piterbarg_argument = in.n_tilde / std::abs(in.g_tilde);
  }
  require(in.piterbarg_argument > 0.0 && std::isfinite(in.piterbarg_argument),
          ErrorCode::asymptotic_inapplicable, "Piterbarg argument must be positive and finite");
  return in;
}

namespace {

struct DriftedPath {
  Philox4x32 engine;
  std::normal_distribution<double> normal;
  double position = 0.0;
  double sup = 0.0;
};

}  // namespace

PiterbargEstimate piterbarg_constant(double R, const PiterbargOptions& options) {
  require(std::isfinite(R) && R > 0.0, ErrorCode::invalid_parameter, "R: must be > 0");
  require(options.n_paths >= 2, ErrorCode::insufficient_samples,
          "Piterbarg estimate needs at least two paths");
  require(options.initial_horizon > 0.0 && options.tolerance > 0.0, ErrorCode::invalid_parameter,
          "initial horizon and tolerance must be > 0");
  const double drift = 1.0 + R;
  const double dt = 1e-3 * std::min(1.0, 1.0 / drift);
  const double var_step = 2.0 * dt;  // sqrt2 B has variance rate 2

  std::vector<DriftedPath> paths;
  paths.reserve(options.n_paths);
  for (std::size_t i = 0; i < options.n_paths; ++i) {
    paths.push_back({StreamKey{options.seed, i}.engine(), {}, 0.0, 0.0});
  }

  // Advance every path by `steps` increments; the maximum of the bridge between
  // nodes is drawn exactly, so the running sup is that of the continuous path.
  auto advance = [&](std::size_t steps) {
    parallel_for(paths.size(), options.threads, [&](std::size_t i) {
      auto& p = paths[i];
      for (std::size_t k = 0; k < steps; ++k) {
        const double next = p.position - drift * dt + std::sqrt(var_step) * p.normal(p.engine);
        const double gap = next - p.position;
        const double bridge_max =
            0.5 * (p.position + next +
                   std::sqrt(gap * gap - 2.0 * var_step * std::log(p.engine.uniform_open())));
        p.sup = std::max(p.sup, bridge_max);
        p.position = next;
      }
    });
  };
  auto estimate = [&] {
    stats::RunningStats s;
    for (const auto& p : paths) s.add(std::exp(p.sup));
    return s;
  };

  PiterbargEstimate out;
  out.closed_form = 1.0 + 1.0 / R;
  out.step = dt;
  double horizon = options.initial_horizon;
  std::size_t done_steps = static_cast<std::size_t>(std::llround(horizon / dt));
  advance(done_steps);
  auto prev = estimate();
  for (;;) {
    const double next_horizon = 2.0 * horizon;
    if (next_horizon > options.max_horizon * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "Piterbarg constant did not settle below relative change " << options.tolerance
          << " by S = " << options.max_horizon << " (last change " << out.last_relative_change
          << ")";
      fail(ErrorCode::no_convergence, msg.str());
    }
    const auto target = static_cast<std::size_t>(std::llround(next_horizon / dt));
    advance(target - done_steps);
    done_steps = target;
    horizon = next_horizon;
    ++out.doublings;
    const auto cur = estimate();
    out.last_relative_change = std::abs(cur.mean() - prev.mean()) / prev.mean();
    out.value = cur.mean();
    out.std_err = cur.std_err();
    out.horizon = horizon;
    if (out.doublings >= options.min_doublings && out.last_relative_change < options.tolerance) {
      break;
    }
    prev = cur;
  }
  return out;
}

RuinEstimate ruin_asymptotic(const RuinProblem& problem, const AsymptoticInputs& inputs,
                             const PiterbargOptions& options) {
  problem.validate();
  require(inputs.sigma_T > 0.0 && inputs.piterbarg_argument > 0.0,
          ErrorCode::asymptotic_inapplicable, "asymptotic inputs are not applicable");
  const auto constant = piterbarg_constant(inputs.piterbarg_argument, options);
  RuinEstimate est;
  est.method = RuinMethod::asymptotic;
  est.seed = options.seed;
  est.n_paths = options.n_paths;
  est.piterbarg = constant.value;
  est.tail = stats::normal_tail((problem.u + problem.c * problem.horizon) / inputs.sigma_T);
  est.p_hat = std::min(1.0, est.piterbarg * est.tail);
  est.std_err = 0.0;
  est.ci95 = {est.p_hat, est.p_hat};
  return est;
}

}  // namespace hawkesruin
