#include "hawkesruin/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hawkesruin/hawkes_sim.hpp"
#include "hawkesruin/parallel.hpp"
#include "hawkesruin/stats.hpp"

namespace hawkesruin {

namespace {

using Index = Eigen::Index;

TimeGrid volterra_grid(double horizon, double step) {
  const double t_max = std::ceil(horizon / step - 1e-9) * step;
  return TimeGrid(std::max(t_max, step), step);
}

CovarianceModel poisson_covariance(const ClaimMoments& m, const TimeGrid& grid) {
  const auto dim = static_cast<Index>(grid.size() - 1);
  CovarianceModel model{grid, Eigen::MatrixXd(dim, dim), CovarianceSource::analytic_poisson, 0, {}};
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) {
      model.matrix(i, j) = m.m2 * grid.node(static_cast<std::size_t>(std::min(i, j)) + 1);
    }
  }
  return model;
}

CovarianceModel exponential_covariance(const ExponentialKernel& e, const ClaimMoments& m,
                                       const TimeGrid& grid, analytic::FormulaSet set) {
  const analytic::ExpKernelParams p(e.alpha, e.beta);
  const auto dim = static_cast<Index>(grid.size() - 1);
  CovarianceModel model{grid, Eigen::MatrixXd(dim, dim), CovarianceSource::analytic_exponential,
                        0, {}};
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j <= i; ++j) {
      const double v = analytic::cov_G(p, m, grid.node(static_cast<std::size_t>(j) + 1),
                                       grid.node(static_cast<std::size_t>(i) + 1), set);
      model.matrix(i, j) = model.matrix(j, i) = v;
    }
  }
  return model;
}

// Scaled centred unit-claim counts (N_t - mu int g1)/sqrt(mu); the claim part
// of the covariance is added analytically so moments-only claims still work.
CovarianceModel mc_covariance(const ExcitingKernel& kernel, const ClaimMoments& m,
                              const TimeGrid& grid, const CovarianceBuildOptions& opts) {
  require(opts.mc_paths >= min_covariance_paths, ErrorCode::insufficient_samples,
          "covariance Monte Carlo needs at least 1000 paths");
  require(std::isfinite(opts.mc_mu) && opts.mc_mu > 0.0, ErrorCode::invalid_parameter,
          "mc_mu: must be > 0");
  const auto mf = solve_moment_functions(kernel, volterra_grid(grid.last(), opts.volterra_step));
  const double mu = opts.mc_mu;
  const double root_mu = std::sqrt(mu);

  std::vector<GridFunction> paths(opts.mc_paths, GridFunction(grid, std::vector<double>(grid.size())));
  parallel_for(opts.mc_paths, opts.threads, [&](std::size_t p) {
    const auto path = simulate_hawkes(kernel, mu, grid.last(), StreamKey{opts.seed, p});
    auto& v = paths[p].values;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double t = grid.node(k);
      v[k] = (static_cast<double>(path.count_until(t)) - mu * mf.int_g1.at(t)) / root_mu;
    }
  });
  const auto counts = empirical_cov(paths);

  const auto dim = static_cast<Index>(grid.size() - 1);
  CovarianceModel model{grid, Eigen::MatrixXd(dim, dim), CovarianceSource::mc_estimated,
                        opts.mc_paths, Eigen::MatrixXd(dim, dim)};
  const double w = opts.shrinkage;
  for (Index i = 0; i < dim; ++i) {
    const double ti = grid.node(static_cast<std::size_t>(i) + 1);
    for (Index j = 0; j <= i; ++j) {
      const double tj = grid.node(static_cast<std::size_t>(j) + 1);
      const double ci = counts.matrix(i, i), cj = counts.matrix(j, j);
      require(ci > 0.0 && cj > 0.0, ErrorCode::insufficient_samples,
              "covariance Monte Carlo produced a degenerate node");
      const double scale = std::sqrt(ci * cj);
      const double rho = (1.0 - w) * counts.matrix(i, j) / scale + (i == j ? w : 0.0);
      const double target = std::sqrt(mf.int_g2.at(ti) * mf.int_g2.at(tj));
      const double v = m.m1 * m.m1 * rho * target + m.variance() * mf.int_g1.at(std::min(ti, tj));
      model.matrix(i, j) = model.matrix(j, i) = v;
      const double se = m.m1 * m.m1 * counts.standard_error(i, j) * target / scale;
      model.standard_error(i, j) = model.standard_error(j, i) = se;
    }
  }
  return model;
}

}  // namespace

CovarianceModel build_covariance(const ExcitingKernel& kernel, const ClaimDistribution& claims,
                                 const TimeGrid& grid, const CovarianceBuildOptions& options) {
  require_stable(kernel);
  require(grid.size() >= 2, ErrorCode::invalid_parameter, "grid has no node past t = 0");
  const auto m = claims.moments();
  if (kernel.is_zero()) return poisson_covariance(m, grid);
  if (const auto* e = kernel.as_exponential()) {
    return exponential_covariance(*e, m, grid, options.formulas);
  }
  return mc_covariance(kernel, m, grid, options);
}

GaussianSampler::GaussianSampler(CovarianceModel model) : model_(std::move(model)) {
  const auto& sigma = model_.matrix;
  dim_ = model_.dimension();
  require(dim_ > 0, ErrorCode::invalid_parameter, "empty covariance model");
  require(sigma.isApprox(sigma.transpose(), 1e-12) || (sigma - sigma.transpose()).norm() == 0.0,
          ErrorCode::invalid_parameter, "covariance matrix is not symmetric");
  const double max_diag = sigma.diagonal().maxCoeff();
  require(max_diag > 0.0, ErrorCode::invalid_parameter, "covariance diagonal is not positive");

  auto try_factor = [&](double eps) {
    Eigen::MatrixXd a = sigma;
    a.diagonal().array() += eps * max_diag;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) return false;
    const Eigen::MatrixXd l = llt.matrixL();
    if (!l.allFinite() || (l.diagonal().array() <= 0.0).any()) return false;
    lower_ = l;
    return true;
  };

  bool ok = try_factor(0.0);
  for (double eps = 1e-12; !ok && eps <= 1e-6 * (1.0 + 1e-9); eps *= 10.0) {
    if (try_factor(eps)) {
      jitter_ = eps;
      ok = true;
    }
  }
  require(ok, ErrorCode::invalid_parameter,
          "covariance matrix is not positive definite even with jitter 1e-6");

  packed_.reserve(dim_ * (dim_ + 1) / 2);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      packed_.push_back(lower_(static_cast<Index>(i), static_cast<Index>(j)));
    }
  }
}

void GaussianSampler::transform(std::span<const double> z, std::span<double> out) const noexcept {
  const double* row = packed_.data();
  for (std::size_t i = 0; i < dim_; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= i; ++j) acc += row[j] * z[j];
    out[i] = acc;
    row += i + 1;
  }
}

GridFunction GaussianSampler::sample(Philox4x32& engine) const {
  std::normal_distribution<double> normal;
  std::vector<double> z(dim_);
  for (auto& x : z) x = normal(engine);
  std::vector<double> values(dim_ + 1, 0.0);
  transform(z, std::span<double>(values).subspan(1));
  return GridFunction(model_.grid, std::move(values));
}

std::vector<GridFunction> sample_G(const GaussianSampler& sampler, std::size_t n_paths,
                                   std::uint64_t seed, unsigned threads) {
  const auto& grid = sampler.model().grid;
  std::vector<GridFunction> out(n_paths, GridFunction(grid, std::vector<double>(grid.size())));
  parallel_for(n_paths, threads, [&](std::size_t i) {
    auto engine = StreamKey{seed, i}.engine();
    out[i] = sampler.sample(engine);
  });
  return out;
}

FcltReport fclt_check(const ExcitingKernel& kernel, const ClaimDistribution& claims, double mu,
                      const TimeGrid& grid, std::size_t n_paths, const FcltOptions& options) {
  require_limit_assumptions(kernel);
  require(n_paths >= 2, ErrorCode::insufficient_samples, "fclt check needs at least two paths");
  const auto model = build_covariance(kernel, claims, grid, options.covariance);
  const auto paths = simulate_scaled_claims(kernel, claims, mu, grid, n_paths, options.seed,
                                            options.threads, options.covariance.volterra_step);

  FcltReport report;
  report.mu = mu;
  report.n_paths = n_paths;
  report.horizon = grid.last();
  report.model_source = model.source;
  const auto last = static_cast<Index>(model.dimension() - 1);
  report.model_variance_T = model.matrix(last, last);

  std::vector<double> terminal(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) terminal[i] = paths[i].back();
  const auto moments = stats::summarize(terminal);
  report.sample_mean_T = moments.mean();
  report.sample_variance_T = moments.variance();

  const double ref_var = options.reference_variance.value_or(report.model_variance_T);
  require(ref_var > 0.0, ErrorCode::invalid_parameter, "reference variance must be > 0");
  const double ref_sd = std::sqrt(ref_var);
  const auto ks = stats::ks_test(terminal, [ref_sd](double x) { return stats::normal_cdf(x / ref_sd); });
  report.ks_statistic = ks.statistic;
  report.ks_p_value = ks.p_value;

  const auto emp = empirical_cov(paths);
  for (Index i = 0; i < static_cast<Index>(model.dimension()); ++i) {
    for (Index j = 0; j <= i; ++j) {
      const double se = emp.standard_error(i, j);
      if (se <= 0.0) continue;
      const double dev = std::abs(emp.matrix(i, j) - model.matrix(i, j)) / se;
      if (dev > report.max_cov_deviation_se) {
        report.max_cov_deviation_se = dev;
        report.worst_i = static_cast<std::size_t>(i);
        report.worst_j = static_cast<std::size_t>(j);
      }
    }
  }
  return report;
}

}  // namespace hawkesruin
