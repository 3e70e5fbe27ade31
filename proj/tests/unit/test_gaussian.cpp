#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hawkesruin/analytic_exp.hpp"
#include "hawkesruin/gaussian.hpp"
#include "hawkesruin/stats.hpp"

using namespace hawkesruin;
namespace an = hawkesruin::analytic;
using Index = Eigen::Index;

namespace {

const auto fig1_kernel = ExcitingKernel::exponential(0.3, 0.5);
const auto unit_claims = ClaimDistribution::exponential(1.0);

ExcitingKernel sampled_exponential(double alpha, double beta, double t_max, double step) {
  std::vector<double> t, h;
  const auto n = static_cast<std::size_t>(std::llround(t_max / step));
  for (std::size_t k = 0; k <= n; ++k) {
    t.push_back(static_cast<double>(k) * step);
    h.push_back(alpha * std::exp(-beta * t.back()));
  }
  return ExcitingKernel::tabulated(t, h);
}

}  // namespace

TEST_CASE("zero kernel gives the scaled Brownian covariance") {
  const TimeGrid grid(1.0, 0.1);
  const auto m = build_covariance(ExcitingKernel::zero(), unit_claims, grid);
  CHECK(m.source == CovarianceSource::analytic_poisson);
  for (std::size_t i = 0; i < m.dimension(); ++i) {
    for (std::size_t j = 0; j < m.dimension(); ++j) {
      CHECK(m.matrix(Index(i), Index(j)) == doctest::Approx(2.0 * std::min(m.node(i), m.node(j))));
    }
  }
}

TEST_CASE("exponential kernel covariance on a 0.01 grid") {
  const TimeGrid grid(1.0, 0.01);
  const auto m = build_covariance(fig1_kernel, unit_claims, grid);
  CHECK(m.source == CovarianceSource::analytic_exponential);
  CHECK(m.dimension() == 100);
  const Index last = Index(m.dimension() - 1);
  CHECK(m.matrix(last, last) == doctest::Approx(2.6169074).epsilon(1e-7));
  CovarianceBuildOptions printed;
  printed.formulas = an::FormulaSet::printed;
  CHECK(build_covariance(fig1_kernel, unit_claims, grid, printed).matrix(last, last) ==
        doctest::Approx(2.56842).epsilon(1e-5));
  CHECK((m.matrix - m.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

  const GaussianSampler sampler(m);
  const Eigen::MatrixXd l = sampler.cholesky();
  CHECK((l * l.transpose() - m.matrix).norm() / m.matrix.norm() <= 1e-8);
  CHECK(sampler.jitter() <= 1e-6);
  for (std::size_t k = 0; k < m.dimension(); ++k) {
    CHECK(m.matrix(Index(k), Index(k)) ==
          doctest::Approx(an::var_G(an::ExpKernelParams(0.3, 0.5), {1.0, 2.0}, m.node(k))).epsilon(1e-12));
  }
}

TEST_CASE("restricting to a sub-grid equals building on the sub-grid") {
  const auto fine = build_covariance(fig1_kernel, unit_claims, TimeGrid(1.0, 0.01));
  const auto coarse = build_covariance(fig1_kernel, unit_claims, TimeGrid(1.0, 0.1));
  for (std::size_t i = 0; i < coarse.dimension(); ++i) {
    for (std::size_t j = 0; j < coarse.dimension(); ++j) {
      const double a = coarse.matrix(Index(i), Index(j));
      const double b = fine.matrix(Index(10 * i + 9), Index(10 * j + 9));
      CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
    }
  }
}

TEST_CASE("jitter rescues a singular matrix") {
  const TimeGrid grid(1.0, 0.5);
  CovarianceModel m{grid, Eigen::MatrixXd::Ones(2, 2), CovarianceSource::mc_estimated, 0, {}};
  const GaussianSampler s(m);
  CHECK(s.jitter() > 0.0);
  CHECK(s.jitter() <= 1e-6);
  const Eigen::MatrixXd l = s.cholesky();
  CHECK((l * l.transpose() - m.matrix).norm() / m.matrix.norm() <= 1e-6);
  CovarianceModel bad{grid, Eigen::MatrixXd::Identity(2, 2), CovarianceSource::mc_estimated, 0, {}};
  bad.matrix(0, 1) = bad.matrix(1, 0) = 2.0;
  CHECK_THROWS_AS(GaussianSampler{bad}, Error);
}

TEST_CASE("sampled marginals match the model") {
  const TimeGrid grid(1.0, 0.1);
  const GaussianSampler sampler(build_covariance(fig1_kernel, unit_claims, grid));
  const auto paths = sample_G(sampler, 100000, 7);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::vector<double> xs(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) xs[i] = paths[i][k];
    if (k == 0) {
      CHECK(std::all_of(xs.begin(), xs.end(), [](double x) { return x == 0.0; }));
      continue;
    }
    const auto m = stats::summarize(xs);
    const auto v = stats::sample_variance(xs);
    const double model = sampler.model().matrix(Index(k - 1), Index(k - 1));
    CHECK(std::abs(m.mean()) < 3.0 * m.std_err());
    CHECK(std::abs(v.variance - model) < 4.0 * v.std_err);
    if (k == grid.size() - 1) CHECK(std::abs(v.variance - 2.6169074) < 3.0 * v.std_err);
  }
}

TEST_CASE("Brownian case has uncorrelated increments") {
  const TimeGrid grid(1.0, 0.25);
  const GaussianSampler sampler(build_covariance(ExcitingKernel::zero(), unit_claims, grid));
  const auto paths = sample_G(sampler, 100000, 8);
  std::vector<double> prod(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    prod[i] = (paths[i][1] - paths[i][0]) * (paths[i][4] - paths[i][2]);
  }
  const auto s = stats::summarize(prod);
  CHECK(std::abs(s.mean()) < 3.0 * s.std_err());
}

TEST_CASE("sampling is deterministic across thread counts") {
  const GaussianSampler sampler(build_covariance(fig1_kernel, unit_claims, TimeGrid(1.0, 0.1)));
  const auto a = sample_G(sampler, 257, 3, 1);
  const auto b = sample_G(sampler, 257, 3, 4);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].values == b[i].values);
}

TEST_CASE("Monte Carlo covariance for tabulated kernels") {
  const auto tab = sampled_exponential(0.3, 0.5, 40.0, 1e-2);
  const TimeGrid grid(1.0, 0.25);
  CovarianceBuildOptions opts;
  opts.mc_paths = 20000;
  const auto m = build_covariance(tab, unit_claims, grid, opts);
  CHECK(m.source == CovarianceSource::mc_estimated);
  CHECK(m.n_paths == 20000);
  CHECK((m.matrix - m.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  const an::ExpKernelParams p(0.3, 0.5);
  for (std::size_t i = 0; i < m.dimension(); ++i) {
    // Diagonal comes from the integral equations.
    CHECK(m.matrix(Index(i), Index(i)) == doctest::Approx(an::var_G(p, {1.0, 2.0}, m.node(i))).epsilon(1e-3));
    for (std::size_t j = 0; j < i; ++j) {
      const double exact = an::cov_G(p, {1.0, 2.0}, m.node(j), m.node(i));
      CHECK(std::abs(m.matrix(Index(i), Index(j)) - exact) < 4.0 * m.standard_error(Index(i), Index(j)) + 0.02 * exact);
    }
  }
  CHECK_NOTHROW(GaussianSampler{m});

  opts.mc_paths = 999;
  try {
    build_covariance(tab, unit_claims, grid, opts);
    FAIL("too few paths accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::insufficient_samples);
  }
  try {
    build_covariance(ExcitingKernel::exponential(0.6, 0.5), unit_claims, grid);
    FAIL("unstable kernel accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unstable_kernel);
  }
}

TEST_CASE("FCLT checks at desk scale") {
  const TimeGrid grid(1.0, 0.1);
  const auto poisson = fclt_check(ExcitingKernel::zero(), unit_claims, 200.0, grid, 5000);
  CHECK(poisson.ks_p_value > 0.01);
  const auto hawkes = fclt_check(fig1_kernel, unit_claims, 200.0, grid, 5000);
  CHECK(hawkes.ks_p_value > 0.01);
  CHECK(hawkes.model_variance_T == doctest::Approx(2.6169074).epsilon(1e-7));
  const auto cov = fclt_check(fig1_kernel, unit_claims, 400.0, grid, 10000);
  CHECK(cov.max_cov_deviation_se <= 4.0);

  const auto bump = ExcitingKernel::tabulated({0.0, 1.0, 2.0}, {0.1, 0.3, 0.0});
  CHECK_THROWS_AS(fclt_check(bump, unit_claims, 10.0, grid, 100), Error);
}

TEST_CASE("covariance csv") {
  const auto m = build_covariance(ExcitingKernel::zero(), unit_claims, TimeGrid(1.0, 0.5));
  std::ostringstream out;
  write_csv(out, m);
  CHECK(out.str() == "t_i,t_j,cov\n0.5,0.5,1\n0.5,1,1\n1,0.5,1\n1,1,2\n");
}
