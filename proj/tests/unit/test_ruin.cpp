#include <cmath>
#include <functional>

#include "doctest.h"
#include "hawkesruin/ruin.hpp"
#include "hawkesruin/stats.hpp"

using namespace hawkesruin;

namespace {

RuinProblem fig1(double alpha = 0.3) {
  return RuinProblem{2.0, 0.3, 1.0, ExcitingKernel::exponential(alpha, 0.5), ClaimDistribution::exponential(1.0)};
}

RuinProblem brownian(double u) {
  return RuinProblem{u, 0.3, 1.0, ExcitingKernel::zero(), ClaimDistribution::exponential(1.0)};
}

const TimeGrid grid(1.0, 0.01);

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::io_error;
}

}  // namespace

TEST_CASE("Brownian ruin formula") {
  // Zero premium: reflection gives 2 Psi(u / sigma sqrt T).
  CHECK(brownian_ruin_probability(1.0, 1e-12, 1.0, 1.0) == doctest::Approx(2.0 * stats::normal_tail(1.0)));
  CHECK(brownian_ruin_probability(2.0, 0.3, 1.0, 2.0) == doctest::Approx(0.11487).epsilon(1e-4));
  CHECK(brownian_ruin_probability(200.0, 0.3, 1.0, 2.0) == 0.0);
}

TEST_CASE("Gaussian MC matches the Brownian oracle") {
  for (double u : {1.0, 2.0, 3.0}) {
    GaussianRuinOptions opts;
    opts.n_paths = 100000;
    const auto e = ruin_mc_gaussian(brownian(u), grid, opts);
    const double exact = brownian_ruin_probability(u, 0.3, 1.0, 2.0);
    INFO("u = " << u << " p_hat " << e.p_hat << " +- " << e.std_err << " exact " << exact);
    CHECK(std::abs(e.p_hat - exact) <= 3.0 * e.std_err);
    REQUIRE(e.bias.has_value());
    CHECK(e.bias->within_two_se);
    CHECK(e.ci95.first <= e.p_hat);
    CHECK(e.ci95.second >= e.p_hat);
  }
}

TEST_CASE("grid-only monitoring is biased low, which the bias check exposes") {
  GaussianRuinOptions opts;
  opts.n_paths = 100000;
  opts.monitoring = Monitoring::grid;
  opts.importance = ImportanceSampling::off;
  const auto e = ruin_mc_gaussian(brownian(2.0), TimeGrid(1.0, 0.05), opts);
  const double exact = brownian_ruin_probability(2.0, 0.3, 1.0, 2.0);
  CHECK(e.p_hat < exact);
  REQUIRE(e.bias.has_value());
  CHECK(e.bias->difference > 0.0);
}

TEST_CASE("far tail gives zero") {
  const auto m = horizon_moments(fig1());
  RuinProblem far = fig1();
  far.u = 50.0 * std::sqrt(m.int_g1 + m.int_g2);  // Var G(T) for unit-mean exponential claims
  GaussianRuinOptions plain;
  plain.n_paths = 10000;
  plain.importance = ImportanceSampling::off;
  CHECK(ruin_mc_gaussian(far, grid, plain).p_hat == 0.0);
  GaussianRuinOptions tilted = plain;
  tilted.importance = ImportanceSampling::automatic;
  const auto t = ruin_mc_gaussian(far, grid, tilted);
  CHECK(t.importance_sampled);
  CHECK(t.p_hat < 1e-300);
  DirectRuinOptions direct;
  direct.n_paths = 1000;
  CHECK(ruin_mc_direct(far, 50.0, grid, direct).p_hat == 0.0);
}

TEST_CASE("importance sampling agrees with the Brownian oracle in the tail") {
  const double u = 6.0;
  GaussianRuinOptions opts;
  opts.n_paths = 20000;
  const auto e = ruin_mc_gaussian(brownian(u), grid, opts);
  CHECK(e.importance_sampled);
  const double exact = brownian_ruin_probability(u, 0.3, 1.0, 2.0);
  CHECK(std::abs(e.p_hat - exact) <= 3.0 * e.std_err);
  CHECK(e.std_err < 0.05 * exact);
}

TEST_CASE("alpha 0.3, beta 0.5: probability in (0, 1) and increasing in alpha") {
  GaussianRuinOptions opts;
  opts.n_paths = 20000;
  const auto a = ruin_mc_gaussian(fig1(0.3), grid, opts);
  const auto b = ruin_mc_gaussian(fig1(0.4), grid, opts);
  CHECK(a.p_hat > 0.0);
  CHECK(a.p_hat < 1.0);
  CHECK(b.p_hat > a.p_hat);
}

TEST_CASE("common random numbers make the estimate monotone in u, c and T") {
  GaussianRuinOptions opts;
  opts.n_paths = 5000;
  opts.importance = ImportanceSampling::off;
  double prev = 1.0;
  for (double u : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    RuinProblem p = fig1();
    p.u = u;
    const double v = ruin_mc_gaussian(p, grid, opts).p_hat;
    CHECK(v <= prev);
    prev = v;
  }
  prev = 1.0;
  for (double c : {0.1, 0.3, 0.6, 1.0}) {
    RuinProblem p = fig1();
    p.c = c;
    const double v = ruin_mc_gaussian(p, grid, opts).p_hat;
    CHECK(v <= prev);
    prev = v;
  }
  prev = 0.0;
  for (double T : {0.5, 1.0, 1.5}) {
    RuinProblem p = fig1();
    p.horizon = T;
    const double v = ruin_mc_gaussian(p, TimeGrid(T, 0.01), opts).p_hat;
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("direct simulation agrees with the Gaussian limit and the Brownian oracle") {
  DirectRuinOptions d;
  d.n_paths = 10000;
  GaussianRuinOptions g;
  g.n_paths = 10000;
  const auto direct = ruin_mc_direct(fig1(), 400.0, grid, d);
  const auto gauss = ruin_mc_gaussian(fig1(), grid, g);
  CHECK(std::abs(direct.p_hat - gauss.p_hat) <= 3.0 * std::hypot(direct.std_err, gauss.std_err));
  CHECK(direct.mu == 400.0);
  CHECK(direct.method == RuinMethod::mc_direct);

  const auto poisson = ruin_mc_direct(brownian(2.0), 400.0, grid, d);
  CHECK(std::abs(poisson.p_hat - brownian_ruin_probability(2.0, 0.3, 1.0, 2.0)) <= 3.0 * poisson.std_err);
}

TEST_CASE("argument checks") {
  GaussianRuinOptions few;
  few.n_paths = 99;
  CHECK(code_of([&] { ruin_mc_gaussian(fig1(), grid, few); }) == ErrorCode::insufficient_samples);
  CHECK(code_of([&] { ruin_mc_gaussian(fig1(), TimeGrid(2.0, 0.01), {}); }) == ErrorCode::grid_mismatch);
  RuinProblem bad = fig1();
  bad.u = -1.0;
  CHECK(code_of([&] { ruin_mc_gaussian(bad, grid, {}); }) == ErrorCode::invalid_parameter);
  RuinProblem moments = fig1();
  moments.claims = ClaimDistribution::moments_only(1.0, 2.0);
  CHECK(code_of([&] { ruin_mc_direct(moments, 100.0, grid, {}); }) == ErrorCode::not_samplable);
  // Only the moments are needed on the Gaussian route.
  GaussianRuinOptions ok;
  ok.n_paths = 1000;
  CHECK_NOTHROW(ruin_mc_gaussian(moments, grid, ok));
}

TEST_CASE("asymptotic inputs") {
  const auto poisson = brownian(2.0);
  const auto m0 = horizon_moments(poisson);
  CHECK(m0.g1 == 1.0);
  CHECK(m0.g2 == 1.0);
  CHECK(m0.cov_N_lambda == 0.0);
  try {
    asymptotic_inputs(poisson, m0);
    FAIL("negative G~ accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::asymptotic_inapplicable);
  }
  const auto mag = asymptotic_inputs(poisson, m0, GTildeConvention::magnitude);
  CHECK(mag.n_tilde == doctest::Approx(1.0));
  CHECK(mag.g_tilde == doctest::Approx(-1.0));
  CHECK(mag.piterbarg_argument == doctest::Approx(1.0));
  CHECK(mag.sigma_T == doctest::Approx(std::sqrt(2.0)));

  const auto m1 = horizon_moments(fig1());
  CHECK(m1.g1 == doctest::Approx(1.2719038703830274));
  CHECK(m1.g2 == doctest::Approx(1.9758806).epsilon(1e-7));
  const auto in = asymptotic_inputs(fig1(), m1, GTildeConvention::magnitude);
  CHECK(in.n_tilde == doctest::Approx(0.5 * (m1.g2 + m1.g1)));
  CHECK(in.sigma_T == doctest::Approx(std::sqrt(2.6169074)).epsilon(1e-7));
  CHECK(in.g_tilde < 0.0);
  CHECK(code_of([&] { asymptotic_inputs(fig1(), m1); }) == ErrorCode::asymptotic_inapplicable);
}

TEST_CASE("Cov(N, lambda) for a tabulated kernel comes from simulation") {
  std::vector<double> t, h;
  for (int k = 0; k <= 4000; ++k) {
    t.push_back(k * 0.01);
    h.push_back(0.3 * std::exp(-0.5 * t.back()));
  }
  RuinProblem p = fig1();
  p.kernel = ExcitingKernel::tabulated(t, h);
  HorizonMomentOptions o;
  o.mc_paths = 100000;
  const auto m = horizon_moments(p, o);
  CHECK(m.cov_N_lambda == doctest::Approx(0.3519884).epsilon(0.05));
  CHECK(m.g1 == doctest::Approx(1.2719038703830274).epsilon(1e-4));
}

TEST_CASE("normal tail entering the asymptotic") {
  CHECK(stats::normal_tail(0.0) == 0.5);
}

TEST_CASE("asymptotic estimate at u = 5 sigma(T) - cT") {
  const auto poisson = brownian(1.0);
  auto in = asymptotic_inputs(poisson, horizon_moments(poisson), GTildeConvention::magnitude);
  RuinProblem p = poisson;
  p.u = 5.0 * in.sigma_T - p.c * p.horizon;
  PiterbargOptions po;
  po.n_paths = 2000;
  const auto e = ruin_asymptotic(p, in, po);
  CHECK(e.tail == doctest::Approx(2.8665157e-7).epsilon(1e-7));
  CHECK(e.method == RuinMethod::asymptotic);
  CHECK(e.std_err == 0.0);
  CHECK(e.p_hat == doctest::Approx(e.piterbarg * e.tail));
}

TEST_CASE("Brownian case: magnitude-convention asymptotic matches tilted MC at u = 4 sigma(T)") {
  const auto base = brownian(1.0);
  const auto in = asymptotic_inputs(base, horizon_moments(base), GTildeConvention::magnitude);
  RuinProblem p = base;
  p.u = 4.0 * in.sigma_T;
  PiterbargOptions po;
  po.n_paths = 2000;
  const auto asym = ruin_asymptotic(p, in, po);
  GaussianRuinOptions g;
  g.n_paths = 20000;
  const auto mc = ruin_mc_gaussian(p, grid, g);
  CHECK(mc.importance_sampled);
  const double ratio = asym.p_hat / mc.p_hat;
  CHECK(ratio >= 0.5);
  CHECK(ratio <= 2.0);
}

TEST_CASE("Piterbarg constant") {
  PiterbargOptions big_r;
  big_r.n_paths = 2000;
  big_r.initial_horizon = 0.05;
  const auto r100 = piterbarg_constant(100.0, big_r);
  CHECK(r100.value >= 1.0);
  CHECK(r100.value <= 1.05);
  CHECK(r100.closed_form == doctest::Approx(1.01));
  CHECK(r100.step == doctest::Approx(1e-3 / 101.0));

  PiterbargOptions o;
  o.n_paths = 2000;
  o.tolerance = 2e-2;
  std::vector<PiterbargEstimate> est;
  for (double R : {0.5, 1.0, 2.0, 4.0}) est.push_back(piterbarg_constant(R, o));
  for (std::size_t i = 1; i < est.size(); ++i) {
    CHECK(est[i].value <= est[i - 1].value + 2.0 * std::hypot(est[i].std_err, est[i - 1].std_err));
  }
  CHECK(std::abs(est[1].value - 2.0) <= 3.0 * est[1].std_err + 0.05);

  CHECK(code_of([] { piterbarg_constant(0.0); }) == ErrorCode::invalid_parameter);
  PiterbargOptions short_run;
  short_run.n_paths = 100;
  short_run.max_horizon = 2.0;
  CHECK(code_of([&] { piterbarg_constant(1.0, short_run); }) == ErrorCode::no_convergence);
}
