#include "hawkesruin/analytic_exp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "hawkesruin/hawkes_sim.hpp"
#include "hawkesruin/parallel.hpp"
#include "hawkesruin/stats.hpp"

namespace hawkesruin::analytic {

ExpKernelParams::ExpKernelParams(double a, double b) : alpha(a), beta(b) {
  require(std::isfinite(a) && a > 0.0, ErrorCode::invalid_parameter,
          "alpha: closed forms need alpha > 0");
  require(std::isfinite(b) && b > 0.0, ErrorCode::invalid_parameter, "beta: must be > 0");
  require(a < b, ErrorCode::invalid_parameter, "closed forms need alpha < beta");
  require((b - a) / b >= 1e-6, ErrorCode::invalid_parameter,
          "alpha is within 1e-6 (relative) of beta; closed forms are ill-conditioned");
}

namespace {

void require_time(double t) {
  require(std::isfinite(t) && t >= 0.0, ErrorCode::invalid_parameter, "time must be >= 0");
}

void require_order(double s, double t) {
  require_time(s);
  require_time(t);
  require(s <= t, ErrorCode::invalid_order, "cross moments need s <= t");
}

// Composite 20-point Gauss-Legendre; panel count grows with the fastest
// exponential rate so every panel is resolved to rounding level.
template <class F>
double integrate(F&& f, double lo, double hi, double rate) {
  if (hi <= lo) return 0.0;
  const double len = hi - lo;
  const auto panels = static_cast<std::size_t>(1.0 + std::floor(len * (rate + 1.0) / 4.0));
  const double width = len / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t i = 0; i < panels; ++i) {
    const double a = lo + width * static_cast<double>(i);
    total += boost::math::quadrature::gauss<double, 20>::integrate(f, a, a + width);
  }
  return total;
}

// Coefficients of the exact g2 for the exponential kernel,
//   g2(t) = P + (Q + R t) e^{ct} + S e^{2ct},  c = alpha - beta,
// obtained from g2' = c g2 + 2 g1 g1' + beta g1^2, g2(0) = 1.
struct G2Coefficients {
  double p, q, r, s;
};

G2Coefficients g2_coefficients(const ExpKernelParams& p) {
  const double a = p.alpha, b = p.beta, c = a - b;
  const double A = -b / c;  // g1 = A + B e^{ct}
  const double B = a / c;
  G2Coefficients k{};
  k.p = -b * A * A / c;
  k.r = 2.0 * A * B * a;
  k.s = B * B * (2.0 * c + b) / c;
  k.q = 1.0 - k.p - k.s;
  return k;
}

double ez_closed(const ExpKernelParams& p, double t) {
  const double c = p.alpha - p.beta;
  return p.alpha / c * std::exp(c * t) - p.alpha / c;
}

double ez2_printed(const ExpKernelParams& p, double t) {
  const double a = p.alpha, b = p.beta, k = b - a, k2 = k * k;
  return -a * (2.0 * a + a * a) * std::exp(k * t) / k2 + a * a * (2.0 + b) / (2.0 * k2) +
         a * a * (2.0 + 2.0 * a - b) / (2.0 * k2) * std::exp(-2.0 * k * t);
}

// Solution of dE[Z^2]/dt = 2(alpha-beta) E[Z^2] + (2 alpha + alpha^2) E[Z] + alpha^2.
double ez2_derived(const ExpKernelParams& p, double t) {
  const double a = p.alpha, b = p.beta, k = b - a, k2 = k * k;
  return -a * (2.0 * a + a * a) * std::exp(-k * t) / k2 + a * a * (2.0 + b) / (2.0 * k2) +
         a * a * (2.0 + 2.0 * a - b) / (2.0 * k2) * std::exp(-2.0 * k * t);
}

double zz_printed(const ExpKernelParams& p, double s, double t) {
  const double a = p.alpha, b = p.beta, k = b - a, k2 = k * k, c = -k;
  return -a * (2.0 * a + a * a) / k2 * std::exp(k * s + 2.0 * c * t) +
         a * a * (2.0 + b) / (2.0 * k2) * std::exp(k * (s + t)) +
         a * a * (2.0 + 2.0 * a - b) / (2.0 * k2) * std::exp(k * (s - t)) -
         a * a / k2 * std::exp(c * t) + a * a / k2 * std::exp(k * (s - 2.0 * t)) -
         a / k2 * std::exp(k * (s - t)) + a / k2;
}

// E[Z_t | Z_s] = e^{-k(t-s)} Z_s + (alpha/k)(1 - e^{-k(t-s)}).
double zz_derived(const ExpKernelParams& p, double s, double t) {
  const double k = p.gap();
  const double decay = std::exp(-k * (t - s));
  return decay * ez2_derived(p, s) + p.alpha / k * (1.0 - decay) * ez_closed(p, s);
}

// With u <= s <= tau,
//   int_0^s E[Z_tau Z_u] du = e^{-k tau} int_0^s e^{ku} E[Z_u^2] du
//                            + (alpha/k) (int_0^s E[Z_u] du - e^{-k tau} int_0^s e^{ku} E[Z_u] du),
// so only three tau-independent quadratures are needed per s.
struct SeparableIntegrals {
  double weighted_ez2;  // int e^{ku} E[Z_u^2] du
  double weighted_ez;   // int e^{ku} E[Z_u] du
  double plain_ez;      // int E[Z_u] du
};

SeparableIntegrals separable_integrals(const ExpKernelParams& p, double s) {
  const double k = p.gap();
  const double rate = 2.0 * k + std::max(p.alpha, p.beta);
  SeparableIntegrals out{};
  out.weighted_ez2 = integrate([&](double u) { return std::exp(k * u) * ez2_derived(p, u); },
                               0.0, s, rate);
  out.weighted_ez = integrate([&](double u) { return std::exp(k * u) * ez_closed(p, u); }, 0.0,
                              s, rate);
  out.plain_ez = integrate([&](double u) { return ez_closed(p, u); }, 0.0, s, rate);
  return out;
}

// E[Z_tau N_s] = (1/alpha) E[Z_tau Z_s] + (beta/alpha) int_0^s E[Z_tau Z_u] du, Z_0 = 0,
// from N_s = Z_s/alpha + (beta/alpha) int_0^s Z_u du.
double zn_derived(const ExpKernelParams& p, double s, double tau, const SeparableIntegrals& in) {
  const double a = p.alpha, b = p.beta, k = p.gap();
  const double decay = std::exp(-k * tau);
  const double inner = decay * in.weighted_ez2 + a / k * (in.plain_ez - decay * in.weighted_ez);
  return zz_derived(p, s, tau) / a + b / a * inner;
}

double zn_printed(const ExpKernelParams& p, double s, double t) {
  const auto m = m_constants(p);
  const double k = p.gap(), c = -k;
  return m.m1_c * std::exp(k * s) + m.m2_c * std::exp(k * t) + m.m3_c * std::exp(c * t) +
         m.m4_c * std::exp(2.0 * c * t);
}

}  // namespace

MConstants m_constants(const ExpKernelParams& p) {
  const double a = p.alpha, b = p.beta, k = b - a, k3 = k * k * k;
  MConstants m{};
  m.m1_c = (2.0 * b - a) *
           (-2.0 * a * a * (2.0 + a) + a * a * (2.0 + b) + a * a * (2.0 + 2.0 * a - b) - 2.0 * a) /
           (2.0 * a * k3);
  m.m2_c = a * (2.0 + b) / (2.0 * k * k);
  m.m3_c = (a * (2.0 + 2.0 * a - b) * (2.0 * b - a - a * b) - k * (2.0 * a + 2.0)) / (2.0 * k3);
  m.m4_c = -a * (3.0 * b + a * b - 2.0 * a - a * a) / k3;
  return m;
}

double g1_closed(const ExpKernelParams& p, double t) {
  require_time(t);
  const double c = p.alpha - p.beta;
  return p.alpha / c * std::exp(c * t) - p.beta / c;
}

double g2_closed(const ExpKernelParams& p, double t, FormulaSet set) {
  require_time(t);
  const double a = p.alpha, b = p.beta, c = a - b;
  if (set == FormulaSet::printed) {
    return 2.0 * a * a / (c * c) * std::exp(2.0 * c * t) -
           (a * (a + b) / (c * c) + 2.0 * a * b * t / c) * std::exp(c * t) + b / (b - a);
  }
  const auto k = g2_coefficients(p);
  return k.p + (k.q + k.r * t) * std::exp(c * t) + k.s * std::exp(2.0 * c * t);
}

double mean_N1(const ExpKernelParams& p, double t) {
  require_time(t);
  const double a = p.alpha, b = p.beta, c = a - b;
  return a / (c * c) * std::expm1(c * t) - b * t / c;
}

double var_N1(const ExpKernelParams& p, double t, FormulaSet set) {
  require_time(t);
  const double a = p.alpha, b = p.beta, c = a - b;
  if (set == FormulaSet::printed) {
    return a * a / (c * c * c) * std::expm1(2.0 * c * t) - a / (c * c) * std::expm1(c * t) -
           2.0 * a * b * t / (c * c) * std::exp(c * t) + b * t / (b - a);
  }
  const auto k = g2_coefficients(p);
  const double e1 = std::expm1(c * t);
  return k.p * t + k.q * e1 / c + k.r * (t * std::exp(c * t) / c - e1 / (c * c)) +
         k.s * std::expm1(2.0 * c * t) / (2.0 * c);
}

ZMoments z_moments(const ExpKernelParams& p, double t, FormulaSet set) {
  require_time(t);
  const double ez = ez_closed(p, t);
  return {ez, set == FormulaSet::printed ? ez2_printed(p, t) : ez2_derived(p, t)};
}

double zz_cross(const ExpKernelParams& p, double s, double t, FormulaSet set) {
  require_order(s, t);
  return set == FormulaSet::printed ? zz_printed(p, s, t) : zz_derived(p, s, t);
}

double z_count_cross(const ExpKernelParams& p, double s, double t, FormulaSet set) {
  require_order(s, t);
  if (set == FormulaSet::printed) return zn_printed(p, s, t);
  return zn_derived(p, s, t, separable_integrals(p, s));
}

double cross_count_moment(const ExpKernelParams& p, double s, double t, FormulaSet set) {
  require_order(s, t);
  const double en_s = mean_N1(p, s);
  if (set == FormulaSet::printed) {
    const auto m = m_constants(p);
    const double k = p.gap(), c = -k;
    return (m.m1_c * std::exp(c * s) + en_s) * (t - s) +
           m.m2_c * (std::exp(k * t) - std::exp(k * s)) +
           m.m3_c * (std::exp(c * t) - std::exp(c * s)) +
           m.m4_c * (std::exp(2.0 * c * t) - std::exp(2.0 * c * s));
  }
  // E[N_s (N_t - N_s)] = (t - s) E[N_s] + int_s^t E[Z_tau N_s] dtau.
  const auto in = separable_integrals(p, s);
  const double rate = 2.0 * p.gap() + p.beta;
  const double tail =
      integrate([&](double tau) { return zn_derived(p, s, tau, in); }, s, t, rate);
  return (t - s) * en_s + tail;
}

double cov_N(const ExpKernelParams& p, double s, double t, FormulaSet set) {
  if (s > t) std::swap(s, t);
  const double en_s = mean_N1(p, s);
  return var_N1(p, s, set) + en_s * en_s + cross_count_moment(p, s, t, set) -
         en_s * mean_N1(p, t);
}

double cov_N_lambda(const ExpKernelParams& p, double t, FormulaSet set) {
  require_time(t);
  return z_count_cross(p, t, t, set) - ez_closed(p, t) * mean_N1(p, t);
}

double var_G(const ExpKernelParams& p, const ClaimMoments& claims, double t, FormulaSet set) {
  return claims.m1 * claims.m1 * var_N1(p, t, set) + claims.variance() * mean_N1(p, t);
}

double cov_G(const ExpKernelParams& p, const ClaimMoments& claims, double s, double t,
             FormulaSet set) {
  require_time(s);
  require_time(t);
  if (s > t) std::swap(s, t);
  return claims.m1 * claims.m1 * cov_N(p, s, t, set) + claims.variance() * mean_N1(p, s);
}

bool ValidationCheck::printed_ok(double n_se) const noexcept {
  return std::abs(printed - mc_mean) <= n_se * mc_se;
}

bool ValidationCheck::derived_ok(double n_se) const noexcept {
  return std::abs(derived - mc_mean) <= n_se * mc_se;
}

bool ValidationReport::printed_passes(double n_se) const noexcept {
  return std::all_of(checks.begin(), checks.end(),
                     [n_se](const auto& c) { return c.printed_ok(n_se); });
}

bool ValidationReport::derived_passes(double n_se) const noexcept {
  return std::all_of(checks.begin(), checks.end(),
                     [n_se](const auto& c) { return c.derived_ok(n_se); });
}

FormulaSet ValidationReport::selected(double n_se) const noexcept {
  return printed_passes(n_se) ? FormulaSet::printed : FormulaSet::derived;
}

ValidationReport validate_formulas(const ExpKernelParams& p, const ValidationOptions& options) {
  require(options.n_paths >= 2, ErrorCode::insufficient_samples, "validation needs >= 2 paths");
  double horizon = 0.0;
  std::vector<double> times;
  for (const auto& [s, t] : options.checkpoints) {
    require_order(s, t);
    horizon = std::max(horizon, t);
    times.push_back(s);
    times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  require(horizon > 0.0, ErrorCode::invalid_parameter, "validation needs a positive time");

  const auto kernel = ExcitingKernel::exponential(p.alpha, p.beta);
  const std::size_t n = options.n_paths, m = times.size();
  // Per path: N and Z at each distinct checkpoint time.
  std::vector<double> counts(n * m), states(n * m);
  parallel_for(n, options.threads, [&](std::size_t i) {
    const auto path = simulate_hawkes(kernel, 1.0, horizon, StreamKey{options.seed, i});
    for (std::size_t j = 0; j < m; ++j) {
      counts[i * m + j] = static_cast<double>(path.count_until(times[j]));
      double z = 0.0;
      for (double tau : path.event_times) {
        if (tau > times[j]) break;
        z += p.alpha * std::exp(-p.beta * (times[j] - tau));
      }
      states[i * m + j] = z;
    }
  });
  const auto column = [&](const std::vector<double>& data, double t) {
    const auto j = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) -
                                            times.begin());
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = data[i * m + j];
    return out;
  };
  const auto product = [](const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
    return out;
  };

  ValidationReport report;
  report.n_paths = n;
  const auto add = [&](std::string name, double s, double t, double printed, double derived,
                       double mc, double se) {
    report.checks.push_back({std::move(name), s, t, printed, derived, mc, se});
  };
  const auto add_mean = [&](std::string name, double s, double t, double printed,
                            double derived, const std::vector<double>& xs) {
    const auto st = stats::summarize(xs);
    add(std::move(name), s, t, printed, derived, st.mean(), st.std_err());
  };

  for (const auto& [s, t] : options.checkpoints) {
    const auto zs = column(states, s), zt = column(states, t);
    const auto ns = column(counts, s), nt = column(counts, t);
    add_mean("E[Z_t]", s, t, z_moments(p, t, FormulaSet::printed).ez,
             z_moments(p, t, FormulaSet::derived).ez, zt);
    add_mean("E[Z_t^2]", s, t, z_moments(p, t, FormulaSet::printed).ez2,
             z_moments(p, t, FormulaSet::derived).ez2, product(zt, zt));
    add_mean("E[Z_t Z_s]", s, t, zz_cross(p, s, t, FormulaSet::printed),
             zz_cross(p, s, t, FormulaSet::derived), product(zt, zs));
    add_mean("E[Z_t N_s]", s, t, z_count_cross(p, s, t, FormulaSet::printed),
             z_count_cross(p, s, t, FormulaSet::derived), product(zt, ns));
    std::vector<double> increment(n);
    for (std::size_t i = 0; i < n; ++i) increment[i] = ns[i] * (nt[i] - ns[i]);
    add_mean("E[N_s(N_t-N_s)]", s, t, cross_count_moment(p, s, t, FormulaSet::printed),
             cross_count_moment(p, s, t, FormulaSet::derived), increment);
    if (options.include_count_moments) {
      const auto v = stats::sample_variance(nt);
      add("Var[N_t]", s, t, var_N1(p, t, FormulaSet::printed), var_N1(p, t, FormulaSet::derived),
          v.variance, v.std_err);
    }
  }
  return report;
}

}  // namespace hawkesruin::analytic
