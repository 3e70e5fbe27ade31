#include "hawkesruin/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hawkesruin {

namespace {

constexpr double kMonotoneSlack = 1e-12;

bool finite(double x) { return std::isfinite(x); }

}  // namespace

ExcitingKernel ExcitingKernel::zero() { return ExcitingKernel(ZeroKernel{}); }

ExcitingKernel ExcitingKernel::exponential(double alpha, double beta) {
  require(finite(alpha) && alpha >= 0.0, ErrorCode::invalid_parameter,
          "kernel.alpha: must be finite and >= 0");
  require(finite(beta) && beta > 0.0, ErrorCode::invalid_parameter,
          "kernel.beta: must be finite and > 0");
  return ExcitingKernel(ExponentialKernel{alpha, beta});
}

ExcitingKernel ExcitingKernel::tabulated(std::vector<double> times, std::vector<double> values) {
  require(times.size() == values.size(), ErrorCode::invalid_parameter,
          "kernel.tabulated: times and values differ in length");
  require(times.size() >= 2, ErrorCode::invalid_parameter,
          "kernel.tabulated: at least two nodes required");
  require(times.front() == 0.0, ErrorCode::invalid_parameter,
          "kernel.tabulated: first node must be t = 0");
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(finite(times[i]) && finite(values[i]), ErrorCode::invalid_parameter,
            "kernel.tabulated: non-finite entry");
    require(values[i] >= 0.0, ErrorCode::invalid_parameter,
            "kernel.tabulated: values must be nonnegative");
    if (i > 0) {
      require(times[i] > times[i - 1], ErrorCode::invalid_parameter,
              "kernel.tabulated: times must be strictly increasing");
    }
  }
  return ExcitingKernel(TabulatedKernel{std::move(times), std::move(values)});
}

double ExcitingKernel::operator()(double t) const {
  if (t < 0.0) return 0.0;
  return std::visit(
      [t](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ZeroKernel>) {
          return 0.0;
        } else if constexpr (std::is_same_v<K, ExponentialKernel>) {
          return k.alpha * std::exp(-k.beta * t);
        } else {
          const auto& ts = k.times;
          if (t > ts.back()) return 0.0;
          const auto it = std::upper_bound(ts.begin(), ts.end(), t);
          if (it == ts.end()) return k.values.back();
          const auto i = static_cast<std::size_t>(it - ts.begin());
          const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
          return (1.0 - w) * k.values[i - 1] + w * k.values[i];
        }
      },
      kernel_);
}

bool ExcitingKernel::is_zero() const noexcept {
  if (std::holds_alternative<ZeroKernel>(kernel_)) return true;
  if (const auto* e = std::get_if<ExponentialKernel>(&kernel_)) return e->alpha == 0.0;
  const auto& tab = std::get<TabulatedKernel>(kernel_);
  return std::all_of(tab.values.begin(), tab.values.end(), [](double v) { return v == 0.0; });
}

const ExponentialKernel* ExcitingKernel::as_exponential() const noexcept {
  return std::get_if<ExponentialKernel>(&kernel_);
}

const TabulatedKernel* ExcitingKernel::as_tabulated() const noexcept {
  return std::get_if<TabulatedKernel>(&kernel_);
}

bool ExcitingKernel::is_decreasing() const {
  const auto* tab = as_tabulated();
  if (!tab) return true;
  for (std::size_t i = 1; i < tab->values.size(); ++i) {
    if (tab->values[i] > tab->values[i - 1] + kMonotoneSlack) return false;
  }
  return true;
}

double ExcitingKernel::first_moment() const {
  return std::visit(
      [](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ZeroKernel>) {
          return 0.0;
        } else if constexpr (std::is_same_v<K, ExponentialKernel>) {
          return k.alpha / (k.beta * k.beta);
        } else {
          // Exact for the piecewise-linear interpolant.
          double total = 0.0;
          for (std::size_t i = 1; i < k.times.size(); ++i) {
            const double a = k.times[i - 1], b = k.times[i];
            const double fa = k.values[i - 1], fb = k.values[i];
            const double d = b - a;
            total += d * (fa * (2.0 * a + b) + fb * (a + 2.0 * b)) / 6.0;
          }
          return total;
        }
      },
      kernel_);
}

double ExcitingKernel::support_end() const noexcept {
  if (std::holds_alternative<ZeroKernel>(kernel_)) return 0.0;
  if (const auto* tab = as_tabulated()) return tab->times.back();
  return std::numeric_limits<double>::infinity();
}

double l1_norm(const ExcitingKernel& kernel) {
  return std::visit(
      [](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ZeroKernel>) {
          return 0.0;
        } else if constexpr (std::is_same_v<K, ExponentialKernel>) {
          return k.alpha / k.beta;
        } else {
          const std::size_t n = k.values.size();
          require(k.values[n - 1] <= k.values[n - 2] + kMonotoneSlack,
                  ErrorCode::integral_divergence,
                  "kernel.tabulated: tail still increasing at the last node");
          double total = 0.0;
          for (std::size_t i = 1; i < n; ++i) {
            total += 0.5 * (k.values[i] + k.values[i - 1]) * (k.times[i] - k.times[i - 1]);
          }
          return total;
        }
      },
      kernel.variant());
}

StabilityReport stability_check(const ExcitingKernel& kernel) {
  StabilityReport report;
  report.norm = l1_norm(kernel);
  report.stable = report.norm < 1.0;
  if (const auto* e = kernel.as_exponential()) {
    report.closed_forms_valid = e->alpha < e->beta;
  }
  return report;
}

void require_stable(const ExcitingKernel& kernel) {
  const auto report = stability_check(kernel);
  if (!report.stable) {
    std::ostringstream msg;
    msg << "kernel: L1 norm " << report.norm << " >= 1 (explosive process)";
    fail(ErrorCode::unstable_kernel, msg.str());
  }
}

void require_limit_assumptions(const ExcitingKernel& kernel) {
  require(kernel.is_decreasing(), ErrorCode::invalid_parameter,
          "kernel: the Gaussian limit needs a decreasing exciting function");
  require(std::isfinite(kernel.first_moment()), ErrorCode::invalid_parameter,
          "kernel: the Gaussian limit needs int t h(t) dt < inf");
}

ClaimDistribution ClaimDistribution::exponential(double rate) {
  require(finite(rate) && rate > 0.0, ErrorCode::invalid_parameter,
          "claims.rate: must be finite and > 0");
  return ClaimDistribution(ExponentialClaims{rate});
}

ClaimDistribution ClaimDistribution::gamma(double shape, double rate) {
  require(finite(shape) && shape > 0.0, ErrorCode::invalid_parameter,
          "claims.shape: must be finite and > 0");
  require(finite(rate) && rate > 0.0, ErrorCode::invalid_parameter,
          "claims.rate: must be finite and > 0");
  return ClaimDistribution(GammaClaims{shape, rate});
}

ClaimDistribution ClaimDistribution::moments_only(double m1, double m2) {
  require(finite(m1) && m1 > 0.0, ErrorCode::invalid_parameter,
          "claims.m1: must be finite and > 0");
  require(finite(m2) && m2 >= m1 * m1, ErrorCode::invalid_parameter,
          "claims.m2: must satisfy m2 >= m1^2");
  return ClaimDistribution(MomentClaims{m1, m2});
}

ClaimMoments ClaimDistribution::moments() const noexcept {
  return std::visit(
      [](const auto& c) -> ClaimMoments {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, ExponentialClaims>) {
          return {1.0 / c.rate, 2.0 / (c.rate * c.rate)};
        } else if constexpr (std::is_same_v<C, GammaClaims>) {
          return {c.shape / c.rate, c.shape * (c.shape + 1.0) / (c.rate * c.rate)};
        } else {
          return {c.m1, c.m2};
        }
      },
      claims_);
}

bool ClaimDistribution::samplable() const noexcept {
  return !std::holds_alternative<MomentClaims>(claims_);
}

ClaimMoments claim_moments(const ClaimDistribution& claims) noexcept { return claims.moments(); }

}  // namespace hawkesruin
