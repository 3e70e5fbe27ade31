#pragma once

#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "hawkesruin/error.hpp"

namespace hawkesruin {

struct ZeroKernel {};

// h(t) = alpha * exp(-beta * t)
struct ExponentialKernel {
  double alpha = 0.0;
  double beta = 1.0;
};

// Piecewise-linear kernel through (times[i], values[i]); zero past the last
// node. times[0] must be 0.
struct TabulatedKernel {
  std::vector<double> times;
  std::vector<double> values;
};

// The exciting function of a linear Hawkes process. Immutable once built.
class ExcitingKernel {
 public:
  using Variant = std::variant<ZeroKernel, ExponentialKernel, TabulatedKernel>;

  ExcitingKernel() = default;

  static ExcitingKernel zero();
  static ExcitingKernel exponential(double alpha, double beta);
  static ExcitingKernel tabulated(std::vector<double> times, std::vector<double> values);

  double operator()(double t) const;

  const Variant& variant() const noexcept { return kernel_; }
  bool is_zero() const noexcept;
  const ExponentialKernel* as_exponential() const noexcept;
  const TabulatedKernel* as_tabulated() const noexcept;

  // Non-strict monotone decrease with 1e-12 slack between nodes.
  bool is_decreasing() const;
  // Integral of t * h(t) over [0, inf).
  double first_moment() const;
  // Smallest t beyond which h vanishes identically (infinity when none).
  double support_end() const noexcept;

 private:
  explicit ExcitingKernel(Variant k) : kernel_(std::move(k)) {}
  Variant kernel_{ZeroKernel{}};
};

// L1 norm of h. Exponential kernels return alpha/beta exactly; tabulated ones
// use the trapezoid rule with h = 0 past the grid. Throws IntegralDivergence
// when the tabulated tail is still rising at the last node.
double l1_norm(const ExcitingKernel& kernel);

struct StabilityReport {
  bool stable = false;
  double norm = 0.0;
  // Set for exponential kernels only: alpha < beta, so the closed forms apply.
  std::optional<bool> closed_forms_valid;
};

StabilityReport stability_check(const ExcitingKernel& kernel);

// Throws UnstableKernel when ||h|| >= 1.
void require_stable(const ExcitingKernel& kernel);

// Throws InvalidParameter unless h is decreasing with a finite first moment,
// the assumptions of the Gaussian limit theorem.
void require_limit_assumptions(const ExcitingKernel& kernel);

struct ClaimMoments {
  double m1 = 0.0;
  double m2 = 0.0;

  double variance() const noexcept { return m2 - m1 * m1; }
};

struct ExponentialClaims {
  double rate = 1.0;
};

struct GammaClaims {
  double shape = 1.0;
  double rate = 1.0;
};

struct MomentClaims {
  double m1 = 1.0;
  double m2 = 1.0;
};

class ClaimDistribution {
 public:
  using Variant = std::variant<ExponentialClaims, GammaClaims, MomentClaims>;

  ClaimDistribution() = default;

  static ClaimDistribution exponential(double rate);
  static ClaimDistribution gamma(double shape, double rate);
  static ClaimDistribution moments_only(double m1, double m2);

  ClaimMoments moments() const noexcept;
  bool samplable() const noexcept;
  const Variant& variant() const noexcept { return claims_; }

  // Throws NotSamplable for MomentsOnly.
  template <class Engine>
  double sample(Engine& engine) const;

 private:
  explicit ClaimDistribution(Variant c) : claims_(c) {}
  Variant claims_{ExponentialClaims{}};
};

ClaimMoments claim_moments(const ClaimDistribution& claims) noexcept;

template <class Engine>
double ClaimDistribution::sample(Engine& engine) const {
  if (const auto* e = std::get_if<ExponentialClaims>(&claims_)) {
    return std::exponential_distribution<double>(e->rate)(engine);
  }
  if (const auto* g = std::get_if<GammaClaims>(&claims_)) {
    return std::gamma_distribution<double>(g->shape, 1.0 / g->rate)(engine);
  }
  fail(ErrorCode::not_samplable, "claim distribution given by moments only cannot be sampled");
}

}  // namespace hawkesruin
