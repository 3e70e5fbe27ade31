#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hawkesruin/kernels.hpp"

// Closed-form moments of the unit-baseline Hawkes process with kernel
// h(t) = alpha exp(-beta t), alpha < beta. Z_t = lambda_t - 1 is the
// excitation state; N_t counts events in (0, t].
//
// Two formula sets are provided. `printed` reproduces the reference closed-form
// expressions term by term. Several of them fail Monte Carlo validation (see
// validate_formulas), so `derived` is the default: it re-derives every
// quantity from the renewal equations and the generator of Z, using exact
// exponential algebra where that is short and Gauss-Legendre quadrature of
// the verified E[Z_t Z_s] kernel for the cross moments with N.
namespace hawkesruin::analytic {

enum class FormulaSet { printed, derived };

inline constexpr FormulaSet default_formulas = FormulaSet::derived;

struct ExpKernelParams {
  double alpha;
  double beta;

  // Requires 0 < alpha < beta with relative gap (beta - alpha)/beta >= 1e-6.
  ExpKernelParams(double alpha, double beta);

  double gap() const noexcept { return beta - alpha; }
};

struct MConstants {
  double m1_c;
  double m2_c;
  double m3_c;
  double m4_c;
};

// Transcribed coefficients of E[Z_tau N_s]; used only by the printed set.
MConstants m_constants(const ExpKernelParams& p);

double g1_closed(const ExpKernelParams& p, double t);
double g2_closed(const ExpKernelParams& p, double t, FormulaSet set = default_formulas);

double mean_N1(const ExpKernelParams& p, double t);
double var_N1(const ExpKernelParams& p, double t, FormulaSet set = default_formulas);

struct ZMoments {
  double ez;
  double ez2;
};

ZMoments z_moments(const ExpKernelParams& p, double t, FormulaSet set = default_formulas);

// E[Z_t Z_s], 0 <= s <= t.
double zz_cross(const ExpKernelParams& p, double s, double t, FormulaSet set = default_formulas);

// E[Z_t N_s], 0 <= s <= t.
double z_count_cross(const ExpKernelParams& p, double s, double t,
                     FormulaSet set = default_formulas);

// E[N_s (N_t - N_s)], 0 <= s <= t.
double cross_count_moment(const ExpKernelParams& p, double s, double t,
                          FormulaSet set = default_formulas);

// Cov(N_s, N_t) for any ordering.
double cov_N(const ExpKernelParams& p, double s, double t, FormulaSet set = default_formulas);

// Cov(N_t, lambda_t) = E[Z_t N_t] - E[Z_t] E[N_t].
double cov_N_lambda(const ExpKernelParams& p, double t, FormulaSet set = default_formulas);

double var_G(const ExpKernelParams& p, const ClaimMoments& claims, double t,
             FormulaSet set = default_formulas);

// Cov(G(s), G(t)), symmetric in (s, t).
double cov_G(const ExpKernelParams& p, const ClaimMoments& claims, double s, double t,
             FormulaSet set = default_formulas);

// Monte Carlo validation of each closed form against simulated unit-baseline
// paths at the (s, t) checkpoints.
struct ValidationCheck {
  std::string quantity;  // "E[Z_t]", "E[Z_t^2]", "E[Z_t Z_s]", "E[Z_t N_s]", "E[N_s(N_t-N_s)]", ...
  double s;
  double t;
  double printed;
  double derived;
  double mc_mean;
  double mc_se;

  double printed_z() const noexcept { return (printed - mc_mean) / mc_se; }
  double derived_z() const noexcept { return (derived - mc_mean) / mc_se; }
  bool printed_ok(double n_se = 3.0) const noexcept;
  bool derived_ok(double n_se = 3.0) const noexcept;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  std::size_t n_paths = 0;

  bool printed_passes(double n_se = 3.0) const noexcept;
  bool derived_passes(double n_se = 3.0) const noexcept;
  // The set the module should run with: printed if it passes, otherwise the
  // numeric derivation.
  FormulaSet selected(double n_se = 3.0) const noexcept;
};

struct ValidationOptions {
  std::vector<std::pair<double, double>> checkpoints{{0.5, 0.8}, {0.5, 1.0}, {1.0, 1.0}};
  std::size_t n_paths = 100000;
  std::uint64_t seed = 0x5eed;
  unsigned threads = 1;
  // Also gate g2 / Var[N_t] (count moments) at each t.
  bool include_count_moments = true;
};

ValidationReport validate_formulas(const ExpKernelParams& p,
                                   const ValidationOptions& options = {});

}  // namespace hawkesruin::analytic
