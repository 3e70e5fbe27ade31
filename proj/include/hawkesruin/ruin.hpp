#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>

#include "hawkesruin/analytic_exp.hpp"
#include "hawkesruin/kernels.hpp"
#include "hawkesruin/volterra.hpp"

namespace hawkesruin {

struct RuinProblem {
  double u = 0.0;
  double c = 0.0;
  double horizon = 1.0;
  ExcitingKernel kernel;
  ClaimDistribution claims;

  void validate() const;
};

enum class RuinMethod { mc_gaussian, mc_direct, asymptotic };

std::string_view to_string(RuinMethod method) noexcept;

// How the supremum over [0, T] is read off a discretised path.
//   grid        max over grid nodes only (biased low);
//   continuous  Gaussian: Brownian-bridge crossing probability between nodes
//               with local variance m2 int g1; direct: exact check at every
//               claim instant, where the pre-limit excess has its maxima.
enum class Monitoring { grid, continuous };

enum class ImportanceSampling { automatic, off, on };

struct GridBias {
  double refined_p_hat = 0.0;
  double difference = 0.0;       // refined - coarse, same paths
  double difference_se = 0.0;    // paired standard error
  bool within_two_se = true;     // |difference| < 2 * std_err of the estimate
};

struct RuinEstimate {
  double p_hat = 0.0;
  double std_err = 0.0;
  std::pair<double, double> ci95{0.0, 0.0};
  RuinMethod method = RuinMethod::mc_gaussian;
  Monitoring monitoring = Monitoring::continuous;
  std::size_t n_paths = 0;
  double grid_step = 0.0;
  std::uint64_t seed = 0;
  double mu = 0.0;                 // direct only
  bool importance_sampled = false;
  double tilt = 0.0;               // mean shift of G(T) under importance sampling
  std::optional<GridBias> bias;
  double piterbarg = 0.0;          // asymptotic only
  double tail = 0.0;               // asymptotic only, Psi((u + cT)/sigma(T))
};

inline constexpr std::size_t min_ruin_paths = 100;

// Psi argument above which automatic importance sampling kicks in.
inline constexpr double rare_event_threshold = 4.0;

struct GaussianRuinOptions {
  std::size_t n_paths = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  Monitoring monitoring = Monitoring::continuous;
  ImportanceSampling importance = ImportanceSampling::automatic;
  bool bias_check = true;
  analytic::FormulaSet formulas = analytic::default_formulas;
  double volterra_step = 1e-3;
};

// P(sup_{t<=T} G(t) - c t > u) from sampled paths of the Gaussian limit.
RuinEstimate ruin_mc_gaussian(const RuinProblem& problem, const TimeGrid& grid,
                              const GaussianRuinOptions& options = {});

struct DirectRuinOptions {
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  Monitoring monitoring = Monitoring::continuous;
  double volterra_step = 1e-3;
  std::size_t max_events = 10'000'000;
};

// Fraction of simulated pre-limit wealth paths U^mu that fall below zero.
RuinEstimate ruin_mc_direct(const RuinProblem& problem, double mu, const TimeGrid& grid,
                            const DirectRuinOptions& options = {});

// Closed-form ruin probability of u + c t - sigma B_t over [0, T]
// (reflection principle), sigma^2 the variance rate.
double brownian_ruin_probability(double u, double c, double horizon, double sigma2) noexcept;

// Values at the horizon T that feed the large-u asymptotic.
struct HorizonMoments {
  double g1 = 0.0;
  double g2 = 0.0;
  double int_g1 = 0.0;
  double int_g2 = 0.0;
  double cov_N_lambda = 0.0;
};

struct HorizonMomentOptions {
  double volterra_step = 1e-3;
  analytic::FormulaSet formulas = analytic::default_formulas;
  // Monte Carlo estimate of Cov(N_T, lambda_T) for kernels without closed forms.
  std::size_t mc_paths = 100000;
  std::uint64_t seed = 0xa5;
  unsigned threads = 1;
};

HorizonMoments horizon_moments(const RuinProblem& problem, const HorizonMomentOptions& options = {});

// How the correlation coefficient G~ enters the Piterbarg argument.
//   as_printed  R = N~/G~, rejected unless G~ > 0;
//   magnitude   R = N~/|G~|. G~/sigma(T)^2 is the slope of the standardised
//               covariance, which cannot be positive, so this is the only
//               reading that yields a usable constant. Opt-in.
enum class GTildeConvention { as_printed, magnitude };

struct AsymptoticInputs {
  double sigma_T = 0.0;
  double n_tilde = 0.0;
  double g_tilde = 0.0;
  double piterbarg_argument = 0.0;
  GTildeConvention convention = GTildeConvention::as_printed;
};

// Throws AsymptoticInapplicable when the convention yields no positive argument.
AsymptoticInputs asymptotic_inputs(const RuinProblem& problem, const HorizonMoments& moments,
                                   GTildeConvention convention = GTildeConvention::as_printed);

struct PiterbargOptions {
  double tolerance = 1e-2;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 0x917e;
  unsigned threads = 1;
  double initial_horizon = 1.0;
  double max_horizon = 1024.0;
  std::size_t min_doublings = 2;
};

struct PiterbargEstimate {
  double value = 0.0;
  double std_err = 0.0;
  double closed_form = 0.0;   // 1 + 1/R
  double horizon = 0.0;       // final S
  double step = 0.0;
  double last_relative_change = 0.0;
  std::size_t doublings = 0;
};

// E[exp(sup_{0<=t<=S} sqrt2 B(t) - (1+R) t)], S doubled until the relative
// change drops below tolerance. Paths are extended, not redrawn, between
// doublings. Throws NoConvergence past max_horizon.
PiterbargEstimate piterbarg_constant(double R, const PiterbargOptions& options = {});

// P ~ P_1^R Psi((u + cT)/sigma(T)).
RuinEstimate ruin_asymptotic(const RuinProblem& problem, const AsymptoticInputs& inputs,
                             const PiterbargOptions& options = {});

}  // namespace hawkesruin
