#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "hawkesruin/kernels.hpp"
#include "hawkesruin/rng.hpp"
#include "hawkesruin/volterra.hpp"

namespace hawkesruin {

struct HawkesPath {
  std::vector<double> event_times;  // strictly increasing, in (0, horizon]
  double horizon = 0.0;
  double mu = 0.0;

  std::size_t count_until(double t) const noexcept;  // N(0, t]
};

struct CompoundPath {
  HawkesPath events;
  std::vector<double> claim_sizes;

  double aggregate_until(double t) const noexcept;  // X_t
};

struct SimulationLimits {
  std::size_t max_events = 10'000'000;
  // Route exponential kernels through the full-history sampler as well.
  bool force_generic = false;
};

// sum over events tau_i < t of h(t - tau_i), i.e. lambda(t) - mu.
double excitation_at(const ExcitingKernel& kernel, const HawkesPath& path, double t);

// Ogata thinning. Exponential kernels carry the Markov excitation state and
// cost O(1) per candidate; other kernels re-evaluate the full history.
HawkesPath simulate_hawkes(const ExcitingKernel& kernel, double mu, double horizon,
                           Philox4x32& engine, const SimulationLimits& limits = {});
HawkesPath simulate_hawkes(const ExcitingKernel& kernel, double mu, double horizon,
                           StreamKey key, const SimulationLimits& limits = {});

CompoundPath simulate_compound(const ExcitingKernel& kernel, double mu, double horizon,
                               const ClaimDistribution& claims, Philox4x32& engine,
                               const SimulationLimits& limits = {});
CompoundPath simulate_compound(const ExcitingKernel& kernel, double mu, double horizon,
                               const ClaimDistribution& claims, StreamKey key,
                               const SimulationLimits& limits = {});

struct RiskPathConfig {
  double u = 0.0;
  double c = 0.0;
  double mu = 1.0;
  ClaimDistribution claims;
  ExcitingKernel kernel;
  double horizon = 1.0;

  void validate() const;
};

// Pre-limit wealth process
//   U_t = u + c t + sqrt(mu) m1 int_0^t g1 - X_t / sqrt(mu)
// where the premium carries the exact compensator of the scaled claims.
class RiskPathSimulator {
 public:
  RiskPathSimulator(RiskPathConfig config, double volterra_step = 1e-3,
                    SimulationLimits limits = {});

  const RiskPathConfig& config() const noexcept { return config_; }
  // int_0^t g1 from the integral-equation solution, linearly interpolated.
  double compensator(double t) const noexcept { return int_g1_.at(t); }

  CompoundPath simulate_claims(StreamKey key) const;
  // Scaled centred claims (X_t - mu m1 int g1)/sqrt(mu) at each grid node.
  GridFunction scaled_claims(const CompoundPath& path, const TimeGrid& grid) const;
  GridFunction wealth(const CompoundPath& path, const TimeGrid& grid) const;
  GridFunction simulate_wealth(const TimeGrid& grid, StreamKey key) const;

  // Largest value of (X_t - mu m1 int g1)/sqrt(mu) - c t over all t in
  // [0, horizon]; attained at an event time or at t = 0.
  double running_max_excess(const CompoundPath& path) const;

 private:
  RiskPathConfig config_;
  SimulationLimits limits_;
  GridFunction int_g1_;
};

GridFunction simulate_risk_path(const RiskPathConfig& config, const TimeGrid& grid,
                                StreamKey key);

// Scaled centred compound Hawkes paths on a grid, one stream per path index.
std::vector<GridFunction> simulate_scaled_claims(const ExcitingKernel& kernel,
                                                 const ClaimDistribution& claims, double mu,
                                                 const TimeGrid& grid, std::size_t n_paths,
                                                 std::uint64_t seed, unsigned threads = 1,
                                                 double volterra_step = 1e-3);

void write_events_csv(std::ostream& out, std::span<const CompoundPath> paths);

}  // namespace hawkesruin

#include "hawkesruin/covariance.hpp"

namespace hawkesruin {

// Unbiased sample covariance across paths at nodes t_1 .. t_{n-1}, with
// entrywise standard errors from the sample variance of the centred products.
CovarianceModel empirical_cov(std::span<const GridFunction> paths);

}  // namespace hawkesruin
