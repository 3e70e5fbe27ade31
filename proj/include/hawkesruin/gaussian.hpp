#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hawkesruin/analytic_exp.hpp"
#include "hawkesruin/covariance.hpp"
#include "hawkesruin/kernels.hpp"
#include "hawkesruin/rng.hpp"
#include "hawkesruin/volterra.hpp"

namespace hawkesruin {

struct CovarianceBuildOptions {
  analytic::FormulaSet formulas = analytic::default_formulas;
  // Monte Carlo route for kernels without closed forms.
  std::size_t mc_paths = 20000;
  double mc_mu = 1.0;
  std::uint64_t seed = 0xc0fa;
  unsigned threads = 1;
  double volterra_step = 1e-3;
  double shrinkage = 0.01;
};

inline constexpr std::size_t min_covariance_paths = 1000;

// Covariance of the Gaussian limit G on the grid. Exponential kernels use the
// closed forms, the zero kernel gives m2 min(s, t), anything else takes its
// diagonal from the integral equations and correlations from Monte Carlo,
// shrunk toward the identity.
CovarianceModel build_covariance(const ExcitingKernel& kernel, const ClaimDistribution& claims,
                                 const TimeGrid& grid, const CovarianceBuildOptions& options = {});

class GaussianSampler {
 public:
  explicit GaussianSampler(CovarianceModel model);

  const CovarianceModel& model() const noexcept { return model_; }
  const Eigen::MatrixXd& cholesky() const noexcept { return lower_; }
  // Relative diagonal jitter eps that made the factorisation succeed (0 if none needed).
  double jitter() const noexcept { return jitter_; }
  std::size_t dimension() const noexcept { return dim_; }

  // out[k] = (L z)[k] for given standard normals z (both of length dimension()).
  void transform(std::span<const double> z, std::span<double> out) const noexcept;
  // Values at every grid node including the pinned zero at t = 0.
  GridFunction sample(Philox4x32& engine) const;

 private:
  CovarianceModel model_;
  Eigen::MatrixXd lower_;
  std::vector<double> packed_;  // row-major lower triangle
  std::size_t dim_ = 0;
  double jitter_ = 0.0;
};

std::vector<GridFunction> sample_G(const GaussianSampler& sampler, std::size_t n_paths,
                                   std::uint64_t seed, unsigned threads = 1);

struct FcltReport {
  double mu = 0.0;
  std::size_t n_paths = 0;
  double horizon = 0.0;
  double model_variance_T = 0.0;
  double sample_variance_T = 0.0;
  double sample_mean_T = 0.0;
  double ks_statistic = 0.0;
  double ks_p_value = 0.0;
  double max_cov_deviation_se = 0.0;  // max |emp - model| / SE over entries
  std::size_t worst_i = 0;
  std::size_t worst_j = 0;
  CovarianceSource model_source = CovarianceSource::analytic_exponential;
};

struct FcltOptions {
  std::uint64_t seed = 0xf1c7;
  unsigned threads = 1;
  // Variance the terminal marginal is tested against; defaults to the model's.
  std::optional<double> reference_variance;
  CovarianceBuildOptions covariance;
};

FcltReport fclt_check(const ExcitingKernel& kernel, const ClaimDistribution& claims, double mu,
                      const TimeGrid& grid, std::size_t n_paths, const FcltOptions& options = {});

}  // namespace hawkesruin
