#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hawkesruin::stats {

// Upper tail of the standard normal, 0.5 erfc(x / sqrt 2).
inline double normal_tail(double x) noexcept { return 0.5 * std::erfc(x / std::sqrt(2.0)); }
inline double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Kolmogorov survival function Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_survival(double x) noexcept;

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample test against a continuous cdf, Stephens' finite-n correction.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

// Two-sample test; ties are handled by stepping through equal values together.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Welford accumulator.
class RunningStats {
 public:
  void add(double x) noexcept;
  void merge(const RunningStats& other) noexcept;

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_err() const noexcept {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Mean and standard error of a sample.
RunningStats summarize(std::span<const double> xs) noexcept;

struct VarianceEstimate {
  double variance = 0.0;
  double std_err = 0.0;  // from the fourth central moment
};

VarianceEstimate sample_variance(std::span<const double> xs) noexcept;

}  // namespace hawkesruin::stats
