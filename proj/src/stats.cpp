#include "hawkesruin/stats.hpp"

#include <algorithm>

namespace hawkesruin::stats {

double kolmogorov_survival(double x) noexcept {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;  // series converges badly; survival is 1 to double precision
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double stephens_p(double d, double effective_n) {
  const double sq = std::sqrt(effective_n);
  return kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
}

}  // namespace

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, hi - f, f - lo});
  }
  return {d, samples.empty() ? 1.0 : stephens_p(d, n)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  if (a.empty() || b.empty()) return {0.0, 1.0};
  return {d, stephens_p(d, na * nb / (na + nb))};
}

void RunningStats::add(double x) noexcept {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) noexcept {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double total = static_cast<double>(n_ + other.n_);
  const double delta = other.mean_ - mean_;
  mean_ += delta * static_cast<double>(other.n_) / total;
  m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / total;
  n_ += other.n_;
}

RunningStats summarize(std::span<const double> xs) noexcept {
  RunningStats st;
  for (double x : xs) st.add(x);
  return st;
}

VarianceEstimate sample_variance(std::span<const double> xs) noexcept {
  const auto st = summarize(xs);
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 4) return {st.variance(), 0.0};
  double m4 = 0.0;
  for (double x : xs) {
    const double d = x - st.mean();
    m4 += d * d * d * d;
  }
  m4 /= n;
  const double s2 = st.variance();
  // Var(s^2) ~ (m4 - (n-3)/(n-1) sigma^4) / n
  const double var_s2 = (m4 - (n - 3.0) / (n - 1.0) * s2 * s2) / n;
  return {s2, std::sqrt(std::max(var_s2, 0.0))};
}

}  // namespace hawkesruin::stats
