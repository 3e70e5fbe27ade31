#include "hawkesruin/volterra.hpp"

#include <cmath>
#include <ostream>

#include "hawkesruin/io.hpp"

namespace hawkesruin {

TimeGrid::TimeGrid(double t_max, double step) : t_max_(t_max), step_(step) {
  require(std::isfinite(t_max) && t_max > 0.0, ErrorCode::invalid_parameter,
          "grid.t_max: must be > 0");
  require(std::isfinite(step) && step > 0.0 && step <= t_max, ErrorCode::invalid_parameter,
          "grid.step: must satisfy 0 < step <= t_max");
  n_points_ = static_cast<std::size_t>(std::floor(t_max / step + 1e-9)) + 1;
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> out(n_points_);
  for (std::size_t k = 0; k < n_points_; ++k) out[k] = node(k);
  return out;
}

std::size_t TimeGrid::index_of(double t) const {
  const double k = std::round(t / step_);
  require(k >= 0.0 && k < static_cast<double>(n_points_) && std::abs(t / step_ - k) < 1e-9,
          ErrorCode::grid_mismatch, "time is not a node of the grid");
  return static_cast<std::size_t>(k);
}

GridFunction::GridFunction(TimeGrid g, std::vector<double> v)
    : grid(g), values(std::move(v)) {
  require(values.size() == grid.size(), ErrorCode::grid_mismatch,
          "grid function length does not match its grid");
}

double GridFunction::at(double t) const noexcept {
  if (t <= 0.0) return values.front();
  const double x = t / grid.step();
  const auto k = static_cast<std::size_t>(x);
  if (k + 1 >= values.size()) return values.back();
  const double w = x - static_cast<double>(k);
  return (1.0 - w) * values[k] + w * values[k + 1];
}

namespace {

std::vector<double> kernel_on_lags(const ExcitingKernel& kernel, const TimeGrid& grid) {
  std::vector<double> h(grid.size());
  for (std::size_t k = 0; k < h.size(); ++k) h[k] = kernel(grid.node(k));
  return h;
}

// Trapezoidal convolution quadrature for y(t) = f(t) + int_0^t h(t-s) y(s) ds,
// with the current node treated implicitly.
std::vector<double> solve_renewal(const std::vector<double>& h, const std::vector<double>& forcing,
                                  double step) {
  const std::size_t n = forcing.size();
  const double diag = 1.0 - 0.5 * step * h[0];
  require(diag > 0.0, ErrorCode::invalid_parameter,
          "volterra: step * h(0) must be < 2 for the trapezoidal scheme");
  std::vector<double> y(n);
  y[0] = forcing[0];
  for (std::size_t i = 1; i < n; ++i) {
    double conv = 0.5 * h[i] * y[0];
    for (std::size_t j = 1; j < i; ++j) conv += h[i - j] * y[j];
    y[i] = (forcing[i] + step * conv) / diag;
  }
  return y;
}

}  // namespace

GridFunction solve_g1(const ExcitingKernel& kernel, const TimeGrid& grid) {
  require_stable(kernel);
  const auto h = kernel_on_lags(kernel, grid);
  return GridFunction(grid, solve_renewal(h, std::vector<double>(grid.size(), 1.0), grid.step()));
}

GridFunction solve_g2(const ExcitingKernel& kernel, const GridFunction& g1) {
  require_stable(kernel);
  const auto h = kernel_on_lags(kernel, g1.grid);
  std::vector<double> forcing(g1.values.size());
  for (std::size_t i = 0; i < forcing.size(); ++i) forcing[i] = g1[i] * g1[i];
  return GridFunction(g1.grid, solve_renewal(h, forcing, g1.grid.step()));
}

GridFunction cumulative_integral(const GridFunction& f) {
  std::vector<double> out(f.values.size(), 0.0);
  const double half = 0.5 * f.grid.step();
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = out[i - 1] + half * (f[i] + f[i - 1]);
  return GridFunction(f.grid, std::move(out));
}

CountMoments count_moments(double mu, const GridFunction& g1, const GridFunction& g2) {
  require(std::isfinite(mu) && mu > 0.0, ErrorCode::invalid_parameter, "mu: must be > 0");
  require(g1.grid == g2.grid, ErrorCode::grid_mismatch, "count_moments: g1 and g2 grids differ");
  auto mean = cumulative_integral(g1);
  auto var = cumulative_integral(g2);
  for (auto& v : mean.values) v *= mu;
  for (auto& v : var.values) v *= mu;
  return {std::move(mean), std::move(var)};
}

GridFunction sigma_function(const ClaimDistribution& claims, const GridFunction& g1,
                            const GridFunction& g2) {
  require(g1.grid == g2.grid, ErrorCode::grid_mismatch, "sigma_function: g1 and g2 grids differ");
  const auto m = claims.moments();
  const auto i1 = cumulative_integral(g1);
  const auto i2 = cumulative_integral(g2);
  std::vector<double> out(g1.values.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::sqrt(m.m1 * m.m1 * i2[k] + m.variance() * i1[k]);
  }
  return GridFunction(g1.grid, std::move(out));
}

MomentFunctions solve_moment_functions(const ExcitingKernel& kernel, const TimeGrid& grid) {
  auto g1 = solve_g1(kernel, grid);
  auto g2 = solve_g2(kernel, g1);
  auto i1 = cumulative_integral(g1);
  auto i2 = cumulative_integral(g2);
  return {std::move(g1), std::move(g2), std::move(i1), std::move(i2)};
}

void write_csv(std::ostream& out, const GridFunction& f, std::string_view value_name) {
  io::CsvWriter csv(out, {"t", value_name});
  for (std::size_t k = 0; k < f.values.size(); ++k) csv.row({f.grid.node(k), f[k]});
}

}  // namespace hawkesruin
