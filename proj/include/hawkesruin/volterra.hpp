#pragma once

#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "hawkesruin/kernels.hpp"

namespace hawkesruin {

// Uniform grid t_k = k * step, k = 0 .. n_points-1, n_points = floor(t_max/step) + 1.
class TimeGrid {
 public:
  TimeGrid(double t_max, double step);

  double t_max() const noexcept { return t_max_; }
  double step() const noexcept { return step_; }
  std::size_t size() const noexcept { return n_points_; }
  double node(std::size_t k) const noexcept { return static_cast<double>(k) * step_; }
  double last() const noexcept { return node(n_points_ - 1); }
  std::vector<double> nodes() const;

  // Index of the node equal to t (within 1e-9 steps); throws GridMismatch otherwise.
  std::size_t index_of(double t) const;

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) noexcept {
    return a.n_points_ == b.n_points_ && a.step_ == b.step_;
  }

 private:
  double t_max_;
  double step_;
  std::size_t n_points_;
};

struct GridFunction {
  TimeGrid grid;
  std::vector<double> values;

  GridFunction(TimeGrid g, std::vector<double> v);

  double operator[](std::size_t k) const noexcept { return values[k]; }
  double back() const noexcept { return values.back(); }
  // Linear interpolation; constant extrapolation past the last node.
  double at(double t) const noexcept;
};

// g1(t) = 1 + int_0^t h(t-s) g1(s) ds by implicit trapezoidal time stepping.
GridFunction solve_g1(const ExcitingKernel& kernel, const TimeGrid& grid);

// g2(t) = int_0^t h(t-s) g2(s) ds + g1(t)^2 on the grid of g1.
GridFunction solve_g2(const ExcitingKernel& kernel, const GridFunction& g1);

// Running trapezoidal integral, zero at t = 0.
GridFunction cumulative_integral(const GridFunction& f);

struct CountMoments {
  GridFunction mean;
  GridFunction variance;
};

// E[N_t] = mu int g1, Var[N_t] = mu int g2.
CountMoments count_moments(double mu, const GridFunction& g1, const GridFunction& g2);

// sigma(t) = sqrt(m1^2 int g2 + (m2 - m1^2) int g1), the standard deviation of G.
GridFunction sigma_function(const ClaimDistribution& claims, const GridFunction& g1,
                            const GridFunction& g2);

// Bundle of everything the downstream modules read from the integral equations.
struct MomentFunctions {
  GridFunction g1;
  GridFunction g2;
  GridFunction int_g1;
  GridFunction int_g2;
};

MomentFunctions solve_moment_functions(const ExcitingKernel& kernel, const TimeGrid& grid);

// Two-column CSV: header "t,<value_name>".
void write_csv(std::ostream& out, const GridFunction& f, std::string_view value_name);

}  // namespace hawkesruin
