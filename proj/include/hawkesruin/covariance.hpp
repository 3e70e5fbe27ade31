#pragma once

#include <cstddef>
#include <iosfwd>
#include <string_view>

#include <Eigen/Dense>

#include "hawkesruin/volterra.hpp"

namespace hawkesruin {

enum class CovarianceSource { analytic_exponential, analytic_poisson, mc_estimated };

std::string_view to_string(CovarianceSource source) noexcept;

// Covariance of a process at grid nodes t_1 .. t_{n-1}; the t = 0 node is
// excluded because the process is pinned to zero there.
struct CovarianceModel {
  TimeGrid grid;
  Eigen::MatrixXd matrix;
  CovarianceSource source = CovarianceSource::mc_estimated;
  std::size_t n_paths = 0;         // Monte Carlo sources only
  Eigen::MatrixXd standard_error;  // entrywise, Monte Carlo sources only

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
  double node(std::size_t i) const noexcept { return grid.node(i + 1); }
};

// Header row "t_i,t_j,cov", one row per matrix entry in row-major order.
void write_csv(std::ostream& out, const CovarianceModel& model);

}  // namespace hawkesruin
