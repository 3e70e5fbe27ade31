#include "hawkesruin/covariance.hpp"

#include <ostream>

#include "hawkesruin/io.hpp"

namespace hawkesruin {

std::string_view to_string(CovarianceSource source) noexcept {
  switch (source) {
    case CovarianceSource::analytic_exponential: return "analytic-exponential";
    case CovarianceSource::analytic_poisson: return "analytic-poisson";
    case CovarianceSource::mc_estimated: return "mc-estimated";
  }
  return "unknown";
}

void write_csv(std::ostream& out, const CovarianceModel& model) {
  io::CsvWriter csv(out, {"t_i", "t_j", "cov"});
  for (std::size_t i = 0; i < model.dimension(); ++i) {
    for (std::size_t j = 0; j < model.dimension(); ++j) {
      csv.row({model.node(i), model.node(j), model.matrix(static_cast<Eigen::Index>(i),
                                                          static_cast<Eigen::Index>(j))});
    }
  }
}

}  // namespace hawkesruin
