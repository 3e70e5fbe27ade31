#include "hawkesruin/error.hpp"

namespace hawkesruin {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_parameter: return "InvalidParameter";
    case ErrorCode::unstable_kernel: return "UnstableKernel";
    case ErrorCode::integral_divergence: return "IntegralDivergence";
    case ErrorCode::grid_mismatch: return "GridMismatch";
    case ErrorCode::not_samplable: return "NotSamplable";
    case ErrorCode::path_budget_exceeded: return "PathBudgetExceeded";
    case ErrorCode::insufficient_samples: return "InsufficientSamples";
    case ErrorCode::asymptotic_inapplicable: return "AsymptoticInapplicable";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::invalid_order: return "InvalidOrder";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

}  // namespace hawkesruin
