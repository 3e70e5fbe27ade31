#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hawkesruin {

enum class ErrorCode {
  invalid_parameter,
  unstable_kernel,
  integral_divergence,
  grid_mismatch,
  not_samplable,
  path_budget_exceeded,
  insufficient_samples,
  asymptotic_inapplicable,
  no_convergence,
  invalid_order,
  io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// C layer can map it onto a status value without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace hawkesruin
