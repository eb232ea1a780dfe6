#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dfatoms {

enum class ErrorCode {
  invalid_argument,
  invalid_config,
  domain_error,
  not_converged,
  no_bound_state,
  threshold_collision,
  constraint_violation,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace dfatoms
