#include "dfatoms/error.hpp"

namespace dfatoms {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::domain_error: return "domain_error";
    case ErrorCode::not_converged: return "not_converged";
    case ErrorCode::no_bound_state: return "no_bound_state";
    case ErrorCode::threshold_collision: return "threshold_collision";
    case ErrorCode::constraint_violation: return "constraint_violation";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace dfatoms
