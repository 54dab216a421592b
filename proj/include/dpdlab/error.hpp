#pragma once

#include <stdexcept>
#include <string>

namespace dpdlab {

enum class Errc {
  disconnected,
  duplicate_edge,
  self_loop,
  invalid_argument,
  not_in_local_set,
  not_strictly_feasible,
  local_min_failed,
  solver_failure,
  non_zero_sum,
  schedule_unsupported,
  parse_error,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::disconnected: return "Disconnected";
    case Errc::duplicate_edge: return "DuplicateEdge";
    case Errc::self_loop: return "SelfLoop";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::not_in_local_set: return "NotInLocalSet";
    case Errc::not_strictly_feasible: return "NotStrictlyFeasible";
    case Errc::local_min_failed: return "LocalMinFailed";
    case Errc::solver_failure: return "SolverFailure";
    case Errc::non_zero_sum: return "NonZeroSum";
    case Errc::schedule_unsupported: return "ScheduleUnsupported";
    case Errc::parse_error: return "ParseError";
  }
  return "Unknown";
}

/// Library-wide exception. `index()` carries the offending agent or
/// component when the error names one (-1 otherwise).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, int index = -1)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        index_(index) {}

  Errc code() const noexcept { return code_; }
  int index() const noexcept { return index_; }

 private:
  Errc code_;
  int index_;
};

}  // namespace dpdlab
