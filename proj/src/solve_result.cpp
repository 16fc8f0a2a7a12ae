#include "sqrtlasso/solve_result.hpp"

namespace sqrtlasso {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::NonsmoothStop: return "NonsmoothStop";
    case SolveStatus::LineSearchFail: return "LineSearchFail";
  }
  return "Unknown";
}

}  // namespace sqrtlasso
