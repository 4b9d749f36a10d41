#pragma once

#include <string>

#include "bellvol/conic.hpp"

namespace bellvol {

// Upper bound on the visibility v; keeps the program bounded at white noise.
inline constexpr double kVisibilityCap = 10.0;
// A correlation is inside a set when v* >= 1 - kMembershipTolerance.
inline constexpr double kMembershipTolerance = 1e-6;

struct VisibilityResult {
  conic::SolveStatus status = conic::SolveStatus::NumericalFailure;
  double v_star = 0.0;
  int iterations = 0;
  std::string message;

  bool optimal() const { return status == conic::SolveStatus::Optimal; }
  bool inside() const { return optimal() && v_star >= 1.0 - kMembershipTolerance; }
};

}  // namespace bellvol
