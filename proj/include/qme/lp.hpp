#pragma once

#include "qme/types.hpp"

namespace qme {

/// Phase-I simplex feasibility test for { x >= 0 : A x = b }.
/// Returns true when the minimal total artificial residual is <= tol.
bool is_feasible(const Matrix& A, const Vector& b, double tol);

}  // namespace qme
