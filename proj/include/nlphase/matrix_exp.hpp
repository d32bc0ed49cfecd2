#pragma once

#include "nlphase/types.hpp"

namespace nlphase {

/// Matrix exponential by scaling and squaring with a diagonal Pade approximant (degree 3, 5, 7,
/// 9 or 13 chosen from the 1-norm). Throws DomainError if the result overflows.
Mat expm(const Mat& A);

}  // namespace nlphase
