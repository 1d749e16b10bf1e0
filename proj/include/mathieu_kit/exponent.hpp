#pragma once

// Characteristic exponents of y'' + (h - 2 theta cos 2t) y = 0 are defined up
// to the class {+mu + 2ik, -mu + 2ik}. These helpers pick a representative and
// compare classes.

#include "mathieu_kit/types.hpp"

namespace mathieu {

/// Representative with Re mu >= 0 and Im mu in [0, 2). When Re mu == 0 both
/// signs are in the class and Im mu is folded into [0, 1].
Complex normalize_exponent(Complex mu);

/// min over sign s and integer k of |s*a - b + 2ik|.
double exponent_class_distance(Complex a, Complex b);

}  // namespace mathieu
