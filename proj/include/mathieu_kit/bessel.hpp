#pragma once

// Integer-order Bessel functions of complex argument.
//
// J_n uses the ascending series for |z| <= 12 and a normalized backward
// (Miller) recurrence beyond that. Y_n uses the integer-order limit series
// for Y_0, Y_1 (or their Neumann expansions in J_{2k} for large |z|) and
// upward recurrence in n. All functions are pure and reentrant.

#include <vector>

#include "mathieu_kit/types.hpp"

namespace mathieu::bessel {

inline constexpr int kMaxOrder = 200;
inline constexpr double kMaxArgument = 1.0e4;
inline constexpr double kSeriesRadius = 12.0;

struct BesselValue {
  Complex value;
  Complex derivative;  // with respect to z
};

/// J_n(z) and J'_n(z). Negative orders use J_{-n} = (-1)^n J_n.
/// Throws RangeError when |n| > 200, |z| > 1e4 or the result overflows.
BesselValue bessel_j(int n, Complex z);

/// Y_n(z) and Y'_n(z) on the principal branch (cut along the negative real
/// axis). Throws SingularityError at z = 0 and RangeError as bessel_j.
BesselValue bessel_y(int n, Complex z);

/// J_0(z), ..., J_{n_max}(z).
std::vector<Complex> bessel_j_orders(int n_max, Complex z);

/// Y_0(z), ..., Y_{n_max}(z).
std::vector<Complex> bessel_y_orders(int n_max, Complex z);

/// Both sequences at once; shares the J evaluation that Y needs anyway.
struct BesselOrders {
  std::vector<Complex> j;
  std::vector<Complex> y;
};
BesselOrders bessel_jy_orders(int n_max, Complex z);

}  // namespace mathieu::bessel
