#include "mathieu_kit/exponent.hpp"

#include <cmath>
#include <limits>

namespace mathieu {
namespace {

// x mod 2 in [0, 2)
double wrap_two(double x) {
  double r = std::fmod(x, 2.0);
  if (r < 0.0) r += 2.0;
  if (r >= 2.0) r = 0.0;
  return r;
}

}  // namespace

Complex normalize_exponent(Complex mu) {
  if (mu.real() < 0.0) mu = -mu;
  double im = wrap_two(mu.imag());
  if (mu.real() == 0.0 && im > 1.0) im = 2.0 - im;
  // + 0.0 turns a signed zero into +0
  return {mu.real() + 0.0, im + 0.0};
}

double exponent_class_distance(Complex a, Complex b) {
  double best = std::numeric_limits<double>::infinity();
  for (double sign : {1.0, -1.0}) {
    const Complex diff = sign * a - b;
    const double shift = 2.0 * std::round(diff.imag() / 2.0);
    for (double extra : {-2.0, 0.0, 2.0}) {
      best = std::min(best, std::abs(diff - Complex{0.0, shift + extra}));
    }
  }
  return best;
}

}  // namespace mathieu
