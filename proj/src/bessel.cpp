#include "mathieu_kit/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "mathieu_kit/errors.hpp"

namespace mathieu::bessel {
namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
constexpr double kRescaleAbove = 1.0e250;
constexpr double kWronskianStepBand = 1.0;
// Two extra orders beyond kMaxOrder so that second derivatives of the
// highest supported order can be formed from the recurrence.
constexpr int kMaxInternalOrder = kMaxOrder + 2;

bool finite(Complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

void check_arguments(int n_max, Complex z) {
  if (n_max < 0 || n_max > kMaxInternalOrder) {
    std::ostringstream msg;
    msg << "Bessel order " << n_max << " outside supported range |n| <= " << kMaxOrder;
    throw RangeError(msg.str());
  }
  if (!finite(z) || std::abs(z) > kMaxArgument) {
    std::ostringstream msg;
    msg << "Bessel argument |z| = " << std::abs(z) << " outside supported range |z| <= "
        << kMaxArgument;
    throw RangeError(msg.str());
  }
}

void check_finite(const std::vector<Complex>& values, const char* which) {
  for (const Complex& v : values) {
    if (!finite(v)) {
      throw RangeError(std::string(which) + " overflows in double precision for this argument");
    }
  }
}

// Ascending series, one order at a time.
std::vector<Complex> j_by_series(int n_max, Complex z) {
  std::vector<Complex> out(static_cast<std::size_t>(n_max) + 1);
  const Complex half = 0.5 * z;
  const Complex step = -half * half;
  const double step_abs = std::abs(step);
  Complex lead = 1.0;  // (z/2)^k / k!
  for (int k = 0; k <= n_max; ++k) {
    if (k > 0) lead *= half / static_cast<double>(k);
    Complex term = lead;
    Complex sum = 0.0;
    double biggest = 0.0;
    for (int j = 0; j < 400; ++j) {
      sum += term;
      biggest = std::max(biggest, std::abs(term));
      const double denom = static_cast<double>(j + 1) * static_cast<double>(j + 1 + k);
      term *= step / denom;
      if (denom > step_abs && std::abs(term) <= 1.0e-17 * biggest) break;
    }
    out[static_cast<std::size_t>(k)] = sum;
  }
  return out;
}

// One backward sweep from start order `top`, normalized with the generating
// function e^{sigma z} = J_0 + 2 sum sigma^k J_k, sigma = +-i chosen so the
// target does not decay (|e^{sigma z}| >= 1).
std::vector<Complex> miller_sweep(int top, Complex z) {
  std::vector<Complex> f(static_cast<std::size_t>(top) + 2, Complex{0.0, 0.0});
  f[static_cast<std::size_t>(top)] = 1.0;
  for (int k = top; k >= 1; --k) {
    const auto uk = static_cast<std::size_t>(k);
    f[uk - 1] = (2.0 * k / z) * f[uk] - f[uk + 1];
    if (std::abs(f[uk - 1]) > kRescaleAbove) {
      for (std::size_t i = uk - 1; i <= static_cast<std::size_t>(top); ++i) f[i] /= kRescaleAbove;
    }
  }
  const Complex sigma = z.imag() > 0.0 ? Complex{0.0, -1.0} : Complex{0.0, 1.0};
  Complex sum = f[0];
  Complex power = 1.0;
  for (int k = 1; k <= top; ++k) {
    power *= sigma;
    sum += 2.0 * power * f[static_cast<std::size_t>(k)];
  }
  const Complex scale = std::exp(sigma * z) / sum;
  for (Complex& v : f) v *= scale;
  f.pop_back();
  return f;
}

bool sweeps_agree(const std::vector<Complex>& a, const std::vector<Complex>& b, int n_check) {
  for (int k = 0; k <= n_check; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    double scale = std::abs(b[uk]);
    if (k > 0) scale = std::max(scale, std::abs(b[uk - 1]));
    scale = std::max(scale, std::abs(b[uk + 1]));
    if (std::abs(a[uk] - b[uk]) > 4.0e-14 * scale) return false;
  }
  return true;
}

// J_0..J_top for |z| above the series radius. The start order begins at
// n + 15 + ceil|z| and is pushed up until two successive starts agree.
std::vector<Complex> j_by_recurrence(int n_needed, Complex z) {
  const double r = std::abs(z);
  int top = n_needed + 15 + static_cast<int>(std::ceil(r));
  const int step = 10 + static_cast<int>(std::ceil(4.0 * std::cbrt(r)));
  std::vector<Complex> current = miller_sweep(top, z);
  for (int attempt = 0; attempt < 40; ++attempt) {
    top += step;
    std::vector<Complex> next = miller_sweep(top, z);
    const bool agree = sweeps_agree(current, next, n_needed);
    current = std::move(next);
    if (agree) return current;
  }
  throw ConvergenceError("Miller recurrence did not settle for |z| = " + std::to_string(r));
}

// Y_0, Y_1 from the integer-order limit series.
std::pair<Complex, Complex> y01_by_series(Complex z, Complex j0, Complex j1) {
  const Complex half = 0.5 * z;
  const Complex step = -half * half;
  const Complex log_term = std::log(half) + kEulerGamma;

  // sum_{k>=1} H_k (-z^2/4)^k / (k!)^2
  Complex s0 = 0.0;
  {
    Complex term = 1.0;
    double harmonic = 0.0;
    double biggest = 0.0;
    for (int k = 1; k < 400; ++k) {
      term *= step / (static_cast<double>(k) * k);
      harmonic += 1.0 / k;
      const Complex contribution = harmonic * term;
      s0 += contribution;
      biggest = std::max(biggest, std::abs(contribution));
      if (static_cast<double>(k) * k > std::abs(step) && std::abs(contribution) <= 1.0e-17 * biggest) break;
    }
  }
  const Complex y0 = (2.0 / kPi) * (log_term * j0 - s0);

  // sum_{k>=0} (H_k + H_{k+1}) (-z^2/4)^k (z/2) / (k! (k+1)!)
  Complex s1 = 0.0;
  {
    Complex term = half;
    double hk = 0.0;
    double biggest = 0.0;
    for (int k = 0; k < 400; ++k) {
      if (k > 0) {
        term *= step / (static_cast<double>(k) * (k + 1));
        hk += 1.0 / k;
      }
      const double hk1 = hk + 1.0 / (k + 1);
      const Complex contribution = (hk + hk1) * term;
      s1 += contribution;
      biggest = std::max(biggest, std::abs(contribution));
      if (k > 0 && static_cast<double>(k) * (k + 1) > std::abs(step) &&
          std::abs(contribution) <= 1.0e-17 * biggest) {
        break;
      }
    }
  }
  const Complex y1 = -2.0 / (kPi * z) + (2.0 / kPi) * log_term * j1 - s1 / kPi;
  return {y0, y1};
}

// Y_0, Y_1 from Neumann expansions in J_k, used with the recurrence values.
std::pair<Complex, Complex> y01_by_neumann(Complex z, const std::vector<Complex>& j) {
  const Complex log_term = std::log(0.5 * z) + kEulerGamma;
  const int top = static_cast<int>(j.size()) - 1;
  Complex s0 = 0.0;
  Complex s1 = 0.0;
  for (int k = 1; 2 * k + 1 <= top; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const auto u = static_cast<std::size_t>(2 * k);
    s0 += sign * j[u] / static_cast<double>(k);
    s1 += sign * (j[u - 1] - j[u + 1]) / static_cast<double>(k);
  }
  const Complex y0 = (2.0 / kPi) * (log_term * j[0] - 2.0 * s0);
  const Complex y1 = (2.0 / kPi) * (log_term * j[1] - j[0] / z + s1);
  return {y0, y1};
}

// Y_2..Y_{n_max}. Near the real axis the three-term recurrence is used (Y is
// dominant upward there). Off the axis the content of Y_0 along the small
// Hankel function is below rounding, which the three-term recurrence would
// amplify; there Y_{k+1} = (J_{k+1} Y_k - 2/(pi z)) / J_k is used instead. Its
// only homogeneous error mode is proportional to J_k. J_k has no zeros off the
// real axis.
std::vector<Complex> y_upward(int n_max, Complex z, const std::vector<Complex>& j, Complex y0,
                              Complex y1) {
  std::vector<Complex> y(static_cast<std::size_t>(std::max(n_max, 1)) + 1);
  y[0] = y0;
  y[1] = y1;
  const bool use_wronskian = std::abs(z.imag()) >= kWronskianStepBand;
  const Complex w = 2.0 / (kPi * z);
  for (int k = 1; k < n_max; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    if (use_wronskian) {
      y[uk + 1] = (j[uk + 1] * y[uk] - w) / j[uk];
    } else {
      y[uk + 1] = (2.0 * k / z) * y[uk] - y[uk - 1];
    }
  }
  y.resize(static_cast<std::size_t>(n_max) + 1);
  return y;
}

double reflection_sign(int n) { return (std::abs(n) % 2 == 0) ? 1.0 : -1.0; }

BesselValue pick(const std::vector<Complex>& seq, int n) {
  const int order = std::abs(n);
  const auto u = static_cast<std::size_t>(order);
  const Complex value = seq[u];
  const Complex derivative = order == 0 ? -seq[1] : 0.5 * (seq[u - 1] - seq[u + 1]);
  const double sign = n < 0 ? reflection_sign(n) : 1.0;
  return {sign * value, sign * derivative};
}

void check_order(int n) {
  if (std::abs(n) > kMaxOrder) {
    throw RangeError("Bessel order " + std::to_string(n) + " outside supported range |n| <= " +
                     std::to_string(kMaxOrder));
  }
}

}  // namespace

std::vector<Complex> bessel_j_orders(int n_max, Complex z) {
  check_arguments(n_max, z);
  std::vector<Complex> j;
  if (std::abs(z) <= kSeriesRadius) {
    j = j_by_series(std::max(n_max, 1), z);
  } else {
    j = j_by_recurrence(std::max(n_max, 1), z);
  }
  j.resize(static_cast<std::size_t>(n_max) + 1);
  check_finite(j, "J_n");
  return j;
}

BesselOrders bessel_jy_orders(int n_max, Complex z) {
  check_arguments(n_max, z);
  if (z == Complex{0.0, 0.0}) {
    throw SingularityError("Y_n has a logarithmic singularity at z = 0");
  }
  BesselOrders out;
  std::pair<Complex, Complex> y01;
  const int j_top = std::max(n_max, 1);
  if (std::abs(z) <= kSeriesRadius) {
    out.j = j_by_series(j_top, z);
    y01 = y01_by_series(z, out.j[0], out.j[1]);
  } else {
    std::vector<Complex> all = j_by_recurrence(j_top, z);
    y01 = y01_by_neumann(z, all);
    all.resize(static_cast<std::size_t>(j_top) + 1);
    out.j = std::move(all);
  }
  out.y = y_upward(n_max, z, out.j, y01.first, y01.second);
  out.j.resize(static_cast<std::size_t>(n_max) + 1);
  check_finite(out.j, "J_n");
  check_finite(out.y, "Y_n");
  return out;
}

std::vector<Complex> bessel_y_orders(int n_max, Complex z) {
  return bessel_jy_orders(n_max, z).y;
}

BesselValue bessel_j(int n, Complex z) {
  check_order(n);
  return pick(bessel_j_orders(std::abs(n) + 1, z), n);
}

BesselValue bessel_y(int n, Complex z) {
  check_order(n);
  return pick(bessel_y_orders(std::abs(n) + 1, z), n);
}

}  // namespace mathieu::bessel
