#pragma once

#include "mathieu_kit/types.hpp"

namespace mathieu {

/// Physical coefficients of m y'' + eta y' + (K0 + k cos(omega t)) y = 0.
struct DampedParams {
  double m = 1.0;
  double eta = 0.0;
  double k0 = 0.0;
  double k = 0.0;
  double omega = 1.0;

  /// Throws InvalidInput unless m > 0, omega != 0 and every field is finite.
  void validate() const;

  [[nodiscard]] double damping_rate() const { return eta / m; }  // a
  [[nodiscard]] double stiffness_rate() const { return k0 / m; }  // b
  [[nodiscard]] double modulation_rate() const { return k / m; }  // c
  [[nodiscard]] Complex lambda() const { return {0.0, omega}; }
  [[nodiscard]] Complex lambda_conjugate() const { return {0.0, -omega}; }
};

/// (h, theta) of y'' + (h - 2 theta cos 2t) y = 0; real or complex.
struct GeneralParams {
  Complex h;
  Complex theta;

  void validate() const;
  [[nodiscard]] bool is_real() const { return h.imag() == 0.0 && theta.imag() == 0.0; }
};

}  // namespace mathieu
