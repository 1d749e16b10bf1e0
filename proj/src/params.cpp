#include "mathieu_kit/params.hpp"

#include <cmath>
#include <string>

#include "mathieu_kit/errors.hpp"

namespace mathieu {

void DampedParams::validate() const {
  const double fields[] = {m, eta, k0, k, omega};
  for (double v : fields) {
    if (!std::isfinite(v)) throw InvalidInput("damped parameters must be finite");
  }
  if (!(m > 0.0)) throw InvalidInput("mass per unit length m must be positive, got " + std::to_string(m));
  if (omega == 0.0) throw InvalidInput("modulation frequency omega must be non-zero");
}

void GeneralParams::validate() const {
  if (!std::isfinite(h.real()) || !std::isfinite(h.imag()) || !std::isfinite(theta.real()) ||
      !std::isfinite(theta.imag())) {
    throw InvalidInput("Mathieu parameters h and theta must be finite");
  }
}

}  // namespace mathieu
