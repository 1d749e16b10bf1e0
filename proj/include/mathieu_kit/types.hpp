#pragma once

#include <complex>
#include <vector>

namespace mathieu {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr Complex kI{0.0, 1.0};

/// A solution value together with its first two time derivatives.
struct SolutionSample {
  double t = 0.0;
  Complex y;
  Complex dy;
  Complex d2y;
};

/// Samples on a strictly increasing time grid.
struct TimeSeries {
  std::vector<double> grid;
  std::vector<SolutionSample> values;

  [[nodiscard]] std::size_t size() const { return grid.size(); }
  [[nodiscard]] bool empty() const { return grid.empty(); }
};

}  // namespace mathieu
