#pragma once

// Independent numerical ground truth for second-order linear complex ODEs
//   y'' + p(t) y' + q(t) y = f(t).

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mathieu_kit/params.hpp"
#include "mathieu_kit/types.hpp"

namespace mathieu::oracle {

using CoefficientFn = std::function<Complex(double)>;

struct LinearODE {
  CoefficientFn p;
  CoefficientFn q;
  CoefficientFn f;  // empty means homogeneous

  [[nodiscard]] Complex forcing(double t) const { return f ? f(t) : Complex{0.0, 0.0}; }
  /// y'' implied by the equation for the given state.
  [[nodiscard]] Complex second_derivative(double t, Complex y, Complex dy) const {
    return forcing(t) - p(t) * dy - q(t) * y;
  }
};

/// y'' + (h - 2 theta cos 2t) y = 0.
LinearODE mathieu_ode(const GeneralParams& gp);
/// m y'' + eta y' + (K0 + k cos omega t) y = 0 in monic form.
LinearODE damped_ode(const DampedParams& params);

struct IntegratorOptions {
  double tol = 1e-10;        // relative tolerance
  std::optional<double> atol;  // defaults to tol
  std::size_t max_steps = 20'000'000;
  double fixed_step = 0.0;   // > 0 disables adaptivity (for convergence studies)
  // Also reject steps whose interpolant, differentiated, misses the equation by
  // more than the tolerance at interior sample points.
  bool defect_control = true;
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

/// Continuous extension of an adaptive Dormand-Prince 5(4) run.
class DenseSolution {
 public:
  /// y, y' from the interpolant and y'' from the equation.
  [[nodiscard]] SolutionSample at(double t) const;
  /// y, y' from the interpolant and y'' as the time derivative of the y'
  /// interpolant (independent of the equation).
  [[nodiscard]] SolutionSample differentiated(double t) const;
  [[nodiscard]] double t0() const { return times_.front(); }
  [[nodiscard]] double t1() const { return times_.back(); }
  [[nodiscard]] const std::vector<double>& step_times() const { return times_; }
  [[nodiscard]] const IntegrationStats& stats() const { return stats_; }
  [[nodiscard]] SolutionSample final_state() const { return at(t1()); }

 private:
  friend DenseSolution integrate_dense(const LinearODE&, Complex, Complex, double, double,
                                       const IntegratorOptions&);
  using State = std::array<double, 4>;
  struct Segment {
    std::array<State, 5> r;  // Hairer contd5 coefficients
  };

  [[nodiscard]] std::size_t locate(double t) const;
  void interpolate(double t, State& state, State& rate) const;

  LinearODE ode_;
  std::vector<double> times_;
  std::vector<Segment> segments_;
  IntegrationStats stats_;
};

DenseSolution integrate_dense(const LinearODE& ode, Complex y0, Complex dy0, double t0, double t1,
                              const IntegratorOptions& options = {});

/// Samples on `grid` (inside [t0, t1], strictly increasing). An empty grid
/// returns the accepted step points.
TimeSeries integrate(const LinearODE& ode, Complex y0, Complex dy0, double t0, double t1,
                     double tol, std::span<const double> grid = {});

enum class Verdict { pass, fail, report_only };
const char* to_string(Verdict v);

struct ResidualReport {
  double linf = 0.0;
  double l2 = 0.0;
  double normalization = 1.0;
  std::vector<double> per_point;  // |r(t)| / normalization, when requested
  Verdict verdict = Verdict::report_only;
};

using Candidate = std::function<SolutionSample(double)>;

/// r(t) = y'' + p y' + q y - f, normalized by max(1, max_t |each term|).
/// Without a threshold the verdict is report-only.
ResidualReport residual(const LinearODE& ode, const Candidate& candidate,
                        std::span<const double> grid, std::optional<double> threshold = {},
                        bool keep_per_point = false);
ResidualReport residual(const LinearODE& ode, std::span<const SolutionSample> samples,
                        std::optional<double> threshold = {}, bool keep_per_point = false);

struct WronskianReport {
  ResidualReport report;  // pointwise |W - W_abel| / |W_abel|
  Complex w0;
  bool dependent = false;  // W(t0) vanishes relative to its terms
};

/// W = y1 y2' - y1' y2 against W(t0) exp(-int_{t0}^t p).
WronskianReport wronskian_abel(const Candidate& first, const Candidate& second,
                               const LinearODE& ode, std::span<const double> grid,
                               std::optional<double> threshold = {});

struct Monodromy {
  std::array<Complex, 4> matrix;  // row-major [[y1, y2], [y1', y2']] at t = pi
  Complex trace;
  Complex determinant;
  Complex multiplier;
  Complex mu;        // normal form
  Complex mu_raw;    // log(multiplier) / pi, principal branch
  bool negative_real_multiplier = false;
};

Monodromy monodromy(const GeneralParams& gp, double tol = 1e-13);
Complex monodromy_exponent(const GeneralParams& gp, double tol = 1e-13);

/// Uniform grid of n points on [t0, t1] inclusive.
std::vector<double> uniform_grid(double t0, double t1, std::size_t n);

}  // namespace mathieu::oracle
