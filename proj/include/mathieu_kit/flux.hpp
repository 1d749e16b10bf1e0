#pragma once

// Driven, damped, parametrically modulated flux-lattice displacement
//   m y'' + eta y' + (K0 + k cos omega t) y = (B J0 / c) cos Omega t
// and the field it induces.

#include <span>
#include <string>
#include <vector>

#include "mathieu_kit/params.hpp"
#include "mathieu_kit/types.hpp"

namespace mathieu::flux {

struct FluxParams {
  DampedParams base;
  double B = 1.0;
  double J0 = 1.0;
  double Omega = 1.0;
  double c_light = 1.0;

  void validate() const;
  [[nodiscard]] double drive() const { return B * J0 / c_light; }
};

/// amplitude cos(frequency t - phase), amplitude >= 0, phase in (-pi, pi].
struct SinusoidalResponse {
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;

  [[nodiscard]] SolutionSample at(double t) const;
};

/// Sum of sinusoids (the linearized correction has one term per sideband).
struct SinusoidSum {
  std::vector<SinusoidalResponse> components;
  [[nodiscard]] SolutionSample at(double t) const;
};

/// K(t) = K0 + k cos(omega t)
double stiffness(const DampedParams& params, double t);

/// Steady state of m y'' + eta y' + K0 y = (B J0/c) cos Omega t.
SinusoidalResponse particular_k0(const FluxParams& fp);

/// Steady state of m dy'' + eta dy' + K0 dy = -k cos(omega t) y0(t), split
/// into the sidebands Omega + omega and Omega - omega.
SinusoidSum linearized_delta(const FluxParams& fp);

inline constexpr double kRegimeRatio = 0.02;

struct InducedFieldModel {
  double epsilon = 0.0;
  double phi = 0.0;
  double alpha = 0.0;
  double prefactor = 0.0;
  bool in_regime = true;
  std::vector<std::string> reasons;  // empty when in regime

  /// prefactor [1 - epsilon cos(omega t - phi)] sin(Omega t - alpha)
  [[nodiscard]] double field(double t, double Omega, double omega) const;
};

InducedFieldModel induced_field_model(const FluxParams& fp);
double induced_field(const FluxParams& fp, double t);

/// E = -(B/c) dy/dt
double field_from_velocity(const FluxParams& fp, const SolutionSample& s);

/// eta y' = (B J0 / 2c) cos Omega t, integrated from y(0) = y_at_0.
struct SymmetricSolution {
  double y_at_0 = 0.0;
  double amplitude = 0.0;  // B J0 / (2 c eta Omega)
  double Omega = 1.0;

  [[nodiscard]] SolutionSample at(double t) const;
};
SymmetricSolution symmetric_case_solution(const FluxParams& fp, double y_at_0);
/// eta y'(t) - (B J0 / 2c) cos Omega t
double symmetric_case_residual(const FluxParams& fp, const SymmetricSolution& sol, double t);

/// The full driven equation through the oracle. An empty grid returns the
/// accepted step points.
TimeSeries simulate_full(const FluxParams& fp, double t0, double t1, double tol,
                         std::span<const double> grid = {}, Complex y0 = 0.0,
                         Complex dy0 = 0.0);

inline constexpr int kCarrierPeriodsPerWindow = 8;

struct ModulationResult {
  double carrier_amplitude = 0.0;
  double modulation_depth = 0.0;
  double modulation_phase = 0.0;
  double carrier_frequency = 0.0;     // spectral peak of the signal
  double modulation_frequency = 0.0;  // spectral peak of the envelope
  double carrier_bin = 0.0;           // angular bin widths
  double modulation_bin = 0.0;
};

/// Demodulates a uniformly sampled carrier at Omega and fits the envelope
/// A [1 - d cos(omega t - psi)]. Samples before t_start are skipped.
ModulationResult modulation_analysis(std::span<const double> t, std::span<const double> signal,
                                     double Omega, double omega, double t_start = -1e300);

}  // namespace mathieu::flux
