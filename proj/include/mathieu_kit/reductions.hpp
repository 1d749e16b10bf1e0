#pragma once

// Changes of variables that take the source families
//   eq11:     (1 - t^2) y'' - t y' + (2a t^2 + b) y = 0,      t = cos z
//   eq13:     2t(t - 1) y'' + (2t - 1) y' + (a t + b) y = 0,  t = cos^2 z
//   eq15:     y'' + (a sin(lambda t) + b) y = 0,              lambda t = 2z + pi/2
//   eq17-sin: y'' + (a sin^2 t + b) y = 0
//   eq17-cos: y'' + (a cos^2 t + b) y = 0
//   damped:   m y'' + eta y' + (K0 + k cos omega t) y = 0,   y = exp(-eta t/2m) w, omega t = 2 tau
// to w'' + (h - 2 theta cos 2z) w = 0, and pull solutions back.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mathieu_kit/oracle.hpp"
#include "mathieu_kit/params.hpp"
#include "mathieu_kit/types.hpp"

namespace mathieu::reductions {

enum class Family { eq11, eq13, eq15, eq17_sin, eq17_cos, damped };
const char* to_string(Family f);
Family parse_family(const std::string& name);

enum class VariableMap { cosine, cosine_squared, linear, identity_rescale };
/// "t = cos z", "t = cos^2 z", "lambda t = 2z + pi/2", "identity-time-rescale"
const char* to_string(VariableMap m);

struct ReductionInput {
  Family family = Family::eq11;
  double a = 0.0;
  double b = 0.0;
  double lambda = 0.0;                  // eq15 only
  std::optional<DampedParams> params;  // damped only

  void validate() const;
};

struct ReductionResult {
  Family family = Family::eq11;
  GeneralParams gp;
  /// (h, theta) exactly as the printed formulas give them; differs from gp
  /// for eq15 and eq17 where the printed signs do not survive substitution.
  GeneralParams stated_gp;
  VariableMap map = VariableMap::identity_rescale;
  double prefactor_rate = 0.0;  // y = exp(-prefactor_rate t) w
  double time_scale = 1.0;      // dt/dz
  double lambda = 0.0;
  double a = 0.0;
  double b = 0.0;
  std::optional<DampedParams> params;

  /// t = g(z)
  [[nodiscard]] double to_original(double z) const;
  /// z = g^{-1}(t) on the principal branch of the map
  [[nodiscard]] double to_transformed(double t) const;
  /// Valid z interval; unbounded maps return infinities.
  [[nodiscard]] std::pair<double, double> transformed_domain() const;
  /// z grid over the interior 90% of a bounded domain, or [z0, z1] otherwise.
  [[nodiscard]] std::vector<double> interior_grid(std::size_t n, double z0 = 0.0,
                                                  double z1 = 10.0) const;
  /// Source equation in monic form in the original variable.
  [[nodiscard]] oracle::LinearODE source_equation() const;
  /// eq11 as printed (with +t y'); identical to source_equation otherwise.
  [[nodiscard]] oracle::LinearODE stated_source_equation() const;
  /// The reduced Mathieu equation in z.
  [[nodiscard]] oracle::LinearODE reduced_equation() const;
};

ReductionResult damped_to_general(const DampedParams& params);
ReductionResult reduce(const ReductionInput& input);

struct PulledSeries {
  std::vector<SolutionSample> samples;  // original variable, in input order
  std::vector<bool> endpoint;           // map derivative vanishes; dy, d2y are NaN
  /// Samples with a regular map derivative.
  [[nodiscard]] std::vector<SolutionSample> interior() const;
};

/// Samples of w(z) with w', w'' become samples of y(t) with y', y''.
PulledSeries pullback(const ReductionResult& result, std::span<const SolutionSample> z_samples);

}  // namespace mathieu::reductions
