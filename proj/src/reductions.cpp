#include "mathieu_kit/reductions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mathieu_kit/errors.hpp"

namespace mathieu::reductions {
namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr double kDomainSlack = 1e-12;
constexpr double kInteriorMargin = 0.05;

GeneralParams real_gp(double h, double theta) { return {{h, 0.0}, {theta, 0.0}}; }

struct MapDerivatives {
  double g1;  // dt/dz
  double g2;  // d2t/dz2
};

MapDerivatives map_derivatives(const ReductionResult& r, double z) {
  switch (r.map) {
    case VariableMap::cosine:
      return {-std::sin(z), -std::cos(z)};
    case VariableMap::cosine_squared:
      return {-std::sin(2.0 * z), -2.0 * std::cos(2.0 * z)};
    case VariableMap::linear:
      return {2.0 / r.lambda, 0.0};
    case VariableMap::identity_rescale:
      return {r.time_scale, 0.0};
  }
  return {1.0, 0.0};
}

}  // namespace

const char* to_string(Family f) {
  switch (f) {
    case Family::eq11:
      return "eq11";
    case Family::eq13:
      return "eq13";
    case Family::eq15:
      return "eq15";
    case Family::eq17_sin:
      return "eq17-sin";
    case Family::eq17_cos:
      return "eq17-cos";
    case Family::damped:
      return "damped";
  }
  return "eq11";
}

Family parse_family(const std::string& name) {
  for (Family f : {Family::eq11, Family::eq13, Family::eq15, Family::eq17_sin, Family::eq17_cos,
                   Family::damped}) {
    if (name == to_string(f)) return f;
  }
  throw InvalidInput("unknown family '" + name +
                     "' (expected eq11, eq13, eq15, eq17-sin, eq17-cos or damped)");
}

const char* to_string(VariableMap m) {
  switch (m) {
    case VariableMap::cosine:
      return "t = cos z";
    case VariableMap::cosine_squared:
      return "t = cos^2 z";
    case VariableMap::linear:
      return "lambda t = 2z + pi/2";
    case VariableMap::identity_rescale:
      return "identity-time-rescale";
  }
  return "identity-time-rescale";
}

void ReductionInput::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(lambda)) {
    throw InvalidInput("reduction coefficients must be finite");
  }
  if (family == Family::eq15 && lambda == 0.0) {
    throw InvalidInput("eq15 requires lambda != 0");
  }
  if (family == Family::damped) {
    if (!params) throw InvalidInput("the damped family requires damped parameters");
    params->validate();
  } else if (params) {
    throw InvalidInput("damped parameters are only accepted for the damped family");
  }
}

ReductionResult damped_to_general(const DampedParams& params) {
  params.validate();
  const double a = params.damping_rate();
  const double w2 = params.omega * params.omega;
  ReductionResult r;
  r.family = Family::damped;
  r.gp = real_gp(4.0 / w2 * (params.stiffness_rate() - 0.25 * a * a),
                 -2.0 * params.modulation_rate() / w2);
  r.stated_gp = r.gp;
  r.map = VariableMap::identity_rescale;
  r.prefactor_rate = 0.5 * a;
  r.time_scale = 2.0 / params.omega;
  r.params = params;
  return r;
}

ReductionResult reduce(const ReductionInput& input) {
  input.validate();
  if (input.family == Family::damped) return damped_to_general(*input.params);
  const double a = input.a;
  const double b = input.b;
  ReductionResult r;
  r.family = input.family;
  r.a = a;
  r.b = b;
  switch (input.family) {
    case Family::eq11:
      // w'' + (a + b + a cos 2z) w = 0
      r.gp = real_gp(a + b, -0.5 * a);
      r.stated_gp = r.gp;
      r.map = VariableMap::cosine;
      break;
    case Family::eq13:
      // w'' - (a + 2b + a cos 2z) w = 0
      r.gp = real_gp(-(a + 2.0 * b), 0.5 * a);
      r.stated_gp = r.gp;
      r.map = VariableMap::cosine_squared;
      break;
    case Family::eq15: {
      // sin(lambda t) = cos 2z, d2/dt2 = (4/lambda^2) d2/dz2
      const double l2 = input.lambda * input.lambda;
      r.gp = real_gp(4.0 * b / l2, -2.0 * a / l2);
      r.stated_gp = real_gp(-4.0 * b / l2, 2.0 * a / l2);
      r.map = VariableMap::linear;
      r.lambda = input.lambda;
      r.time_scale = 2.0 / input.lambda;
      break;
    }
    case Family::eq17_sin:
      // a sin^2 t = a/2 - (a/2) cos 2t
      r.gp = real_gp(b + 0.5 * a, 0.25 * a);
      r.stated_gp = real_gp(b + 0.5 * a, -0.25 * a);
      r.map = VariableMap::identity_rescale;
      break;
    case Family::eq17_cos:
      // a cos^2 t = a/2 + (a/2) cos 2t
      r.gp = real_gp(b + 0.5 * a, -0.25 * a);
      r.stated_gp = real_gp(b + 0.5 * a, 0.25 * a);
      r.map = VariableMap::identity_rescale;
      break;
    case Family::damped:
      break;
  }
  return r;
}

double ReductionResult::to_original(double z) const {
  switch (map) {
    case VariableMap::cosine:
      return std::cos(z);
    case VariableMap::cosine_squared: {
      const double c = std::cos(z);
      return c * c;
    }
    case VariableMap::linear:
      return (2.0 * z + 0.5 * kPi) / lambda;
    case VariableMap::identity_rescale:
      return time_scale * z;
  }
  return z;
}

double ReductionResult::to_transformed(double t) const {
  switch (map) {
    case VariableMap::cosine:
      if (t < -1.0 - kDomainSlack || t > 1.0 + kDomainSlack) {
        throw DomainError("t = cos z requires |t| <= 1");
      }
      return std::acos(std::clamp(t, -1.0, 1.0));
    case VariableMap::cosine_squared:
      if (t < -kDomainSlack || t > 1.0 + kDomainSlack) {
        throw DomainError("t = cos^2 z requires 0 <= t <= 1");
      }
      return std::acos(std::sqrt(std::clamp(t, 0.0, 1.0)));
    case VariableMap::linear:
      return 0.5 * (lambda * t - 0.5 * kPi);
    case VariableMap::identity_rescale:
      return t / time_scale;
  }
  return t;
}

std::pair<double, double> ReductionResult::transformed_domain() const {
  switch (map) {
    case VariableMap::cosine:
      return {0.0, kPi};
    case VariableMap::cosine_squared:
      return {0.0, 0.5 * kPi};
    default:
      return {-kInfinity, kInfinity};
  }
}

std::vector<double> ReductionResult::interior_grid(std::size_t n, double z0, double z1) const {
  const auto [lo, hi] = transformed_domain();
  if (std::isfinite(lo) && std::isfinite(hi)) {
    const double margin = kInteriorMargin * (hi - lo);
    return oracle::uniform_grid(lo + margin, hi - margin, n);
  }
  return oracle::uniform_grid(z0, z1, n);
}

oracle::LinearODE ReductionResult::source_equation() const {
  const double a_ = a;
  const double b_ = b;
  const double l = lambda;
  const auto zero = [](double) { return Complex{0.0, 0.0}; };
  switch (family) {
    case Family::eq11:
      return {[](double t) { return Complex{-t / (1.0 - t * t), 0.0}; },
              [a_, b_](double t) { return Complex{(2.0 * a_ * t * t + b_) / (1.0 - t * t), 0.0}; },
              nullptr};
    case Family::eq13:
      return {[](double t) { return Complex{(2.0 * t - 1.0) / (2.0 * t * (t - 1.0)), 0.0}; },
              [a_, b_](double t) { return Complex{(a_ * t + b_) / (2.0 * t * (t - 1.0)), 0.0}; },
              nullptr};
    case Family::eq15:
      return {zero, [a_, b_, l](double t) { return Complex{a_ * std::sin(l * t) + b_, 0.0}; },
              nullptr};
    case Family::eq17_sin:
      return {zero,
              [a_, b_](double t) {
                const double s = std::sin(t);
                return Complex{a_ * s * s + b_, 0.0};
              },
              nullptr};
    case Family::eq17_cos:
      return {zero,
              [a_, b_](double t) {
                const double c = std::cos(t);
                return Complex{a_ * c * c + b_, 0.0};
              },
              nullptr};
    case Family::damped:
      return oracle::damped_ode(*params);
  }
  return {zero, zero, nullptr};
}

oracle::LinearODE ReductionResult::stated_source_equation() const {
  if (family != Family::eq11) return source_equation();
  const double a_ = a;
  const double b_ = b;
  return {[](double t) { return Complex{t / (1.0 - t * t), 0.0}; },
          [a_, b_](double t) { return Complex{(2.0 * a_ * t * t + b_) / (1.0 - t * t), 0.0}; },
          nullptr};
}

oracle::LinearODE ReductionResult::reduced_equation() const { return oracle::mathieu_ode(gp); }

std::vector<SolutionSample> PulledSeries::interior() const {
  std::vector<SolutionSample> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!endpoint[i]) out.push_back(samples[i]);
  }
  return out;
}

PulledSeries pullback(const ReductionResult& result, std::span<const SolutionSample> z_samples) {
  const auto [lo, hi] = result.transformed_domain();
  PulledSeries out;
  out.samples.reserve(z_samples.size());
  out.endpoint.reserve(z_samples.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const SolutionSample& s : z_samples) {
    const double z = s.t;
    if (!std::isfinite(z) || z < lo - kDomainSlack || z > hi + kDomainSlack) {
      std::ostringstream msg;
      msg << "z = " << z << " outside the domain [" << lo << ", " << hi << "] of "
          << to_string(result.map);
      throw DomainError(msg.str());
    }
    SolutionSample y;
    y.t = result.to_original(z);
    const MapDerivatives d = map_derivatives(result, z);
    const bool singular = std::abs(d.g1) <= 1e-12;
    if (result.family == Family::damped) {
      // y(t) = exp(-gamma t) w(tau), tau = t / time_scale
      const double gamma = result.prefactor_rate;
      const double rate = 1.0 / result.time_scale;  // dtau/dt
      const double env = std::exp(-gamma * y.t);
      y.y = env * s.y;
      y.dy = env * (rate * s.dy - gamma * s.y);
      y.d2y = env * (rate * rate * s.d2y - 2.0 * gamma * rate * s.dy + gamma * gamma * s.y);
    } else if (singular) {
      y.y = s.y;
      y.dy = {nan, nan};
      y.d2y = {nan, nan};
    } else {
      y.y = s.y;
      y.dy = s.dy / d.g1;
      y.d2y = (s.d2y - d.g2 * y.dy) / (d.g1 * d.g1);
    }
    out.samples.push_back(y);
    out.endpoint.push_back(singular);
  }
  return out;
}

}  // namespace mathieu::reductions
