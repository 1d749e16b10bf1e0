#include "mathieu_kit/flux.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "mathieu_kit/errors.hpp"
#include "mathieu_kit/oracle.hpp"

namespace mathieu::flux {
namespace {

double wrap_phase(double p) {
  p = std::remainder(p, 2.0 * kPi);
  if (p <= -kPi) p += 2.0 * kPi;
  return p;
}

// Steady state of m y'' + eta y' + K0 y = F cos(nu t - psi).
SinusoidalResponse driven(const DampedParams& p, double F, double nu, double psi) {
  if (nu < 0.0) {
    nu = -nu;
    psi = -psi;
  }
  const Complex d{p.k0 - p.m * nu * nu, p.eta * nu};
  const double scale = std::abs(p.k0) + p.m * nu * nu;
  if (std::abs(d) <= 1e-14 * scale) {
    std::ostringstream msg;
    msg << "undamped resonance at frequency " << nu << " (K0 = m nu^2)";
    throw ResonanceError(msg.str());
  }
  SinusoidalResponse r;
  r.frequency = nu;
  r.amplitude = std::abs(F) / std::abs(d);
  r.phase = wrap_phase(psi + std::arg(d) + (F < 0.0 ? kPi : 0.0));
  return r;
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Angular frequency of the largest Hann-windowed spectral peak, skipping
// the lowest `skip` bins.
double spectral_peak(const std::vector<double>& x, double dt, std::size_t skip, double& bin) {
  const std::size_t n = x.size();
  std::vector<double> in(n);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
    in[i] = (x[i] - mean) * w;
  }
  const std::size_t m = n / 2 + 1;
  auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::size_t best = skip;
  double best_mag = -1.0;
  for (std::size_t k = skip; k < m; ++k) {
    const double mag = out[k][0] * out[k][0] + out[k][1] * out[k][1];
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(out);
  bin = 2.0 * kPi / (static_cast<double>(n) * dt);
  return static_cast<double>(best) * bin;
}

}  // namespace

void FluxParams::validate() const {
  base.validate();
  if (!std::isfinite(B) || !std::isfinite(J0) || !std::isfinite(Omega) || !std::isfinite(c_light)) {
    throw InvalidInput("flux parameters must be finite");
  }
  if (Omega <= 0.0) throw InvalidInput("Omega must be positive");
  if (c_light <= 0.0) throw InvalidInput("c_light must be positive");
}

SolutionSample SinusoidalResponse::at(double t) const {
  const double arg = frequency * t - phase;
  const double c = std::cos(arg);
  const double s = std::sin(arg);
  return {t, amplitude * c, -amplitude * frequency * s, -amplitude * frequency * frequency * c};
}

SolutionSample SinusoidSum::at(double t) const {
  SolutionSample out{t, 0.0, 0.0, 0.0};
  for (const SinusoidalResponse& c : components) {
    const SolutionSample s = c.at(t);
    out.y += s.y;
    out.dy += s.dy;
    out.d2y += s.d2y;
  }
  return out;
}

double stiffness(const DampedParams& params, double t) {
  return params.k0 + params.k * std::cos(params.omega * t);
}

SinusoidalResponse particular_k0(const FluxParams& fp) {
  fp.validate();
  return driven(fp.base, fp.drive(), fp.Omega, 0.0);
}

SinusoidSum linearized_delta(const FluxParams& fp) {
  const SinusoidalResponse y0 = particular_k0(fp);
  // -k cos(omega t) A cos(Omega t - p) = -(kA/2)[cos((Omega+omega)t - p) + cos((Omega-omega)t - p)]
  const double f = -0.5 * fp.base.k * y0.amplitude;
  SinusoidSum out;
  for (double sign : {1.0, -1.0}) {
    out.components.push_back(
        driven(fp.base, f, fp.Omega + sign * fp.base.omega, y0.phase));
  }
  return out;
}

double InducedFieldModel::field(double t, double Omega, double omega) const {
  return prefactor * (1.0 - epsilon * std::cos(omega * t - phi)) * std::sin(Omega * t - alpha);
}

InducedFieldModel induced_field_model(const FluxParams& fp) {
  fp.validate();
  const DampedParams& p = fp.base;
  if (p.k0 == 0.0) throw InvalidInput("the induced-field model divides by K0, which is zero");
  InducedFieldModel m;
  m.epsilon = p.k / p.k0;
  m.phi = std::atan(2.0 * p.eta * p.omega / p.k0);
  m.alpha = std::atan(p.eta * fp.Omega / p.k0);
  m.prefactor = fp.B * fp.B * fp.J0 * fp.Omega / (std::abs(p.k0) * fp.c_light * fp.c_light);
  const double k0 = std::abs(p.k0);
  if (std::abs(p.k) > kRegimeRatio * k0) m.reasons.push_back("k > 0.02 |K0|");
  if (std::abs(p.omega) > kRegimeRatio * fp.Omega) m.reasons.push_back("omega > 0.02 Omega");
  if (p.m * fp.Omega * fp.Omega > kRegimeRatio * k0) m.reasons.push_back("m Omega^2 > 0.02 |K0|");
  m.in_regime = m.reasons.empty();
  return m;
}

double induced_field(const FluxParams& fp, double t) {
  return induced_field_model(fp).field(t, fp.Omega, fp.base.omega);
}

double field_from_velocity(const FluxParams& fp, const SolutionSample& s) {
  return -(fp.B / fp.c_light) * s.dy.real();
}

SolutionSample SymmetricSolution::at(double t) const {
  const double s = std::sin(Omega * t);
  const double c = std::cos(Omega * t);
  return {t, y_at_0 + amplitude * s, amplitude * Omega * c, -amplitude * Omega * Omega * s};
}

SymmetricSolution symmetric_case_solution(const FluxParams& fp, double y_at_0) {
  fp.validate();
  if (fp.base.eta == 0.0) throw InvalidInput("the first-order branch divides by eta, which is zero");
  return {y_at_0, fp.drive() / (2.0 * fp.base.eta * fp.Omega), fp.Omega};
}

double symmetric_case_residual(const FluxParams& fp, const SymmetricSolution& sol, double t) {
  return fp.base.eta * sol.at(t).dy.real() - 0.5 * fp.drive() * std::cos(fp.Omega * t);
}

TimeSeries simulate_full(const FluxParams& fp, double t0, double t1, double tol,
                         std::span<const double> grid, Complex y0, Complex dy0) {
  fp.validate();
  const DampedParams p = fp.base;
  const double f = fp.drive() / p.m;
  const double W = fp.Omega;
  oracle::LinearODE ode = oracle::damped_ode(p);
  ode.f = [f, W](double t) { return Complex{f * std::cos(W * t), 0.0}; };
  return oracle::integrate(ode, y0, dy0, t0, t1, tol, grid);
}

ModulationResult modulation_analysis(std::span<const double> t, std::span<const double> signal,
                                     double Omega, double omega, double t_start) {
  if (t.size() != signal.size()) throw InvalidInput("time and signal lengths differ");
  if (!(Omega > 0.0) || !(omega > 0.0)) throw InvalidInput("Omega and omega must be positive");
  std::size_t first = 0;
  while (first < t.size() && t[first] < t_start) ++first;
  const std::size_t n = t.size() - first;
  if (n < 16) throw SpanError("fewer than 16 samples after the transient");
  const double dt = (t.back() - t[first]) / static_cast<double>(n - 1);
  for (std::size_t i = first + 1; i < t.size(); ++i) {
    if (std::abs(t[i] - t[i - 1] - dt) > 1e-6 * dt) {
      throw InvalidInput("modulation_analysis needs a uniform time grid");
    }
  }
  const double span = t.back() - t[first];
  const double needed = 3.0 * 2.0 * kPi / omega;
  if (span < needed) {
    std::ostringstream msg;
    msg << "span " << span << " after the transient is shorter than 3 modulation periods ("
        << needed << ")";
    throw SpanError(msg.str());
  }

  // quadrature mixing, then a boxcar over whole carrier periods
  const double carrier_period = 2.0 * kPi / Omega;
  const auto window = static_cast<std::size_t>(
      std::max(1.0, std::round(kCarrierPeriodsPerWindow * carrier_period / dt)));
  if (window >= n) throw SpanError("span shorter than the demodulation window");
  std::vector<double> in_phase(n + 1, 0.0);
  std::vector<double> quadrature(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = t[first + i];
    in_phase[i + 1] = in_phase[i] + 2.0 * signal[first + i] * std::sin(Omega * ti);
    quadrature[i + 1] = quadrature[i] + 2.0 * signal[first + i] * std::cos(Omega * ti);
  }
  const std::size_t m = n - window + 1;
  std::vector<double> env_t(m);
  std::vector<double> env(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double i_avg = (in_phase[j + window] - in_phase[j]) / static_cast<double>(window);
    const double q_avg = (quadrature[j + window] - quadrature[j]) / static_cast<double>(window);
    env[j] = std::hypot(i_avg, q_avg);
    env_t[j] = t[first + j] + 0.5 * static_cast<double>(window - 1) * dt;
  }

  // A - A d cos psi cos(omega t) - A d sin psi sin(omega t)
  Eigen::MatrixXd design(static_cast<Eigen::Index>(m), 3);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    design(r, 0) = 1.0;
    design(r, 1) = std::cos(omega * env_t[j]);
    design(r, 2) = std::sin(omega * env_t[j]);
    rhs(r) = env[j];
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(rhs);
  // boxcar gain at the modulation frequency
  const double half = 0.5 * omega * static_cast<double>(window) * dt;
  const double gain = half == 0.0 ? 1.0 : std::sin(half) / half;

  ModulationResult out;
  out.carrier_amplitude = coef(0);
  out.modulation_depth = std::hypot(coef(1), coef(2)) / (gain * coef(0));
  out.modulation_phase = std::atan2(-coef(2), -coef(1));
  std::vector<double> sig(signal.begin() + static_cast<std::ptrdiff_t>(first), signal.end());
  out.carrier_frequency = spectral_peak(sig, dt, 1, out.carrier_bin);
  out.modulation_frequency = spectral_peak(env, dt, 1, out.modulation_bin);
  return out;
}

}  // namespace mathieu::flux
