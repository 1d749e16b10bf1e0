#include <doctest.h>

#include <cmath>
#include <random>

#include "mathieu_kit/errors.hpp"
#include "mathieu_kit/flux.hpp"
#include "mathieu_kit/oracle.hpp"

using mathieu::Complex;
using mathieu::DampedParams;
using mathieu::kPi;
using mathieu::SolutionSample;
using namespace mathieu::flux;
namespace oracle = mathieu::oracle;

namespace {

FluxParams flux(double m, double eta, double k0, double k, double omega, double Omega,
                double B = 1.0, double J0 = 1.0, double c = 1.0) {
  FluxParams fp;
  fp.base.m = m;
  fp.base.eta = eta;
  fp.base.k0 = k0;
  fp.base.k = k;
  fp.base.omega = omega;
  fp.Omega = Omega;
  fp.B = B;
  fp.J0 = J0;
  fp.c_light = c;
  return fp;
}

oracle::LinearODE k0_equation(const FluxParams& fp) {
  DampedParams p = fp.base;
  p.k = 0.0;
  oracle::LinearODE ode = oracle::damped_ode(p);
  const double f = fp.drive() / p.m;
  const double W = fp.Omega;
  ode.f = [f, W](double t) { return Complex{f * std::cos(W * t), 0.0}; };
  return ode;
}

oracle::LinearODE delta_equation(const FluxParams& fp) {
  DampedParams p = fp.base;
  p.k = 0.0;
  oracle::LinearODE ode = oracle::damped_ode(p);
  const SinusoidalResponse y0 = particular_k0(fp);
  const double c = fp.base.k / fp.base.m;
  const double w = fp.base.omega;
  ode.f = [y0, c, w](double t) { return -c * std::cos(w * t) * y0.at(t).y; };
  return ode;
}

// Hand-rolled generator: damped, off-resonance parameter sets.
FluxParams random_flux(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return flux(0.5 + 1.5 * u(rng), 0.1 + 2.0 * u(rng), 1.0 + 20.0 * u(rng), -2.0 + 4.0 * u(rng),
              0.2 + 2.0 * u(rng), 0.5 + 5.0 * u(rng), 0.5 + u(rng), 0.5 + u(rng), 1.0 + u(rng));
}

}  // namespace

TEST_CASE("stiffness") {
  DampedParams p;
  p.k0 = 3.0;
  p.k = 0.5;
  p.omega = 2.0;
  CHECK(stiffness(p, 0.0) == 3.5);
  CHECK(std::abs(stiffness(p, kPi / 2.0) - 2.5) < 1e-15);
  p.k = 0.0;
  CHECK(stiffness(p, 1.234) == 3.0);
}

TEST_CASE("particular solution without modulation") {
  // |K0| >> m Omega^2: amplitude -> B J0/(c K0), phase -> 0
  const SinusoidalResponse far = particular_k0(flux(1, 0, 1e8, 0, 1, 1, 2, 3, 1));
  CHECK(far.amplitude == doctest::Approx(6e-8).epsilon(1e-7));
  CHECK(std::abs(far.phase) < 1e-15);
  // K0 = 2 m Omega^2
  const SinusoidalResponse two = particular_k0(flux(1.5, 0, 2 * 1.5 * 4, 0, 1, 2, 2, 3, 1));
  CHECK(two.amplitude == doctest::Approx(6.0 / (1.5 * 4)).epsilon(1e-15));
  CHECK(two.frequency == 2.0);

  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const FluxParams fp = random_flux(rng);
    const SinusoidalResponse y0 = particular_k0(fp);
    CHECK(y0.amplitude >= 0.0);
    CHECK(y0.phase > -kPi);
    CHECK(y0.phase <= kPi);
    const auto rep = oracle::residual(k0_equation(fp), [&](double t) { return y0.at(t); },
                                      oracle::uniform_grid(0.0, 20.0, 400), 1e-10);
    CHECK(rep.verdict == oracle::Verdict::pass);
  }
  CHECK_THROWS_AS(particular_k0(flux(1, 0, 4, 0, 1, 2)), mathieu::ResonanceError);
  CHECK_NOTHROW(particular_k0(flux(1, 1e-3, 4, 0, 1, 2)));
}

TEST_CASE("linearized correction") {
  const SinusoidSum zero = linearized_delta(flux(1, 0.2, 5, 0, 0.3, 1));
  for (const auto& c : zero.components) CHECK(c.amplitude == 0.0);

  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const FluxParams fp = random_flux(rng);
    const SinusoidSum d = linearized_delta(fp);
    REQUIRE(d.components.size() == 2);
    CHECK(d.components[0].frequency == doctest::Approx(fp.Omega + fp.base.omega));
    CHECK(d.components[1].frequency == doctest::Approx(std::abs(fp.Omega - fp.base.omega)));
    const auto rep = oracle::residual(delta_equation(fp), [&](double t) { return d.at(t); },
                                      oracle::uniform_grid(0.0, 20.0, 400), 1e-10);
    CHECK(rep.verdict == oracle::Verdict::pass);
  }

  // static limit: dy -> -(k/K0) y0 when omega, eta -> 0 and |K0| >> m Omega^2
  const FluxParams fp = flux(1, 0, 1e6, 10, 1e-4, 1);
  const SinusoidalResponse y0 = particular_k0(fp);
  const SinusoidSum d = linearized_delta(fp);
  for (double t : {0.0, 0.7, 2.0}) {
    const double expected = -(fp.base.k / fp.base.k0) * std::cos(fp.base.omega * t) * y0.at(t).y.real();
    CHECK(std::abs(d.at(t).y.real() - expected) < 1e-5 * std::abs(fp.base.k / fp.base.k0) * y0.amplitude);
  }
  CHECK_THROWS_AS(linearized_delta(flux(1, 0, 9, 1, 1, 2)), mathieu::ResonanceError);
}

TEST_CASE("induced field model") {
  const FluxParams unit = flux(1, 0, 1, 0, 0.1, 10);
  for (double t : {0.0, 0.3, 1.7}) {
    CHECK(induced_field(unit, t) == doctest::Approx(10.0 * std::sin(10.0 * t)).epsilon(1e-14));
  }
  const InducedFieldModel undamped = induced_field_model(flux(1, 0, 500, 3, 0.1, 10));
  CHECK(undamped.phi == 0.0);
  CHECK(undamped.alpha == 0.0);

  const FluxParams fp = flux(1.2, 0.7, -300, 4, 0.05, 3, 2, 0.5, 1.5);
  const InducedFieldModel m = induced_field_model(fp);
  CHECK(m.epsilon == fp.base.k / fp.base.k0);
  CHECK(std::tan(m.phi) == doctest::Approx(2 * 0.7 * 0.05 / -300.0).epsilon(1e-15));
  CHECK(std::tan(m.alpha) == doctest::Approx(0.7 * 3 / -300.0).epsilon(1e-15));
  CHECK(m.prefactor == doctest::Approx(4 * 0.5 * 3 / (300.0 * 2.25)).epsilon(1e-15));
  CHECK(m.in_regime == false);  // m Omega^2 = 10.8 > 6
  CHECK(m.reasons.size() == 1);

  const InducedFieldModel in = induced_field_model(flux(1, 10, 1e4, 100, 0.1, 10));
  CHECK(in.in_regime);
  CHECK(in.reasons.empty());
  const InducedFieldModel out = induced_field_model(flux(1, 10, 1e4, 1000, 1, 10));
  CHECK(out.reasons.size() == 2);
  CHECK_THROWS_AS(induced_field_model(flux(1, 1, 0, 0, 1, 1)), mathieu::InvalidInput);
}

TEST_CASE("field from the linearized displacement approaches the model in regime") {
  const FluxParams fp = flux(1, 10, 1e4, 100, 0.1, 10);
  const SinusoidalResponse y0 = particular_k0(fp);
  const SinusoidSum d = linearized_delta(fp);
  const InducedFieldModel m = induced_field_model(fp);
  double worst = 0.0;
  for (double t : oracle::uniform_grid(0.0, 70.0, 3000)) {
    SolutionSample s = y0.at(t);
    s.dy += d.at(t).dy;
    worst = std::max(worst, std::abs(field_from_velocity(fp, s) - m.field(t, fp.Omega, fp.base.omega)));
  }
  // every neglected term is first order in the 0.01 regime ratios
  CHECK(worst < 0.05 * m.prefactor);
}

TEST_CASE("first-order symmetric branch") {
  const FluxParams fp = flux(1, 0.4, 2, 0, 1, 3, 1.5, 2, 1.2);
  const SymmetricSolution s = symmetric_case_solution(fp, 0.25);
  CHECK(s.at(0.0).y == Complex{0.25, 0.0});
  CHECK(s.at(0.0).dy.real() == doctest::Approx(fp.drive() / (2 * 0.4)).epsilon(1e-15));
  for (double t : oracle::uniform_grid(0.0, 10.0, 101)) {
    CHECK(std::abs(symmetric_case_residual(fp, s, t)) < 1e-15);
  }
  CHECK_THROWS_AS(symmetric_case_solution(flux(1, 0, 2, 0, 1, 3), 0.0), mathieu::InvalidInput);
}

TEST_CASE("full simulation settles on the particular solution") {
  const FluxParams fp = flux(1, 2, 9, 0, 1, 1.3);
  const SinusoidalResponse y0 = particular_k0(fp);
  // transient ~ exp(-eta t / 2m); 1e-6 needs t > 2m ln(1e6)/eta, about 28 m/eta
  const double t_settle = 30.0 * fp.base.m / fp.base.eta;
  const auto grid = oracle::uniform_grid(t_settle, t_settle + 20.0, 200);
  const auto series = simulate_full(fp, 0.0, grid.back(), 1e-11, grid);
  double worst = 0.0;
  for (const SolutionSample& s : series.values) {
    worst = std::max(worst, std::abs(s.y - y0.at(s.t).y));
  }
  CHECK(worst < 1e-6 * y0.amplitude);

  // undamped, started on the particular orbit
  const FluxParams free = flux(1, 0, 9, 0, 1, 1.3);
  const SinusoidalResponse p = particular_k0(free);
  const SolutionSample start = p.at(0.0);
  const auto orbit = simulate_full(free, 0.0, 30.0, 1e-11, oracle::uniform_grid(0.0, 30.0, 300),
                                   start.y, start.dy);
  double drift = 0.0;
  for (const SolutionSample& s : orbit.values) drift = std::max(drift, std::abs(s.y - p.at(s.t).y));
  CHECK(drift < 1e-8);
}

TEST_CASE("modulation analysis on synthetic signals") {
  const double Omega = 10.0;
  const double omega = 0.1;
  const double dt = 2 * kPi / Omega / 32;
  const auto n = static_cast<std::size_t>(5 * 2 * kPi / omega / dt);
  std::vector<double> t(n);
  std::vector<double> pure(n);
  std::vector<double> modulated(n);
  InducedFieldModel model;
  model.prefactor = 2.0;
  model.epsilon = 0.01;
  model.phi = 0.4;
  model.alpha = 0.2;
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<double>(i) * dt;
    pure[i] = 3.0 * std::sin(Omega * t[i] - 0.3);
    modulated[i] = model.field(t[i], Omega, omega);
  }
  const ModulationResult flat = modulation_analysis(t, pure, Omega, omega);
  CHECK(flat.modulation_depth < 1e-6);
  CHECK(flat.carrier_amplitude == doctest::Approx(3.0).epsilon(1e-6));
  const ModulationResult r = modulation_analysis(t, modulated, Omega, omega);
  CHECK(std::abs(r.modulation_depth - 0.01) < 1e-4);
  CHECK(std::abs(r.modulation_phase - 0.4) < 1e-2);
  CHECK(r.carrier_amplitude == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(std::abs(r.carrier_frequency - Omega) <= r.carrier_bin);
  CHECK(std::abs(r.modulation_frequency - omega) <= r.modulation_bin);

  const std::span<const double> ts(t.data(), n / 2);
  const std::span<const double> ss(modulated.data(), n / 2);
  CHECK_THROWS_AS(modulation_analysis(ts, ss, Omega, omega), mathieu::SpanError);
  CHECK_THROWS_AS(modulation_analysis(t, modulated, Omega, omega, t[n / 2]), mathieu::SpanError);
}

TEST_CASE("simulated field is amplitude modulated at depth k/K0") {
  const FluxParams fp = flux(1, 10, 1e4, 100, 0.1, 10);
  const double dt = 2 * kPi / fp.Omega / 32;
  const double t_start = 30.0 * fp.base.m / fp.base.eta;
  const auto n = static_cast<std::size_t>(std::ceil((t_start + 4 * 2 * kPi / fp.base.omega) / dt));
  const auto grid = oracle::uniform_grid(0.0, static_cast<double>(n - 1) * dt, n);
  const auto series = simulate_full(fp, 0.0, grid.back(), 1e-10, grid);
  std::vector<double> field(n);
  for (std::size_t i = 0; i < n; ++i) field[i] = field_from_velocity(fp, series.values[i]);
  const ModulationResult r = modulation_analysis(grid, field, fp.Omega, fp.base.omega, t_start);
  const InducedFieldModel m = induced_field_model(fp);
  MESSAGE("depth " << r.modulation_depth << " phase " << r.modulation_phase << " amplitude "
                   << r.carrier_amplitude << " prefactor " << m.prefactor);
  CHECK(std::abs(r.modulation_depth - m.epsilon) < 0.1 * m.epsilon);
  CHECK(std::abs(r.carrier_frequency - fp.Omega) <= r.carrier_bin);
  CHECK(std::abs(r.modulation_frequency - fp.base.omega) <= r.modulation_bin);
}
