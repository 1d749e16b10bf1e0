#include <doctest.h>

#include <cmath>
#include <random>

#include "mathieu_kit/closed_form.hpp"
#include "mathieu_kit/errors.hpp"
#include "mathieu_kit/oracle.hpp"
#include "mathieu_kit/reductions.hpp"

using mathieu::Complex;
using mathieu::DampedParams;
using mathieu::kPi;
using mathieu::SolutionSample;
using namespace mathieu::reductions;
namespace oracle = mathieu::oracle;

namespace {

DampedParams params(double m, double eta, double k0, double k, double omega) {
  DampedParams p;
  p.m = m;
  p.eta = eta;
  p.k0 = k0;
  p.k = k;
  p.omega = omega;
  return p;
}

ReductionInput input(Family f, double a, double b, double lambda = 0.0) {
  ReductionInput in;
  in.family = f;
  in.a = a;
  in.b = b;
  in.lambda = lambda;
  return in;
}

// Solve the reduced equation over the whole z range of the grid and pull the
// interior samples back.
std::vector<SolutionSample> pulled_solution(const ReductionResult& r, Complex w0, Complex dw0,
                                            std::size_t n = 200) {
  const std::vector<double> grid = r.interior_grid(n, 0.0, 10.0);
  const auto [lo, hi] = r.transformed_domain();
  const double z0 = std::isfinite(lo) ? lo : grid.front();
  const double z1 = std::isfinite(hi) ? hi : grid.back();
  oracle::IntegratorOptions opts;
  opts.tol = 1e-11;
  const auto sol = oracle::integrate_dense(r.reduced_equation(), w0, dw0, z0, z1, opts);
  std::vector<SolutionSample> z_samples;
  for (double z : grid) z_samples.push_back(sol.at(z));
  return pullback(r, z_samples).interior();
}

double source_residual(const ReductionResult& r, Complex w0, Complex dw0) {
  const auto samples = pulled_solution(r, w0, dw0);
  return oracle::residual(r.source_equation(), samples).linf;
}

}  // namespace

TEST_CASE("stated examples") {
  const ReductionResult r11 = reduce(input(Family::eq11, 1.0, 2.0));
  CHECK(r11.gp.h == Complex{3.0, 0.0});
  CHECK(r11.gp.theta == Complex{-0.5, 0.0});
  CHECK(std::string(to_string(r11.map)) == "t = cos z");

  const ReductionResult r13 = reduce(input(Family::eq13, 1.0, 2.0));
  CHECK(r13.gp.h == Complex{-5.0, 0.0});
  CHECK(r13.gp.theta == Complex{0.5, 0.0});
}

TEST_CASE("eq15 and eq17 signs are fixed by substitution, not by the printed formulas") {
  // y'' - y = 0 with lambda = 2 maps to w'' - w = 0
  const ReductionResult r15 = reduce(input(Family::eq15, 0.0, -1.0, 2.0));
  CHECK(r15.gp.h == Complex{-1.0, 0.0});
  CHECK(r15.gp.theta.real() == 0.0);
  CHECK(r15.stated_gp.h == Complex{1.0, 0.0});

  const ReductionResult r17 = reduce(input(Family::eq17_sin, 2.0, 0.0));
  CHECK(r17.gp.h == Complex{1.0, 0.0});
  CHECK(r17.gp.theta == Complex{0.5, 0.0});
  CHECK(r17.stated_gp.theta == Complex{-0.5, 0.0});
  const ReductionResult r17c = reduce(input(Family::eq17_cos, 2.0, 0.0));
  CHECK(r17c.gp.theta == Complex{-0.5, 0.0});

  // the printed eq15 values do not reproduce the source equation
  ReductionResult wrong = reduce(input(Family::eq15, 0.7, 0.3, 1.3));
  CHECK(source_residual(wrong, 1.0, 0.5) < 1e-6);
  wrong.gp = wrong.stated_gp;
  CHECK(source_residual(wrong, 1.0, 0.5) > 1e-2);
}

TEST_CASE("eq11 needs the -t y' term") {
  const ReductionResult r = reduce(input(Family::eq11, 0.8, -0.4));
  const auto samples = pulled_solution(r, 1.0, 0.3);
  CHECK(oracle::residual(r.source_equation(), samples).linf < 1e-6);
  CHECK(oracle::residual(r.stated_source_equation(), samples).linf > 1e-2);
}

TEST_CASE("damped reduction examples") {
  auto check = [](const DampedParams& p, double h, double theta) {
    const ReductionResult r = damped_to_general(p);
    CHECK(std::abs(r.gp.h - Complex{h, 0.0}) < 1e-15);
    CHECK(std::abs(r.gp.theta - Complex{theta, 0.0}) < 1e-15);
    CHECK(r.prefactor_rate == doctest::Approx(p.eta / (2.0 * p.m)));
    CHECK(r.time_scale == doctest::Approx(2.0 / p.omega));
  };
  check(params(1, 0, 4, 0, 2), 4.0, 0.0);
  check(params(1, 0, 4, 2, 2), 4.0, -1.0);
  check(params(1, 2, 4, 0, 2), 3.0, 0.0);
  // the mass enters the prefactor
  CHECK(damped_to_general(params(2, 2, 4, 0, 2)).prefactor_rate == 0.5);
}

TEST_CASE("damped reduction against the substitution oracle") {
  // Integrate the damped equation directly and compare with the pulled-back
  // Mathieu solution with matching initial data.
  for (const DampedParams& p : {params(1, 0, 4, 2, 2), params(1, 2, 4, 0, 2),
                                params(1.7, 0.6, 3.1, 1.4, 1.3)}) {
    const ReductionResult r = damped_to_general(p);
    const Complex w0{0.9, 0.0};
    const Complex dw0{-0.2, 0.0};
    const double tau1 = 8.0;
    oracle::IntegratorOptions opts;
    opts.tol = 1e-12;
    const auto reduced = oracle::integrate_dense(r.reduced_equation(), w0, dw0, 0.0, tau1, opts);
    std::vector<SolutionSample> z_samples;
    for (double tau : oracle::uniform_grid(0.0, tau1, 50)) z_samples.push_back(reduced.at(tau));
    const PulledSeries pulled = pullback(r, z_samples);
    const SolutionSample y0 = pulled.samples.front();
    const double t1 = r.to_original(tau1);
    const auto direct =
        oracle::integrate_dense(oracle::damped_ode(p), y0.y, y0.dy, 0.0, t1, opts);
    double worst = 0.0;
    for (const SolutionSample& s : pulled.samples) {
      const SolutionSample d = direct.at(s.t);
      worst = std::max({worst, std::abs(d.y - s.y), std::abs(d.dy - s.dy)});
    }
    CHECK(worst < 1e-8);
    CHECK(oracle::residual(r.source_equation(), pulled.samples).linf < 1e-8);
  }
}

TEST_CASE("pulled-back solutions satisfy every source family") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  std::uniform_real_distribution<double> lam(0.5, 3.0);
  std::uniform_real_distribution<double> init(-1.0, 1.0);
  for (Family f : {Family::eq11, Family::eq13, Family::eq15, Family::eq17_sin,
                   Family::eq17_cos}) {
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const double l = (trial % 2 == 0 ? 1.0 : -1.0) * lam(rng);
      const ReductionResult r = reduce(input(f, coeff(rng), coeff(rng), l));
      worst = std::max(worst, source_residual(r, {init(rng), 0.0}, {init(rng), 0.0}));
    }
    INFO(to_string(f));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("pullback flags vanishing map derivatives and rejects out-of-domain samples") {
  const ReductionResult r = reduce(input(Family::eq11, 1.0, 2.0));
  const std::vector<SolutionSample> z{{0.0, 1.0, 0.0, 0.0}, {1.0, 1.0, 0.0, 0.0},
                                      {kPi, 1.0, 0.0, 0.0}};
  const PulledSeries p = pullback(r, z);
  CHECK(p.endpoint[0]);
  CHECK_FALSE(p.endpoint[1]);
  CHECK(p.endpoint[2]);
  CHECK(p.samples[0].t == 1.0);
  CHECK(std::isnan(p.samples[0].dy.real()));
  CHECK(p.interior().size() == 1);

  const std::vector<SolutionSample> outside{{-0.1, 1.0, 0.0, 0.0}};
  CHECK_THROWS_AS(pullback(r, outside), mathieu::DomainError);
  CHECK_THROWS_AS(r.to_transformed(1.5), mathieu::DomainError);
  const ReductionResult r13 = reduce(input(Family::eq13, 1.0, 2.0));
  const std::vector<SolutionSample> beyond{{2.0, 1.0, 0.0, 0.0}};
  CHECK_THROWS_AS(pullback(r13, beyond), mathieu::DomainError);

  // identity map: time stamps only
  const ReductionResult r17 = reduce(input(Family::eq17_sin, 1.0, 0.0));
  const std::vector<SolutionSample> s{{0.3, {1.0, 2.0}, {3.0, 0.0}, {4.0, 0.0}}};
  const PulledSeries q = pullback(r17, s);
  CHECK(q.samples[0].t == 0.3);
  CHECK(q.samples[0].y == Complex{1.0, 2.0});
  CHECK(q.samples[0].dy == Complex{3.0, 0.0});
}

TEST_CASE("variable maps round trip") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const DampedParams p = params(1.3, 0.4, 2.0, 0.5, 1.7);
  ReductionInput damped;
  damped.family = Family::damped;
  damped.params = p;
  for (const ReductionInput& in :
       {input(Family::eq11, 1, 1), input(Family::eq13, 1, 1), input(Family::eq15, 1, 1, -2.3),
        input(Family::eq17_cos, 1, 1), damped}) {
    const ReductionResult r = reduce(in);
    auto [lo, hi] = r.transformed_domain();
    if (!std::isfinite(lo)) {
      lo = -20.0;
      hi = 20.0;
    }
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double z = lo + (hi - lo) * unit(rng);
      worst = std::max(worst, std::abs(r.to_original(r.to_transformed(r.to_original(z))) -
                                       r.to_original(z)));
      // inverse then forward, on the original variable
      const double t = r.to_original(z);
      worst = std::max(worst, std::abs(r.to_original(r.to_transformed(t)) - t));
    }
    INFO(to_string(in.family));
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(reduce(input(Family::eq15, 1.0, 1.0, 0.0)), mathieu::InvalidInput);
  ReductionInput damped;
  damped.family = Family::damped;
  CHECK_THROWS_AS(reduce(damped), mathieu::InvalidInput);
  ReductionInput extra = input(Family::eq11, 1.0, 1.0);
  extra.params = params(1, 0, 1, 1, 1);
  CHECK_THROWS_AS(reduce(extra), mathieu::InvalidInput);
  CHECK(parse_family("eq17-cos") == Family::eq17_cos);
  CHECK_THROWS_AS(parse_family("eq12"), mathieu::InvalidInput);
}

TEST_CASE("damped reduction composes with the undamped closed form") {
  // gp -> undamped preimage -> gp is the identity. The closed form on the
  // preimage solves the exponential-modulation equation; against the cosine
  // form of the reduced equation its residual is only reported.
  for (double h : {1.0, 4.0, 9.0}) {
    const mathieu::GeneralParams gp{{h, 0.0}, {-0.75, 0.0}};
    const DampedParams pre = mathieu::closed_form::undamped_preimage(gp);
    const ReductionResult r = damped_to_general(pre);
    CHECK(std::abs(r.gp.h - gp.h) < 1e-14);
    CHECK(std::abs(r.gp.theta - gp.theta) < 1e-14);
    CHECK(r.time_scale == 1.0);
    CHECK(r.prefactor_rate == 0.0);
    const auto spec = mathieu::closed_form::undamped_general_solution(gp, 1.0, 0.5);
    const auto grid = oracle::uniform_grid(0.1, 3.0, 60);
    const auto eval = [&](double z) { return mathieu::closed_form::eval(spec, r.to_original(z)); };
    const auto exact =
        oracle::residual(mathieu::closed_form::exponential_equation(pre, true), eval, grid, 1e-8);
    CHECK(exact.verdict == oracle::Verdict::pass);
    const auto cosine = oracle::residual(r.reduced_equation(), eval, grid);
    CHECK(cosine.verdict == oracle::Verdict::report_only);
    CHECK(cosine.linf > 1e-3);
  }
}
