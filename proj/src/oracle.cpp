#include "mathieu_kit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mathieu_kit/errors.hpp"
#include "mathieu_kit/exponent.hpp"

namespace mathieu::oracle {
namespace {

using State = std::array<double, 4>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// dense output
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// PI step-size controller constants.
constexpr double kBeta = 0.04;
constexpr double kExpo1 = 0.2 - kBeta * 0.75;
constexpr double kSafety = 0.9;
constexpr double kMaxShrink = 5.0;  // h_new >= h / 5
constexpr double kMaxGrow = 0.1;    // h_new <= h * 10

State pack(Complex y, Complex dy) { return {y.real(), y.imag(), dy.real(), dy.imag()}; }

class Rhs {
 public:
  Rhs(const LinearODE& ode, IntegrationStats& stats) : ode_(ode), stats_(stats) {}
  State operator()(double t, const State& s) const {
    ++stats_.evaluations;
    const Complex y{s[0], s[1]};
    const Complex dy{s[2], s[3]};
    const Complex d2y = ode_.second_derivative(t, y, dy);
    return {dy.real(), dy.imag(), d2y.real(), d2y.imag()};
  }

 private:
  const LinearODE& ode_;
  IntegrationStats& stats_;
};

template <typename... Terms>
State combine(const State& base, double h, const Terms&... terms) {
  State out = base;
  for (std::size_t i = 0; i < 4; ++i) {
    double acc = 0.0;
    ((acc += terms.first * (*terms.second)[i]), ...);
    out[i] += h * acc;
  }
  return out;
}

std::pair<double, const State*> w(double c, const State& s) { return {c, &s}; }

double error_norm(const State& err, const State& y, const State& y1, double atol, double rtol) {
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double sk = atol + rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
    const double e = err[i] / sk;
    sum += e * e;
  }
  return std::sqrt(sum / 4.0);
}

double rms_scaled(const State& v, const State& y, double atol, double rtol) {
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double sk = atol + rtol * std::abs(y[i]);
    sum += (v[i] / sk) * (v[i] / sk);
  }
  return std::sqrt(sum / 4.0);
}

double initial_step(const Rhs& rhs, double t0, const State& y0, const State& f0, double span,
                    double atol, double rtol) {
  const double dnf = rms_scaled(f0, y0, atol, rtol);
  const double dny = rms_scaled(y0, y0, atol, rtol);
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
  h = std::min(h, span);
  const State y1 = combine(y0, h, w(1.0, f0));
  const State f1 = rhs(t0 + h, y1);
  State diff{};
  for (std::size_t i = 0; i < 4; ++i) diff[i] = f1[i] - f0[i];
  const double der2 = rms_scaled(diff, y0, atol, rtol) / h;
  const double der12 = std::max(std::abs(der2), dnf);
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, span});
}

template <typename Segment>
void evaluate_segment(const Segment& seg, double h, double s, State& state, State& rate) {
  const double s1 = 1.0 - s;
  const auto& r = seg.r;
  for (std::size_t i = 0; i < 4; ++i) {
    state[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
    const double ds = r[1][i] + (1.0 - 2.0 * s) * r[2][i] + s * (2.0 - 3.0 * s) * r[3][i] +
                      2.0 * s * s1 * (s1 - s) * r[4][i];
    rate[i] = ds / h;
  }
}

// |y''_interp - y''_equation| relative to the mixed tolerance on the terms.
// `floor` is the rounding level of a derivative formed from y' differences.
double defect_ratio(const LinearODE& ode, double t, const State& st, const State& rt,
                    double atol, double rtol, double floor) {
  const Complex y{st[0], st[1]};
  const Complex dy{st[2], st[3]};
  const Complex d2y{rt[2], rt[3]};
  const Complex t2 = ode.p(t) * dy;
  const Complex t3 = ode.q(t) * y;
  const Complex t4 = ode.forcing(t);
  const double scale =
      std::max({std::abs(d2y), std::abs(t2), std::abs(t3), std::abs(t4)});
  return std::abs(d2y + t2 + t3 - t4) / (atol + rtol * scale + floor);
}

void check_span(double t0, double t1) {
  if (!std::isfinite(t0) || !std::isfinite(t1) || !(t1 > t0)) {
    throw InvalidInput("integration span requires t1 > t0");
  }
}

void check_tol(double tol) {
  if (!(tol >= 1e-14 && tol <= 1e-3)) {
    std::ostringstream msg;
    msg << "oracle tolerance " << tol << " outside [1e-14, 1e-3]";
    throw InvalidInput(msg.str());
  }
}

}  // namespace

LinearODE mathieu_ode(const GeneralParams& gp) {
  gp.validate();
  const Complex h = gp.h;
  const Complex theta = gp.theta;
  return {[](double) { return Complex{0.0, 0.0}; },
          [h, theta](double t) { return h - 2.0 * theta * std::cos(2.0 * t); }, nullptr};
}

LinearODE damped_ode(const DampedParams& params) {
  params.validate();
  const double a = params.damping_rate();
  const double b = params.stiffness_rate();
  const double c = params.modulation_rate();
  const double omega = params.omega;
  return {[a](double) { return Complex{a, 0.0}; },
          [b, c, omega](double t) { return Complex{b + c * std::cos(omega * t), 0.0}; }, nullptr};
}

DenseSolution integrate_dense(const LinearODE& ode, Complex y0, Complex dy0, double t0, double t1,
                              const IntegratorOptions& options) {
  check_span(t0, t1);
  check_tol(options.tol);
  if (!ode.p || !ode.q) throw InvalidInput("LinearODE requires p and q");

  DenseSolution sol;
  sol.ode_ = ode;
  const Rhs rhs(sol.ode_, sol.stats_);
  const double rtol = options.tol;
  const double atol = options.atol.value_or(options.tol);
  const double span = t1 - t0;

  double t = t0;
  State y = pack(y0, dy0);
  State k1 = rhs(t, y);
  sol.times_.push_back(t);

  const bool fixed = options.fixed_step > 0.0;
  double h;
  if (fixed) {
    const double n = std::ceil(span / options.fixed_step);
    h = span / n;
  } else {
    h = initial_step(rhs, t0, y, k1, span, atol, rtol);
  }

  double facold = 1e-4;
  bool last_rejected = false;
  bool last = false;
  while (!last) {
    if (sol.stats_.accepted + sol.stats_.rejected >= options.max_steps) {
      throw StiffnessError("integrator exceeded its step budget", t);
    }
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      throw StiffnessError("step size underflow at t = " + std::to_string(t), t);
    }
    if (t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }

    const State y2 = combine(y, h, w(a21, k1));
    const State k2 = rhs(t + c2 * h, y2);
    const State y3 = combine(y, h, w(a31, k1), w(a32, k2));
    const State k3 = rhs(t + c3 * h, y3);
    const State y4 = combine(y, h, w(a41, k1), w(a42, k2), w(a43, k3));
    const State k4 = rhs(t + c4 * h, y4);
    const State y5 = combine(y, h, w(a51, k1), w(a52, k2), w(a53, k3), w(a54, k4));
    const State k5 = rhs(t + c5 * h, y5);
    const State y6 = combine(y, h, w(a61, k1), w(a62, k2), w(a63, k3), w(a64, k4), w(a65, k5));
    const State k6 = rhs(t + h, y6);
    const State ynew = combine(y, h, w(a71, k1), w(a73, k3), w(a74, k4), w(a75, k5), w(a76, k6));
    const State k7 = rhs(t + h, ynew);

    double err = 0.0;
    if (!fixed) {
      State e{};
      e = combine(e, h, w(e1, k1), w(e3, k3), w(e4, k4), w(e5, k5), w(e6, k6), w(e7, k7));
      err = error_norm(e, y, ynew, atol, rtol);
      if (!std::isfinite(err)) {
        throw StiffnessError("non-finite state at t = " + std::to_string(t), t);
      }
    }

    const double fac11 = std::pow(std::max(err, 1e-300), kExpo1);
    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::max(kMaxGrow, std::min(kMaxShrink, fac / kSafety));
    double hnew = h / fac;

    // Defect of the continuous extension at interior points.
    double defect = 0.0;
    DenseSolution::Segment seg;
    {
      State dense5{};
      dense5 = combine(dense5, h, w(d1, k1), w(d3, k3), w(d4, k4), w(d5, k5), w(d6, k6),
                       w(d7, k7));
      for (std::size_t i = 0; i < 4; ++i) {
        const double ydiff = ynew[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        seg.r[0][i] = y[i];
        seg.r[1][i] = ydiff;
        seg.r[2][i] = bspl;
        seg.r[3][i] = ydiff - h * k7[i] - bspl;
        seg.r[4][i] = dense5[i];
      }
      if (!fixed && options.defect_control && err <= 1.0) {
        const double rate_scale = std::max(std::hypot(y[2], y[3]), std::hypot(ynew[2], ynew[3]));
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * rate_scale / h;
        for (double s : {0.25, 0.5, 0.75}) {
          State st{};
          State rt{};
          evaluate_segment(seg, h, s, st, rt);
          defect = std::max(defect, defect_ratio(sol.ode_, t + s * h, st, rt, atol, rtol, floor));
        }
      }
    }
    const double defect_fac =
        std::clamp(kSafety * std::pow(std::max(defect, 1e-300), -0.25), 0.2, 10.0);

    if (fixed || (err <= 1.0 && defect <= 1.0)) {
      facold = std::max(err, 1e-4);
      ++sol.stats_.accepted;
      sol.segments_.push_back(seg);
      t = last ? t1 : t + h;
      sol.times_.push_back(t);
      y = ynew;
      k1 = k7;
      if (fixed) continue;
      if (options.defect_control) hnew = std::min(hnew, h * defect_fac);
      if (last_rejected) hnew = std::min(hnew, h);
      last_rejected = false;
      h = hnew;
    } else {
      ++sol.stats_.rejected;
      hnew = err > 1.0 ? h / std::min(kMaxShrink, fac11 / kSafety) : h * defect_fac;
      last_rejected = true;
      last = false;
      h = hnew;
    }
  }
  return sol;
}

std::size_t DenseSolution::locate(double t) const {
  const double t_lo = times_.front();
  const double t_hi = times_.back();
  const double slack = 1e-12 * std::max(1.0, std::abs(t_hi - t_lo));
  if (!(t >= t_lo - slack && t <= t_hi + slack)) {
    std::ostringstream msg;
    msg << "time " << t << " outside integrated span [" << t_lo << ", " << t_hi << "]";
    throw InvalidInput(msg.str());
  }
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t idx = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  return std::min(idx, segments_.size() - 1);
}

void DenseSolution::interpolate(double t, State& state, State& rate) const {
  const std::size_t idx = locate(t);
  const double t_start = times_[idx];
  const double h = times_[idx + 1] - t_start;
  evaluate_segment(segments_[idx], h, (t - t_start) / h, state, rate);
}

SolutionSample DenseSolution::at(double t) const {
  State s{};
  State r{};
  interpolate(t, s, r);
  const Complex y{s[0], s[1]};
  const Complex dy{s[2], s[3]};
  return {t, y, dy, ode_.second_derivative(t, y, dy)};
}

SolutionSample DenseSolution::differentiated(double t) const {
  State s{};
  State r{};
  interpolate(t, s, r);
  return {t, {s[0], s[1]}, {s[2], s[3]}, {r[2], r[3]}};
}

TimeSeries integrate(const LinearODE& ode, Complex y0, Complex dy0, double t0, double t1,
                     double tol, std::span<const double> grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= t0 && grid[i] <= t1)) throw InvalidInput("output grid leaves the span");
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw InvalidInput("output grid must be strictly increasing");
    }
  }
  IntegratorOptions options;
  options.tol = tol;
  const DenseSolution sol = integrate_dense(ode, y0, dy0, t0, t1, options);
  TimeSeries out;
  if (grid.empty()) {
    out.grid = sol.step_times();
  } else {
    out.grid.assign(grid.begin(), grid.end());
  }
  out.values.reserve(out.grid.size());
  for (double t : out.grid) out.values.push_back(sol.at(t));
  return out;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::report_only:
      return "report-only";
  }
  return "report-only";
}

ResidualReport residual(const LinearODE& ode, std::span<const SolutionSample> samples,
                        std::optional<double> threshold, bool keep_per_point) {
  ResidualReport report;
  std::vector<double> raw;
  raw.reserve(samples.size());
  double scale = 1.0;
  for (const SolutionSample& s : samples) {
    const Complex t1 = s.d2y;
    const Complex t2 = ode.p(s.t) * s.dy;
    const Complex t3 = ode.q(s.t) * s.y;
    const Complex t4 = ode.forcing(s.t);
    scale = std::max({scale, std::abs(t1), std::abs(t2), std::abs(t3), std::abs(t4)});
    raw.push_back(std::abs(t1 + t2 + t3 - t4));
  }
  report.normalization = std::max(scale, 1e-300);
  double sum = 0.0;
  for (double r : raw) {
    const double rel = r / report.normalization;
    report.linf = std::max(report.linf, rel);
    sum += rel * rel;
    if (keep_per_point) report.per_point.push_back(rel);
  }
  if (!raw.empty()) report.l2 = std::sqrt(sum / static_cast<double>(raw.size()));
  bool finite = std::isfinite(report.linf) && std::isfinite(report.l2);
  if (!finite) report.linf = report.l2 = std::numeric_limits<double>::infinity();
  if (threshold) {
    report.verdict = (finite && report.linf < *threshold) ? Verdict::pass : Verdict::fail;
  }
  return report;
}

ResidualReport residual(const LinearODE& ode, const Candidate& candidate,
                        std::span<const double> grid, std::optional<double> threshold,
                        bool keep_per_point) {
  std::vector<SolutionSample> samples;
  samples.reserve(grid.size());
  for (double t : grid) {
    SolutionSample s = candidate(t);
    s.t = t;
    samples.push_back(s);
  }
  return residual(ode, samples, threshold, keep_per_point);
}

namespace {

// 5-point Gauss-Legendre on [a, b].
Complex integrate_gauss(const CoefficientFn& fn, double a, double b) {
  static constexpr double nodes[] = {0.0, -0.5384693101056831, 0.5384693101056831,
                                     -0.9061798459386640, 0.9061798459386640};
  static constexpr double weights[] = {0.5688888888888889, 0.4786286704993665,
                                       0.4786286704993665, 0.2369268850561891,
                                       0.2369268850561891};
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  Complex sum = 0.0;
  for (int i = 0; i < 5; ++i) sum += weights[i] * fn(mid + half * nodes[i]);
  return half * sum;
}

}  // namespace

WronskianReport wronskian_abel(const Candidate& first, const Candidate& second,
                               const LinearODE& ode, std::span<const double> grid,
                               std::optional<double> threshold) {
  WronskianReport out;
  if (grid.empty()) return out;
  const SolutionSample a0 = first(grid[0]);
  const SolutionSample b0 = second(grid[0]);
  const Complex p1 = a0.y * b0.dy;
  const Complex p2 = a0.dy * b0.y;
  out.w0 = p1 - p2;
  const double term_scale = std::max({std::abs(p1), std::abs(p2), 1e-300});
  out.dependent = std::abs(out.w0) <= 1e-12 * term_scale;

  std::vector<double> raw;
  raw.reserve(grid.size());
  Complex integral = 0.0;
  double scale = 0.0;
  std::vector<double> expected_mag;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0) {
      // Subdivide so that each panel is short relative to the coefficient scale.
      const double a = grid[i - 1];
      const double b = grid[i];
      constexpr int kPanels = 4;
      for (int j = 0; j < kPanels; ++j) {
        integral += integrate_gauss(ode.p, a + (b - a) * j / kPanels,
                                    a + (b - a) * (j + 1) / kPanels);
      }
    }
    const SolutionSample a = first(grid[i]);
    const SolutionSample b = second(grid[i]);
    const Complex wt = a.y * b.dy - a.dy * b.y;
    const Complex expected = out.w0 * std::exp(-integral);
    raw.push_back(std::abs(wt - expected));
    expected_mag.push_back(std::abs(expected));
    scale = std::max({scale, std::abs(a.y * b.dy), std::abs(a.dy * b.y)});
  }

  ResidualReport& r = out.report;
  double sum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double denom = out.dependent ? std::max(scale, 1e-300) : std::max(expected_mag[i], 1e-300);
    const double rel = raw[i] / denom;
    r.linf = std::max(r.linf, rel);
    sum += rel * rel;
    r.per_point.push_back(rel);
  }
  r.l2 = std::sqrt(sum / static_cast<double>(raw.size()));
  r.normalization = out.dependent ? std::max(scale, 1e-300) : std::max(expected_mag[0], 1e-300);
  if (threshold) {
    r.verdict = (!out.dependent && r.linf < *threshold) ? Verdict::pass : Verdict::fail;
  } else if (out.dependent) {
    r.verdict = Verdict::fail;
  }
  return out;
}

Monodromy monodromy(const GeneralParams& gp, double tol) {
  const LinearODE ode = mathieu_ode(gp);
  IntegratorOptions options;
  options.tol = tol;
  options.defect_control = false;
  options.atol = tol * 1e-3;
  const SolutionSample u = integrate_dense(ode, 1.0, 0.0, 0.0, kPi, options).final_state();
  const SolutionSample v = integrate_dense(ode, 0.0, 1.0, 0.0, kPi, options).final_state();

  Monodromy out;
  out.matrix = {u.y, v.y, u.dy, v.dy};
  out.trace = u.y + v.dy;
  out.determinant = u.y * v.dy - v.y * u.dy;

  // Multipliers from the characteristic polynomial with the computed
  // determinant: for M close to a multiple of the identity the discriminant
  // is second order in the integration error, so the roots stay accurate.
  const Complex disc = out.trace * out.trace - 4.0 * out.determinant;
  if (gp.is_real()) {
    const double tr = out.trace.real();
    const double dr = disc.real();
    if (dr <= 0.0) {
      // conjugate pair on the unit circle
      const double arg = std::atan2(std::sqrt(-dr), tr);
      out.mu_raw = {0.0, arg / kPi};
      out.multiplier = std::polar(1.0, arg);
    } else if (tr >= 0.0) {
      const double rho = 0.5 * (tr + std::sqrt(dr));
      out.mu_raw = {std::log(rho) / kPi, 0.0};
      out.multiplier = rho;
    } else {
      const double rho = 0.5 * (tr - std::sqrt(dr));
      out.mu_raw = {std::log(-rho) / kPi, 1.0};
      out.multiplier = rho;
      out.negative_real_multiplier = true;
    }
    out.mu = normalize_exponent(out.mu_raw);
    return out;
  }

  const Complex root = std::sqrt(disc);
  const Complex r1 = 0.5 * (out.trace + root);
  const Complex r2 = 0.5 * (out.trace - root);
  out.multiplier = std::abs(r1) >= std::abs(r2) ? r1 : r2;
  out.negative_real_multiplier = out.multiplier.real() < 0.0 &&
                                 std::abs(out.multiplier.imag()) <= 1e-12 * std::abs(out.multiplier);
  out.mu_raw = std::log(out.multiplier) / kPi;
  out.mu = normalize_exponent(out.mu_raw);
  return out;
}

Complex monodromy_exponent(const GeneralParams& gp, double tol) { return monodromy(gp, tol).mu; }

std::vector<double> uniform_grid(double t0, double t1, std::size_t n) {
  if (n < 2) throw InvalidInput("uniform grid needs at least two points");
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  grid.back() = t1;
  return grid;
}

}  // namespace mathieu::oracle
