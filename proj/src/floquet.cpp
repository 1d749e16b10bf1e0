#include "mathieu_kit/floquet.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "mathieu_kit/errors.hpp"
#include "mathieu_kit/exponent.hpp"
#include "mathieu_kit/oracle.hpp"

namespace mathieu::floquet {
namespace {

constexpr double kMeetingTolerance = 1e-8;
constexpr int kMaxSecantIterations = 200;

bool finite(Complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

void check_trunc(int trunc) {
  if (trunc < 5) throw InvalidInput("truncation must be at least 5, got " + std::to_string(trunc));
  if (trunc > kMaxTruncation) {
    throw InvalidInput("truncation above the supported cap " + std::to_string(kMaxTruncation));
  }
}

Complex diagonal(const GeneralParams& gp, Complex mu, int n) {
  const Complex shifted = mu + Complex{0.0, 2.0 * n};
  return gp.h + shifted * shifted;
}

// Magnitude of the diagonal terms before cancellation.
double diagonal_scale(const GeneralParams& gp, Complex mu, int n) {
  return std::abs(gp.h) + std::norm(mu + Complex{0.0, 2.0 * n});
}

// Index of the smallest diagonal entry; ties go to the smaller |n|, then n >= 0.
int dominant_index(const GeneralParams& gp, Complex mu, int trunc) {
  int best = 0;
  double best_abs = std::abs(diagonal(gp, mu, 0));
  for (int k = 1; k <= trunc; ++k) {
    for (int n : {k, -k}) {
      const double v = std::abs(diagonal(gp, mu, n));
      if (v < best_abs) {
        best_abs = v;
        best = n;
      }
    }
  }
  return best;
}

struct SecantOutcome {
  Complex root;
  int iterations = 0;
  double residual = 0.0;
};

SecantOutcome secant(const GeneralParams& gp, Complex seed, int trunc) {
  Complex x0 = seed;
  Complex x1 = seed + Complex{1e-7, 1e-7} * std::max(1.0, std::abs(seed));
  Complex f0 = hill_determinant(gp, x0, trunc);
  Complex f1 = hill_determinant(gp, x1, trunc);
  SecantOutcome best{x0, 0, std::abs(f0)};
  if (std::abs(f1) < best.residual) best = {x1, 0, std::abs(f1)};
  for (int it = 1; it <= kMaxSecantIterations; ++it) {
    if (f1 == f0 || best.residual == 0.0) {
      best.iterations = it;
      return best;
    }
    const Complex step = f1 * (x1 - x0) / (f1 - f0);
    const Complex x2 = x1 - step;
    if (!finite(x2)) break;
    const Complex f2 = hill_determinant(gp, x2, trunc);
    if (std::abs(f2) < best.residual) best = {x2, it, std::abs(f2)};
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f2;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x2))) {
      best.iterations = it;
      return best;
    }
  }
  std::ostringstream msg;
  msg << "Hill determinant root search did not settle: h = " << gp.h << ", theta = " << gp.theta
      << ", seed = " << seed << ", best = " << best.root << ", |D| = " << best.residual;
  throw ConvergenceError(msg.str());
}

struct RawCoefficients {
  Complex mu;
  std::vector<Complex> c;
  double meeting_residual = 0.0;
};

// One pass at fixed truncation. The exponent is shifted so the dominant
// diagonal sits at n = 0.
RawCoefficients compute_coefficients(const GeneralParams& gp, Complex mu, int trunc) {
  RawCoefficients out;
  out.mu = mu + Complex{0.0, 2.0 * dominant_index(gp, mu, trunc)};
  const auto size = static_cast<std::size_t>(2 * trunc + 1);
  out.c.assign(size, Complex{0.0, 0.0});
  const auto at = [trunc](int n) { return static_cast<std::size_t>(n + trunc); };
  const Complex theta = gp.theta;

  if (theta == Complex{0.0, 0.0}) {
    out.c[at(0)] = 1.0;
    out.meeting_residual = std::abs(diagonal(gp, out.mu, 0)) / diagonal_scale(gp, out.mu, 0);
    return out;
  }

  // ratios c_n / c_{n-1} for n > 0 and c_n / c_{n+1} for n < 0
  std::vector<Complex> up(size + 1, Complex{0.0, 0.0});
  std::vector<Complex> down(size + 1, Complex{0.0, 0.0});
  for (int n = trunc; n >= 1; --n) {
    const Complex next = n == trunc ? Complex{0.0, 0.0} : up[at(n + 1)];
    const Complex denom = diagonal(gp, out.mu, n) - theta * next;
    up[at(n)] = theta / denom;
    if (denom == Complex{0.0, 0.0} || !finite(up[at(n)])) {
      throw DegenerateError("continued fraction breaks down above n = 0 for these parameters");
    }
  }
  for (int n = -trunc; n <= -1; ++n) {
    const Complex prev = n == -trunc ? Complex{0.0, 0.0} : down[at(n - 1)];
    const Complex denom = diagonal(gp, out.mu, n) - theta * prev;
    down[at(n)] = theta / denom;
    if (denom == Complex{0.0, 0.0} || !finite(down[at(n)])) {
      throw DegenerateError("continued fraction breaks down below n = 0 for these parameters");
    }
  }
  out.c[at(0)] = 1.0;
  for (int n = 1; n <= trunc; ++n) out.c[at(n)] = up[at(n)] * out.c[at(n - 1)];
  for (int n = -1; n >= -trunc; --n) out.c[at(n)] = down[at(n)] * out.c[at(n + 1)];

  const Complex row = -theta * out.c[at(-1)] + diagonal(gp, out.mu, 0) - theta * out.c[at(1)];
  const double scale = std::abs(theta) * (std::abs(out.c[at(-1)]) + std::abs(out.c[at(1)])) +
                       diagonal_scale(gp, out.mu, 0);
  out.meeting_residual = std::abs(row) / scale;
  return out;
}

}  // namespace

Complex hill_determinant(const GeneralParams& gp, Complex mu, int trunc) {
  // Continuant of the tridiagonal system, row n scaled by 1 / (1 + 4n^2).
  const Complex theta2 = gp.theta * gp.theta;
  Complex prev2 = 1.0;
  Complex prev = 0.0;
  double prev_scale = 0.0;
  for (int n = -trunc; n <= trunc; ++n) {
    const double s = 1.0 / (1.0 + 4.0 * n * n);
    const Complex a = diagonal(gp, mu, n) * s;
    Complex current;
    if (n == -trunc) {
      current = a;
    } else {
      current = a * prev - theta2 * s * prev_scale * prev2;
    }
    prev2 = n == -trunc ? Complex{1.0, 0.0} : prev;
    prev = current;
    prev_scale = s;
  }
  return prev;
}

ExponentResult solve_exponent(const GeneralParams& gp, int trunc) {
  gp.validate();
  check_trunc(trunc);
  ExponentResult out;
  out.truncation = trunc;

  if (gp.theta == Complex{0.0, 0.0}) {
    // y'' + h y = 0: exp(+- i sqrt(h) t)
    const Complex root = kI * std::sqrt(gp.h);
    out.seed = root;
    out.mu_unreduced = root;
    out.mu = normalize_exponent(root);
    return out;
  }

  const oracle::Monodromy mono = oracle::monodromy(gp);
  out.seed = mono.mu;
  const SecantOutcome root = secant(gp, mono.mu, trunc);
  out.iterations = root.iterations;
  out.determinant = root.residual;
  if (exponent_class_distance(root.root, mono.mu) > 1e-4) {
    std::ostringstream msg;
    msg << "Hill determinant root " << root.root << " left the class of the monodromy seed "
        << mono.mu;
    throw ConvergenceError(msg.str());
  }

  Complex mu = root.root;
  if (gp.is_real()) {
    // A real equation has conjugate-symmetric exponent classes: a stable
    // exponent is purely imaginary, an unstable one has Im mu in {0, 1} mod 2.
    if (mono.mu.real() == 0.0) {
      mu = {0.0, mu.imag()};
    } else {
      mu = {mu.real(), mono.mu.imag() + 2.0 * std::round((mu.imag() - mono.mu.imag()) / 2.0)};
    }
  }
  out.mu_unreduced = mu + Complex{0.0, 2.0 * dominant_index(gp, mu, trunc)};
  out.mu = normalize_exponent(mu);
  return out;
}

Complex characteristic_exponent(const GeneralParams& gp, int trunc) {
  return solve_exponent(gp, trunc).mu;
}

Complex FloquetSolution::c(int n) const {
  if (n < -truncation || n > truncation) return {0.0, 0.0};
  return coeffs[static_cast<std::size_t>(n + truncation)];
}

Complex FloquetSolution::normalized_mu() const { return normalize_exponent(mu); }

FloquetSolution coefficients(const GeneralParams& gp, Complex mu, int trunc) {
  gp.validate();
  check_trunc(trunc);
  if (!finite(mu)) throw InvalidInput("exponent must be finite");
  for (int n = trunc;; n *= 2) {
    const int current = std::min(n, kMaxTruncation);
    RawCoefficients raw = compute_coefficients(gp, mu, current);
    if (raw.meeting_residual > kMeetingTolerance) {
      std::ostringstream msg;
      msg << "exponent " << mu << " does not make the Hill system singular (relative residual "
          << raw.meeting_residual << ")";
      throw InvalidInput(msg.str());
    }
    double biggest = 0.0;
    for (const Complex& v : raw.c) biggest = std::max(biggest, std::abs(v));
    const double tail = std::max(std::abs(raw.c.front()), std::abs(raw.c.back())) / biggest;
    if (tail <= kTailTolerance) {
      FloquetSolution sol;
      sol.gp = gp;
      sol.mu = raw.mu;
      sol.coeffs = std::move(raw.c);
      sol.truncation = current;
      sol.tail_ratio = tail;
      for (int k = -current + 1; k <= current - 1; ++k) {
        const Complex row = -gp.theta * sol.c(k - 1) + diagonal(gp, sol.mu, k) * sol.c(k) -
                            gp.theta * sol.c(k + 1);
        const double scale = std::abs(gp.theta) * (std::abs(sol.c(k - 1)) + std::abs(sol.c(k + 1))) +
                             diagonal_scale(gp, sol.mu, k) * std::abs(sol.c(k));
        if (scale > 0.0) sol.recurrence_residual = std::max(sol.recurrence_residual, std::abs(row) / scale);
      }
      return sol;
    }
    if (current == kMaxTruncation) {
      std::ostringstream msg;
      msg << "Floquet coefficients do not decay to " << kTailTolerance << " within N = "
          << kMaxTruncation << " (tail ratio " << tail << ")";
      throw ConvergenceError(msg.str());
    }
  }
}

FloquetSolution solve(const GeneralParams& gp, int trunc) {
  const ExponentResult ex = solve_exponent(gp, trunc);
  return coefficients(gp, ex.mu_unreduced, trunc);
}

SolutionSample eval_floquet(const FloquetSolution& sol, double t) {
  SolutionSample out;
  out.t = t;
  const Complex base = std::exp(sol.mu * t);
  Complex y = 0.0;
  Complex dy = 0.0;
  Complex d2y = 0.0;
  for (int n = -sol.truncation; n <= sol.truncation; ++n) {
    const Complex cn = sol.c(n);
    if (cn == Complex{0.0, 0.0}) continue;
    const Complex rate = sol.mu + Complex{0.0, 2.0 * n};
    const Complex term = cn * std::polar(1.0, 2.0 * n * t);
    y += term;
    dy += rate * term;
    d2y += rate * rate * term;
  }
  out.y = base * y;
  out.dy = base * dy;
  out.d2y = base * d2y;
  return out;
}

FloquetSolution second_solution(const FloquetSolution& sol, bool allow_degenerate) {
  const double re = sol.mu.real();
  const double im = sol.mu.imag();
  const bool integer = std::abs(re) <= 1e-9 && std::abs(im - std::round(im)) <= 1e-9;
  if (integer && !allow_degenerate) {
    std::ostringstream msg;
    msg << "i*mu is an integer (mu = " << sol.mu
        << "); exp(-mu t) P(-t) is not guaranteed to be independent";
    throw DegenerateError(msg.str());
  }
  FloquetSolution out = sol;
  out.mu = -sol.mu;
  std::reverse(out.coeffs.begin(), out.coeffs.end());
  return out;
}

const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable:
      return "stable";
    case Stability::unstable:
      return "unstable";
    case Stability::boundary:
      return "boundary";
  }
  return "stable";
}

Stability classify_stability(Complex mu, double tol_b) {
  const double re = std::abs(mu.real());
  if (re == 0.0) return Stability::stable;
  if (re <= tol_b) return Stability::boundary;
  return Stability::unstable;
}

std::vector<SweepPoint> sweep(const std::vector<double>& hs, const std::vector<double>& thetas,
                              int trunc, unsigned threads) {
  std::vector<double> h_sorted = hs;
  std::vector<double> t_sorted = thetas;
  std::sort(h_sorted.begin(), h_sorted.end());
  std::sort(t_sorted.begin(), t_sorted.end());
  std::vector<SweepPoint> out(h_sorted.size() * t_sorted.size());
  for (std::size_t i = 0; i < h_sorted.size(); ++i) {
    for (std::size_t j = 0; j < t_sorted.size(); ++j) {
      out[i * t_sorted.size() + j].h = h_sorted[i];
      out[i * t_sorted.size() + j].theta = t_sorted[j];
    }
  }
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(out.size(), 1)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < out.size(); i = next++) {
      try {
        SweepPoint& pt = out[i];
        pt.mu = characteristic_exponent({{pt.h, 0.0}, {pt.theta, 0.0}}, trunc);
        pt.stability = classify_stability(pt.mu);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace mathieu::floquet
