#pragma once

// Floquet solutions y(t) = sum_n c_n exp((mu + 2ni) t) of
//   y'' + (h - 2 theta cos 2t) y = 0.

#include <cstddef>
#include <vector>

#include "mathieu_kit/params.hpp"
#include "mathieu_kit/types.hpp"

namespace mathieu::floquet {

inline constexpr int kDefaultTruncation = 25;
inline constexpr int kMaxTruncation = 400;
inline constexpr double kTailTolerance = 1e-12;

struct ExponentResult {
  Complex mu;             // normal form (see normalize_exponent)
  Complex mu_unreduced;   // representative whose n = 0 diagonal term is smallest
  Complex seed;           // monodromy estimate
  int truncation = 0;
  int iterations = 0;
  double determinant = 0.0;  // |D(mu)| at the accepted root
};

/// Scaled truncated Hill determinant over rows n = -trunc..trunc.
Complex hill_determinant(const GeneralParams& gp, Complex mu, int trunc);

ExponentResult solve_exponent(const GeneralParams& gp, int trunc = kDefaultTruncation);
Complex characteristic_exponent(const GeneralParams& gp, int trunc = kDefaultTruncation);

struct FloquetSolution {
  GeneralParams gp;
  Complex mu;                  // exponent used by the series (c_0 = 1)
  std::vector<Complex> coeffs;  // c_{-N} .. c_{N}
  int truncation = 0;          // N
  double tail_ratio = 0.0;     // max(|c_-N|, |c_N|) / max |c_n|
  double recurrence_residual = 0.0;  // worst relative residual for |n| < N

  [[nodiscard]] Complex c(int n) const;
  [[nodiscard]] Complex normalized_mu() const;
};

/// Coefficients for a given exponent. The truncation starts at `trunc` and is
/// doubled until the tail criterion holds.
FloquetSolution coefficients(const GeneralParams& gp, Complex mu,
                             int trunc = kDefaultTruncation);

/// Exponent plus coefficients.
FloquetSolution solve(const GeneralParams& gp, int trunc = kDefaultTruncation);

SolutionSample eval_floquet(const FloquetSolution& sol, double t);

/// exp(-mu t) P(-t). Throws DegenerateError when i mu is an integer unless
/// `allow_degenerate` is set.
FloquetSolution second_solution(const FloquetSolution& sol, bool allow_degenerate = false);

enum class Stability { stable, unstable, boundary };
const char* to_string(Stability s);

/// stable when Re mu is exactly zero, boundary when 0 < |Re mu| <= tol_b,
/// unstable otherwise.
Stability classify_stability(Complex mu, double tol_b = 1e-8);

struct SweepPoint {
  double h = 0.0;
  double theta = 0.0;
  Complex mu;
  Stability stability = Stability::stable;
};

/// All (h, theta) combinations, ordered by h then theta.
std::vector<SweepPoint> sweep(const std::vector<double>& hs, const std::vector<double>& thetas,
                              int trunc = kDefaultTruncation, unsigned threads = 0);

}  // namespace mathieu::floquet
