#pragma once

// Bessel-function solution of
//   y'' + a y' + (b + c exp(i omega t)) y = 0,  a = eta/m, b = K0/m, c = k/m,
// in the form exp(-eta t / 2m) [C1 J_nu(z(t)) + C2 Y_nu(z(t))],
// z(t) = A exp(i omega t / 2).
//
// Two parameterizations are provided:
//   paper_literal: nu from c, A from b
//   corrected:     nu from b, A from c (what direct substitution gives)

#include <optional>
#include <span>
#include <string>
#include <utility>

#include "mathieu_kit/oracle.hpp"
#include "mathieu_kit/params.hpp"
#include "mathieu_kit/types.hpp"

namespace mathieu::closed_form {

enum class Variant { paper_literal, corrected };
const char* to_string(Variant v);
/// Accepts "paper-literal" / "corrected"; throws InvalidInput otherwise.
Variant parse_variant(const std::string& name);

inline constexpr double kAdmissibilityTol = 1e-9;

/// Index nu (principal square root).
Complex index(const DampedParams& params, Variant variant);

/// Nearest integer when nu is within tol of it (real and imaginary parts).
std::optional<int> is_admissible(const DampedParams& params, Variant variant,
                                 double tol = kAdmissibilityTol);

/// Scale A with z(t) = A exp(i omega t / 2).
Complex argument_scale(const DampedParams& params, Variant variant);
Complex bessel_argument(const DampedParams& params, Variant variant, double t);

enum class Member { general, y_branch, j_branch };

struct ClosedFormSpec {
  Variant variant = Variant::corrected;
  Member member = Member::general;
  Complex nu;
  std::optional<int> admissible_nu;
  int order = 0;             // integer order actually evaluated
  bool exploratory = false;  // evaluated at round(Re nu) for an inadmissible nu
  Complex c1;                // J coefficient
  Complex c2;                // Y coefficient
  Complex partner_c1;        // J coefficient of the exp(-i omega t) partner, c1 (-1)^nu
  double decay_rate = 0.0;   // eta / 2m
  Complex argument_scale;    // A
  Complex exponent_rate;     // i omega / 2
  double omega = 1.0;
  std::string branch = "principal sqrt; Y continued along the path of z(t)";
};

/// General solution with the given constants. An inadmissible nu throws
/// AdmissibilityError unless `allow_inadmissible` is set.
ClosedFormSpec general_solution(const DampedParams& params, Variant variant, Complex c1,
                                Complex c2, bool allow_inadmissible = false);

/// (Y-branch member with c2, J-branch member with c1).
std::pair<ClosedFormSpec, ClosedFormSpec> fundamental_pair(const DampedParams& params,
                                                           Variant variant, Complex c1,
                                                           Complex c2,
                                                           bool allow_inadmissible = false);

/// y, y', y'' at t; derivatives by the chain rule and Bessel recurrences.
SolutionSample eval(const ClosedFormSpec& spec, double t);

/// The damped parameters (m = 1, eta = 0, omega = 2) that map onto gp.
DampedParams undamped_preimage(const GeneralParams& gp);
ClosedFormSpec undamped_general_solution(const GeneralParams& gp, Complex c1, Complex c2,
                                         Variant variant = Variant::corrected,
                                         bool allow_inadmissible = false);

/// y'' + a y' + (b + c exp(+-i omega t)) y = 0.
oracle::LinearODE exponential_equation(const DampedParams& params, bool positive = true);

enum class Passing { none, paper_literal, corrected, both };
const char* to_string(Passing p);

struct VariantReport {
  Variant variant = Variant::corrected;
  Complex nu;
  std::optional<int> admissible_nu;
  bool evaluated = false;
  bool exploratory = false;
  std::string error;                    // why the variant was not evaluated
  oracle::ResidualReport exponential;   // against the exp(+i omega t) equation
  oracle::ResidualReport cosine;        // against the cos(omega t) equation, report only
};

struct Adjudication {
  VariantReport paper_literal;
  VariantReport corrected;
  Passing passing = Passing::none;
  double threshold = 1e-8;
};

/// Residuals of both variants of the general solution on `grid`.
Adjudication adjudicate(const DampedParams& params, Complex c1, Complex c2,
                        std::span<const double> grid, double threshold = 1e-8,
                        bool allow_inadmissible = false);

}  // namespace mathieu::closed_form
