#include "mathieu_kit/closed_form.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "mathieu_kit/bessel.hpp"
#include "mathieu_kit/errors.hpp"

namespace mathieu::closed_form {
namespace {

// a^2 - 4x with cancellation noise removed, so that critically damped
// parameters give nu = 0 exactly instead of sqrt(rounding error).
double radicand(double a, double x) {
  const double value = a * a - 4.0 * x;
  const double noise = 16.0 * std::numeric_limits<double>::epsilon() * (a * a + 4.0 * std::abs(x));
  return std::abs(value) <= noise ? 0.0 : value;
}

double parity(int n) { return (std::abs(n) % 2 == 0) ? 1.0 : -1.0; }

std::optional<int> nearest_integer(Complex nu, double tol) {
  const double rounded = std::round(nu.real());
  if (std::abs(nu.imag()) <= tol && std::abs(nu.real() - rounded) <= tol &&
      std::abs(rounded) <= bessel::kMaxOrder) {
    return static_cast<int>(rounded);
  }
  return std::nullopt;
}

// F_k for k = n-2 .. n+2 from non-negative orders by reflection.
std::array<Complex, 5> window(const std::vector<Complex>& seq, int n) {
  std::array<Complex, 5> out;
  for (int i = 0; i < 5; ++i) {
    const int k = n - 2 + i;
    const Complex v = seq[static_cast<std::size_t>(std::abs(k))];
    out[static_cast<std::size_t>(i)] = k < 0 ? parity(k) * v : v;
  }
  return out;
}

ClosedFormSpec make_spec(const DampedParams& params, Variant variant, Complex c1, Complex c2,
                         bool allow_inadmissible) {
  params.validate();
  ClosedFormSpec spec;
  spec.variant = variant;
  spec.nu = index(params, variant);
  spec.admissible_nu = is_admissible(params, variant);
  if (spec.admissible_nu) {
    spec.order = *spec.admissible_nu;
  } else {
    const double nearest = std::round(spec.nu.real());
    if (!allow_inadmissible) {
      std::ostringstream msg;
      msg << "index nu = " << spec.nu.real() << (spec.nu.imag() < 0 ? " - " : " + ")
          << std::abs(spec.nu.imag()) << "i is not an integer (nearest integer "
          << static_cast<long long>(nearest) << "); the closed form requires integer nu";
      throw AdmissibilityError(msg.str());
    }
    if (std::abs(nearest) > bessel::kMaxOrder) {
      throw RangeError("index nu outside the supported Bessel order range");
    }
    spec.order = static_cast<int>(nearest);
    spec.exploratory = true;
  }
  spec.c1 = c1;
  spec.c2 = c2;
  spec.partner_c1 = c1 * parity(spec.order);
  spec.decay_rate = params.eta / (2.0 * params.m);
  spec.argument_scale = argument_scale(params, variant);
  spec.exponent_rate = Complex{0.0, 0.5 * params.omega};
  spec.omega = params.omega;
  return spec;
}

}  // namespace

const char* to_string(Variant v) {
  return v == Variant::paper_literal ? "paper-literal" : "corrected";
}

Variant parse_variant(const std::string& name) {
  if (name == "paper-literal") return Variant::paper_literal;
  if (name == "corrected") return Variant::corrected;
  throw InvalidInput("unknown variant '" + name + "' (expected paper-literal or corrected)");
}

Complex index(const DampedParams& params, Variant variant) {
  params.validate();
  const double a = params.damping_rate();
  const double inner = variant == Variant::paper_literal ? params.modulation_rate()
                                                         : params.stiffness_rate();
  return std::sqrt(Complex{radicand(a, inner), 0.0}) / params.lambda();
}

std::optional<int> is_admissible(const DampedParams& params, Variant variant, double tol) {
  if (!(tol > 0.0)) throw InvalidInput("admissibility tolerance must be positive");
  params.validate();
  if (variant == Variant::paper_literal) {
    // sqrt(4k/m - (eta/m)^2) / omega
    const double a = params.damping_rate();
    const Complex nu =
        std::sqrt(Complex{-radicand(a, params.modulation_rate()), 0.0}) / params.omega;
    return nearest_integer(nu, tol);
  }
  return nearest_integer(index(params, variant), tol);
}

Complex argument_scale(const DampedParams& params, Variant variant) {
  params.validate();
  const double inner = variant == Variant::paper_literal ? params.stiffness_rate()
                                                         : params.modulation_rate();
  return 2.0 * std::sqrt(Complex{inner, 0.0}) / params.lambda();
}

Complex bessel_argument(const DampedParams& params, Variant variant, double t) {
  return argument_scale(params, variant) * std::exp(Complex{0.0, 0.5 * params.omega * t});
}

ClosedFormSpec general_solution(const DampedParams& params, Variant variant, Complex c1,
                                Complex c2, bool allow_inadmissible) {
  return make_spec(params, variant, c1, c2, allow_inadmissible);
}

std::pair<ClosedFormSpec, ClosedFormSpec> fundamental_pair(const DampedParams& params,
                                                           Variant variant, Complex c1,
                                                           Complex c2, bool allow_inadmissible) {
  ClosedFormSpec y_member = make_spec(params, variant, 0.0, c2, allow_inadmissible);
  y_member.member = Member::y_branch;
  ClosedFormSpec j_member = y_member;
  j_member.member = Member::j_branch;
  j_member.c1 = c1;
  j_member.c2 = 0.0;
  j_member.partner_c1 = c1 * parity(j_member.order);
  return {y_member, j_member};
}

SolutionSample eval(const ClosedFormSpec& spec, double t) {
  const int n = spec.order;
  const double phase = std::arg(spec.argument_scale) + 0.5 * spec.omega * t;
  const Complex z = std::polar(std::abs(spec.argument_scale), phase);
  const bool need_y = spec.c2 != Complex{0.0, 0.0};
  const int top = std::abs(n) + 2;

  std::array<Complex, 5> f{};
  if (need_y) {
    if (z == Complex{0.0, 0.0}) {
      throw SingularityError("Bessel argument z(t) = 0 with a non-zero Y coefficient");
    }
    const bessel::BesselOrders jy = bessel::bessel_jy_orders(top, z);
    const std::array<Complex, 5> j = window(jy.j, n);
    const std::array<Complex, 5> y = window(jy.y, n);
    // Y_n(z e^{2 pi i w}) = Y_n(z) + 4 i w J_n(z) keeps Y continuous in t.
    const double winding = std::round((phase - std::arg(z)) / (2.0 * kPi));
    const Complex jump{0.0, 4.0 * winding};
    for (std::size_t i = 0; i < 5; ++i) f[i] = spec.c1 * j[i] + spec.c2 * (y[i] + jump * j[i]);
  } else {
    const std::array<Complex, 5> j = window(bessel::bessel_j_orders(top, z), n);
    for (std::size_t i = 0; i < 5; ++i) f[i] = spec.c1 * j[i];
  }

  const Complex b0 = f[2];
  const Complex b1 = 0.5 * (f[1] - f[3]);
  const Complex b2 = 0.25 * (f[0] - 2.0 * f[2] + f[4]);
  const Complex r = spec.exponent_rate;
  const Complex bt = r * z * b1;
  const Complex btt = r * r * (z * z * b2 + z * b1);

  const double d = spec.decay_rate;
  const double env = std::exp(-d * t);
  SolutionSample out;
  out.t = t;
  out.y = env * b0;
  out.dy = env * (bt - d * b0);
  out.d2y = env * (btt - 2.0 * d * bt + d * d * b0);
  return out;
}

DampedParams undamped_preimage(const GeneralParams& gp) {
  gp.validate();
  if (!gp.is_real()) {
    throw MappingError("complex (h, theta) has no real damped preimage with eta = 0");
  }
  DampedParams params;
  params.m = 1.0;
  params.eta = 0.0;
  params.omega = 2.0;
  params.k0 = gp.h.real();
  params.k = -2.0 * gp.theta.real();
  return params;
}

ClosedFormSpec undamped_general_solution(const GeneralParams& gp, Complex c1, Complex c2,
                                         Variant variant, bool allow_inadmissible) {
  return general_solution(undamped_preimage(gp), variant, c1, c2, allow_inadmissible);
}

oracle::LinearODE exponential_equation(const DampedParams& params, bool positive) {
  params.validate();
  const double a = params.damping_rate();
  const double b = params.stiffness_rate();
  const double c = params.modulation_rate();
  const double w = positive ? params.omega : -params.omega;
  return {[a](double) { return Complex{a, 0.0}; },
          [b, c, w](double t) { return b + c * std::exp(Complex{0.0, w * t}); }, nullptr};
}

const char* to_string(Passing p) {
  switch (p) {
    case Passing::none:
      return "none";
    case Passing::paper_literal:
      return "paper-literal";
    case Passing::corrected:
      return "corrected";
    case Passing::both:
      return "both";
  }
  return "none";
}

Adjudication adjudicate(const DampedParams& params, Complex c1, Complex c2,
                        std::span<const double> grid, double threshold,
                        bool allow_inadmissible) {
  params.validate();
  Adjudication out;
  out.threshold = threshold;
  const oracle::LinearODE exp_form = exponential_equation(params, true);
  const oracle::LinearODE cos_form = oracle::damped_ode(params);
  const auto run = [&](Variant variant) {
    VariantReport rep;
    rep.variant = variant;
    rep.nu = index(params, variant);
    rep.admissible_nu = is_admissible(params, variant);
    try {
      const ClosedFormSpec spec = general_solution(params, variant, c1, c2, allow_inadmissible);
      rep.exploratory = spec.exploratory;
      const oracle::Candidate candidate = [&spec](double t) { return eval(spec, t); };
      rep.exponential = oracle::residual(exp_form, candidate, grid, threshold);
      rep.cosine = oracle::residual(cos_form, candidate, grid);
      rep.evaluated = true;
    } catch (const Error& e) {
      rep.error = e.what();
    }
    return rep;
  };
  out.paper_literal = run(Variant::paper_literal);
  out.corrected = run(Variant::corrected);
  const bool paper_ok =
      out.paper_literal.evaluated && out.paper_literal.exponential.verdict == oracle::Verdict::pass;
  const bool corrected_ok =
      out.corrected.evaluated && out.corrected.exponential.verdict == oracle::Verdict::pass;
  if (paper_ok && corrected_ok) {
    out.passing = Passing::both;
  } else if (paper_ok) {
    out.passing = Passing::paper_literal;
  } else if (corrected_ok) {
    out.passing = Passing::corrected;
  }
  return out;
}

}  // namespace mathieu::closed_form
