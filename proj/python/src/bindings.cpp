#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "job.hpp"
#include "mathieu_kit/bessel.hpp"
#include "mathieu_kit/closed_form.hpp"
#include "mathieu_kit/errors.hpp"
#include "mathieu_kit/exponent.hpp"
#include "mathieu_kit/floquet.hpp"
#include "mathieu_kit/flux.hpp"
#include "mathieu_kit/oracle.hpp"
#include "mathieu_kit/reductions.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using mathieu::Complex;
using mathieu::DampedParams;
using mathieu::GeneralParams;
using mathieu::SolutionSample;

namespace {

py::tuple sample_tuple(const SolutionSample& s) { return py::make_tuple(s.t, s.y, s.dy, s.d2y); }

py::dict residual_dict(const mathieu::oracle::ResidualReport& r) {
  return py::dict("linf"_a = r.linf, "l2"_a = r.l2, "normalization"_a = r.normalization,
                  "verdict"_a = mathieu::oracle::to_string(r.verdict));
}

py::dict variant_dict(const mathieu::closed_form::VariantReport& r) {
  py::dict d("variant"_a = mathieu::closed_form::to_string(r.variant), "nu"_a = r.nu,
             "admissible_nu"_a = r.admissible_nu, "evaluated"_a = r.evaluated,
             "exploratory"_a = r.exploratory, "error"_a = r.error);
  d["exponential"] = r.evaluated ? py::object(residual_dict(r.exponential)) : py::none();
  d["cosine"] = r.evaluated ? py::object(residual_dict(r.cosine)) : py::none();
  return d;
}

GeneralParams general(Complex h, Complex theta) {
  GeneralParams gp{h, theta};
  gp.validate();
  return gp;
}

}  // namespace

PYBIND11_MODULE(_mathieu_kit, m) {
  m.doc() = "Mathieu equation toolkit: Bessel functions, closed forms, Floquet exponents, "
            "reductions, flux-lattice response and the numerical oracle";

  // base first: later registrations are tried first
  static py::exception<mathieu::Error> base(m, "MathieuError", PyExc_RuntimeError);
  py::register_exception<mathieu::InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<mathieu::RangeError>(m, "RangeError", base.ptr());
  py::register_exception<mathieu::SingularityError>(m, "SingularityError", base.ptr());
  py::register_exception<mathieu::AdmissibilityError>(m, "AdmissibilityError", base.ptr());
  py::register_exception<mathieu::ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<mathieu::DegenerateError>(m, "DegenerateError", base.ptr());
  py::register_exception<mathieu::DomainError>(m, "DomainError", base.ptr());
  py::register_exception<mathieu::ResonanceError>(m, "ResonanceError", base.ptr());
  py::register_exception<mathieu::StiffnessError>(m, "StiffnessError", base.ptr());
  py::register_exception<mathieu::SpanError>(m, "SpanError", base.ptr());
  py::register_exception<mathieu::MappingError>(m, "MappingError", base.ptr());

  py::class_<DampedParams>(m, "DampedParams")
      .def(py::init([](double m_, double eta, double k0, double k, double omega) {
             DampedParams p{m_, eta, k0, k, omega};
             p.validate();
             return p;
           }),
           "m"_a = 1.0, "eta"_a = 0.0, "k0"_a = 0.0, "k"_a = 0.0, "omega"_a = 1.0)
      .def_readwrite("m", &DampedParams::m)
      .def_readwrite("eta", &DampedParams::eta)
      .def_readwrite("k0", &DampedParams::k0)
      .def_readwrite("k", &DampedParams::k)
      .def_readwrite("omega", &DampedParams::omega)
      .def("__repr__", [](const DampedParams& p) {
        std::ostringstream os;
        os << "DampedParams(m=" << p.m << ", eta=" << p.eta << ", k0=" << p.k0 << ", k=" << p.k
           << ", omega=" << p.omega << ")";
        return os.str();
      });

  // Bessel functions: (value, derivative)
  m.def("bessel_j", [](int n, Complex z) {
    const auto v = mathieu::bessel::bessel_j(n, z);
    return py::make_tuple(v.value, v.derivative);
  }, "n"_a, "z"_a, "J_n(z) and its derivative");
  m.def("bessel_y", [](int n, Complex z) {
    const auto v = mathieu::bessel::bessel_y(n, z);
    return py::make_tuple(v.value, v.derivative);
  }, "n"_a, "z"_a, "Y_n(z) and its derivative");

  // Floquet
  m.def("characteristic_exponent",
        [](Complex h, Complex theta, int trunc) {
          return mathieu::floquet::characteristic_exponent(general(h, theta), trunc);
        },
        "h"_a, "theta"_a, "trunc"_a = mathieu::floquet::kDefaultTruncation,
        "Normal-form exponent mu of y'' + (h - 2 theta cos 2t) y = 0");
  m.def("floquet_solution",
        [](Complex h, Complex theta, int trunc) {
          const auto sol = mathieu::floquet::solve(general(h, theta), trunc);
          return py::dict("mu"_a = sol.normalized_mu(), "mu_unreduced"_a = sol.mu,
                          "coefficients"_a = sol.coeffs, "truncation"_a = sol.truncation,
                          "tail_ratio"_a = sol.tail_ratio);
        },
        "h"_a, "theta"_a, "trunc"_a = mathieu::floquet::kDefaultTruncation);
  m.def("floquet_eval",
        [](Complex h, Complex theta, const std::vector<double>& ts, int trunc) {
          const auto sol = mathieu::floquet::solve(general(h, theta), trunc);
          py::list out;
          for (double t : ts) out.append(sample_tuple(mathieu::floquet::eval_floquet(sol, t)));
          return out;
        },
        "h"_a, "theta"_a, "t"_a, "trunc"_a = mathieu::floquet::kDefaultTruncation,
        "(t, y, y', y'') samples of the Floquet solution");
  m.def("classify_stability",
        [](Complex mu, double tol_b) {
          return mathieu::floquet::to_string(mathieu::floquet::classify_stability(mu, tol_b));
        },
        "mu"_a, "tol_b"_a = 1e-8);
  m.def("normalize_exponent", &mathieu::normalize_exponent, "mu"_a);
  m.def("exponent_class_distance", &mathieu::exponent_class_distance, "a"_a, "b"_a);

  // Oracle
  m.def("monodromy_exponent",
        [](Complex h, Complex theta, double tol) {
          return mathieu::oracle::monodromy_exponent(general(h, theta), tol);
        },
        "h"_a, "theta"_a, "tol"_a = 1e-13);
  m.def("integrate_mathieu",
        [](Complex h, Complex theta, Complex y0, Complex dy0, const std::vector<double>& ts,
           double tol) {
          if (ts.empty()) throw mathieu::InvalidInput("empty time grid");
          const auto series = mathieu::oracle::integrate(mathieu::oracle::mathieu_ode(general(h, theta)),
                                                         y0, dy0, ts.front(), ts.back(), tol, ts);
          py::list out;
          for (const SolutionSample& s : series.values) out.append(sample_tuple(s));
          return out;
        },
        "h"_a, "theta"_a, "y0"_a, "dy0"_a, "t"_a, "tol"_a = 1e-10,
        "Oracle samples (t, y, y', y'') on an increasing grid starting at the initial time");

  // Closed form
  m.def("bessel_index",
        [](const DampedParams& p, const std::string& variant) {
          return mathieu::closed_form::index(p, mathieu::closed_form::parse_variant(variant));
        },
        "params"_a, "variant"_a = "corrected");
  m.def("closed_form_eval",
        [](const DampedParams& p, const std::string& variant, Complex c1, Complex c2,
           const std::vector<double>& ts, bool allow_inadmissible) {
          const auto spec = mathieu::closed_form::general_solution(
              p, mathieu::closed_form::parse_variant(variant), c1, c2, allow_inadmissible);
          py::list out;
          for (double t : ts) out.append(sample_tuple(mathieu::closed_form::eval(spec, t)));
          return out;
        },
        "params"_a, "variant"_a, "c1"_a, "c2"_a, "t"_a, "allow_inadmissible"_a = false);
  m.def("adjudicate",
        [](const DampedParams& p, Complex c1, Complex c2, const std::vector<double>& ts,
           double threshold, bool allow_inadmissible) {
          const auto a = mathieu::closed_form::adjudicate(p, c1, c2, ts, threshold, allow_inadmissible);
          return py::dict("paper_literal"_a = variant_dict(a.paper_literal),
                          "corrected"_a = variant_dict(a.corrected),
                          "passing_variant"_a = mathieu::closed_form::to_string(a.passing),
                          "threshold"_a = a.threshold);
        },
        "params"_a, "c1"_a, "c2"_a, "t"_a, "threshold"_a = 1e-8, "allow_inadmissible"_a = false);

  // Reductions
  m.def("reduce",
        [](const std::string& family, double a, double b, double lambda,
           std::optional<DampedParams> params) {
          mathieu::reductions::ReductionInput in;
          in.family = mathieu::reductions::parse_family(family);
          in.a = a;
          in.b = b;
          in.lambda = lambda;
          in.params = params;
          const auto r = mathieu::reductions::reduce(in);
          return py::dict("h"_a = r.gp.h, "theta"_a = r.gp.theta, "stated_h"_a = r.stated_gp.h,
                          "stated_theta"_a = r.stated_gp.theta,
                          "map"_a = mathieu::reductions::to_string(r.map),
                          "prefactor_rate"_a = r.prefactor_rate, "time_scale"_a = r.time_scale);
        },
        "family"_a, "a"_a = 0.0, "b"_a = 0.0, "lambda_"_a = 0.0, "params"_a = py::none());

  // Flux lattice
  const auto flux_params = [](const DampedParams& base, double Omega, double B, double J0,
                              double c) {
    mathieu::flux::FluxParams fp;
    fp.base = base;
    fp.Omega = Omega;
    fp.B = B;
    fp.J0 = J0;
    fp.c_light = c;
    fp.validate();
    return fp;
  };
  m.def("particular_k0",
        [flux_params](const DampedParams& base, double Omega, double B, double J0, double c) {
          const auto r = mathieu::flux::particular_k0(flux_params(base, Omega, B, J0, c));
          return py::dict("amplitude"_a = r.amplitude, "frequency"_a = r.frequency,
                          "phase"_a = r.phase);
        },
        "params"_a, "Omega"_a, "B"_a = 1.0, "J0"_a = 1.0, "c"_a = 1.0);
  m.def("induced_field_model",
        [flux_params](const DampedParams& base, double Omega, double B, double J0, double c) {
          const auto r = mathieu::flux::induced_field_model(flux_params(base, Omega, B, J0, c));
          return py::dict("epsilon"_a = r.epsilon, "phi"_a = r.phi, "alpha"_a = r.alpha,
                          "prefactor"_a = r.prefactor, "in_regime"_a = r.in_regime,
                          "reasons"_a = r.reasons);
        },
        "params"_a, "Omega"_a, "B"_a = 1.0, "J0"_a = 1.0, "c"_a = 1.0);
  m.def("modulation_analysis",
        [](const std::vector<double>& t, const std::vector<double>& signal, double Omega,
           double omega, double t_start) {
          const auto r = mathieu::flux::modulation_analysis(t, signal, Omega, omega, t_start);
          return py::dict("carrier_amplitude"_a = r.carrier_amplitude,
                          "modulation_depth"_a = r.modulation_depth,
                          "modulation_phase"_a = r.modulation_phase,
                          "carrier_frequency"_a = r.carrier_frequency,
                          "modulation_frequency"_a = r.modulation_frequency,
                          "carrier_bin"_a = r.carrier_bin, "modulation_bin"_a = r.modulation_bin);
        },
        "t"_a, "signal"_a, "Omega"_a, "omega"_a, "t_start"_a = -1e300);

  // Command line, in-process
  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out;
          std::ostringstream err;
          const int code = mathieu::cli::run(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        "args"_a, "Run a mathieu-kit command; returns (exit_code, stdout, stderr)");
}
