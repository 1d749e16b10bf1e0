#include "job.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <variant>

#include "mathieu_kit/closed_form.hpp"
#include "mathieu_kit/errors.hpp"
#include "mathieu_kit/floquet.hpp"
#include "mathieu_kit/flux.hpp"
#include "mathieu_kit/oracle.hpp"
#include "mathieu_kit/reductions.hpp"

namespace mathieu::cli {
namespace {

using nlohmann::json;
using Cell = std::variant<double, std::string>;

constexpr std::size_t kMaxSamples = 10'000'000;

struct Flag {
  const char* name;
  double fallback;
  const char* help;
  bool required = false;
};

const std::vector<Flag> kDampedFlags = {
    {"m", 1.0, "mass m > 0"},
    {"eta", 0.0, "damping eta"},
    {"k0", 0.0, "static stiffness K0", true},
    {"k", 0.0, "modulation amplitude k", true},
    {"omega", 1.0, "modulation frequency omega != 0"},
};

const std::vector<Flag> kSpanFlags = {
    {"t0", 0.0, "first sample time"},
    {"t1", 10.0, "last sample time"},
    {"dt", 0.01, "sample spacing"},
};

std::vector<Flag> with_optional(std::vector<Flag> flags) {
  for (Flag& f : flags) f.required = false;
  return flags;
}

std::vector<Flag> concat(std::initializer_list<std::vector<Flag>> parts) {
  std::vector<Flag> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::map<std::string, std::vector<Flag>> command_flags() {
  std::map<std::string, std::vector<Flag>> m;
  m["solve"] = concat({kDampedFlags,
                       {{"c1", 1.0, "J coefficient"},
                        {"c2", 1.0, "Y coefficient"},
                        {"threshold", 1e-8, "residual threshold"}},
                       kSpanFlags});
  m["residual"] = m["solve"];
  m["floquet"] = concat({{{"h", 0.0, "h (real part)", true},
                          {"theta", 0.0, "theta (real part)", true},
                          {"h-im", 0.0, "imaginary part of h"},
                          {"theta-im", 0.0, "imaginary part of theta"},
                          {"trunc", floquet::kDefaultTruncation, "initial truncation N"},
                          {"boundary-tol", 1e-8, "|Re mu| below which a point is boundary"},
                          {"threshold", 1e-8, "series residual threshold"}},
                         kSpanFlags});
  m["floquet"].back().fallback = 0.05;  // dt
  m["sweep"] = {{"h-min", 0.0, "first h", true},
                {"h-max", 0.0, "last h", true},
                {"h-n", 21, "number of h values"},
                {"theta-min", 0.0, "first theta", true},
                {"theta-max", 0.0, "last theta", true},
                {"theta-n", 21, "number of theta values"},
                {"trunc", floquet::kDefaultTruncation, "initial truncation N"},
                {"threads", 0, "worker threads (0: hardware)"},
                {"boundary-tol", 1e-8, "|Re mu| below which a point is boundary"}};
  m["transform"] = concat({{{"a", 0.0, "coefficient a"},
                            {"b", 0.0, "coefficient b"},
                            {"lambda", 0.0, "lambda (eq15)"}},
                           with_optional(kDampedFlags),
                           {{"w0", 1.0, "w at the first z"},
                            {"dw0", 0.0, "w' at the first z"},
                            {"n", 101, "interior samples"},
                            {"z0", 0.0, "first z for unbounded maps"},
                            {"z1", 10.0, "last z for unbounded maps"},
                            {"threshold", 1e-6, "source residual threshold"}}});
  m["flux"] = concat({{{"m", 1.0, "mass m > 0"},
                       {"eta", 0.0, "damping eta", true},
                       {"k0", 0.0, "static stiffness K0", true},
                       {"k", 0.0, "modulation amplitude k", true},
                       {"omega", 1.0, "modulation frequency omega", true},
                       {"Omega", 1.0, "microwave frequency Omega > 0", true},
                       {"B", 1.0, "magnetic induction B"},
                       {"J0", 1.0, "current amplitude J0"},
                       {"c", 1.0, "light velocity c > 0"},
                       {"dt", 0.0, "sample spacing (default: carrier period / 32)"},
                       {"t-start", 0.0, "analysis start (default: 30 m / eta)"},
                       {"t1", 0.0, "end time (default: t-start + 4 modulation periods)"}}});
  m["integrate"] = concat({{{"h", 0.0, "h (mathieu)"}, {"theta", 0.0, "theta (mathieu)"}},
                           with_optional(kDampedFlags),
                           {{"y0", 1.0, "y at t0"}, {"dy0", 0.0, "y' at t0"}},
                           kSpanFlags});
  return m;
}

const char* command_help(const std::string& c) {
  if (c == "solve") return "Evaluate the Bessel closed form of the damped equation";
  if (c == "residual") return "Adjudicate the paper-literal and corrected closed forms";
  if (c == "floquet") return "Characteristic exponent and Floquet series of y'' + (h - 2 theta cos 2t) y = 0";
  if (c == "sweep") return "Exponents and stability over an (h, theta) grid";
  if (c == "transform") return "Reduce a source family to Mathieu form and verify the pullback";
  if (c == "flux") return "Simulate the driven flux-lattice equation and demodulate the field";
  return "Integrate the Mathieu or damped equation with the oracle";
}

void check(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

void check_integer(const JobSpec& job, const std::string& key, int lo) {
  const double v = job.number(key);
  check(v == std::floor(v) && v >= lo && v <= 1e7,
        "--" + key + " must be an integer >= " + std::to_string(lo));
}

void check_span(const JobSpec& job) {
  const double t0 = job.number("t0");
  const double t1 = job.number("t1");
  const double dt = job.number("dt");
  check(dt > 0.0, "--dt must be positive");
  check(t1 >= t0, "--t1 must not precede --t0");
  check((t1 - t0) / dt < static_cast<double>(kMaxSamples), "too many samples (dt too small)");
}

double parse_tolerance(const std::string& text, const std::string& source) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError(source + " is not a number: '" + text + "'");
  }
  check(used == text.size(), source + " is not a number: '" + text + "'");
  check(v >= kMinTolerance && v <= kMaxTolerance,
        source + " must lie in [1e-14, 1e-3], got " + text);
  return v;
}

DampedParams damped(const JobSpec& job) {
  DampedParams p;
  p.m = job.number("m");
  p.eta = job.number("eta");
  p.k0 = job.number("k0");
  p.k = job.number("k");
  p.omega = job.number("omega");
  return p;
}

GeneralParams general(const JobSpec& job) {
  return {{job.number("h"), job.numbers.count("h-im") ? job.number("h-im") : 0.0},
          {job.number("theta"), job.numbers.count("theta-im") ? job.number("theta-im") : 0.0}};
}

reductions::ReductionInput reduction_input(const JobSpec& job) {
  reductions::ReductionInput in;
  in.family = reductions::parse_family(job.strings.at("family"));
  in.a = job.number("a");
  in.b = job.number("b");
  in.lambda = job.number("lambda");
  if (in.family == reductions::Family::damped) in.params = damped(job);
  return in;
}

flux::FluxParams flux_params(const JobSpec& job) {
  flux::FluxParams fp;
  fp.base = damped(job);
  fp.Omega = job.number("Omega");
  fp.B = job.number("B");
  fp.J0 = job.number("J0");
  fp.c_light = job.number("c");
  return fp;
}

// Module preconditions, checked before anything runs.
void validate(JobSpec& job) {
  const std::string& c = job.command;
  try {
    if (c == "solve" || c == "residual") {
      damped(job).validate();
      check_span(job);
      check(job.number("threshold") > 0.0, "--threshold must be positive");
      if (c == "solve") closed_form::parse_variant(job.strings.at("variant"));
    } else if (c == "floquet") {
      general(job).validate();
      check_integer(job, "trunc", 1);
      check_span(job);
    } else if (c == "sweep") {
      check_integer(job, "h-n", 1);
      check_integer(job, "theta-n", 1);
      check_integer(job, "trunc", 1);
      check_integer(job, "threads", 0);
      check(job.number("h-min") <= job.number("h-max"), "--h-min must not exceed --h-max");
      check(job.number("theta-min") <= job.number("theta-max"),
            "--theta-min must not exceed --theta-max");
      check(job.number("h-n") * job.number("theta-n") <= 1e6, "sweep grid too large");
    } else if (c == "transform") {
      const reductions::ReductionInput in = reduction_input(job);
      if (in.family != reductions::Family::damped) {
        for (const char* key : {"m", "eta", "k0", "k", "omega"}) {
          check(!job.given.count(key),
                std::string("--") + key + " only applies to the damped family");
        }
      }
      in.validate();
      check_integer(job, "n", 2);
      check(job.number("z1") > job.number("z0"), "--z1 must exceed --z0");
    } else if (c == "flux") {
      const flux::FluxParams fp = flux_params(job);
      fp.validate();
      const double eta = fp.base.eta;
      if (!job.given.count("dt")) job.numbers["dt"] = 2.0 * kPi / fp.Omega / 32.0;
      if (!job.given.count("t-start")) {
        job.numbers["t-start"] = eta > 0.0 ? 30.0 * fp.base.m / eta : 0.0;
      }
      if (!job.given.count("t1")) {
        job.numbers["t1"] = job.number("t-start") + 4.0 * 2.0 * kPi / std::abs(fp.base.omega);
      }
      job.numbers["t0"] = 0.0;
      check_span(job);
    } else if (c == "integrate") {
      const std::string& eq = job.strings.at("equation");
      check(eq == "mathieu" || eq == "damped", "--equation must be mathieu or damped");
      if (eq == "mathieu") {
        general(job).validate();
      } else {
        damped(job).validate();
      }
      check_span(job);
    }
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
}

std::vector<double> sample_grid(const JobSpec& job) {
  const double t0 = job.number("t0");
  const double dt = job.number("dt");
  const auto n = static_cast<std::size_t>(std::floor((job.number("t1") - t0) / dt + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = t0 + static_cast<double>(i) * dt;
  return grid;
}

json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_cell(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_number(*d);
  const std::string& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + "\"";
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_sample(const SolutionSample& s) {
    rows.push_back({s.t, s.y.real(), s.y.imag(), s.dy.real(), s.dy.imag()});
  }
};

const std::vector<std::string> kSampleColumns = {"t", "re_y", "im_y", "re_dy", "im_dy"};

struct Result {
  json sidecar;
  Table table;
  int status = 0;
};

json base_sidecar(const JobSpec& job) {
  json params = json::object();
  for (const auto& [k, v] : job.numbers) params[k] = v;
  for (const auto& [k, v] : job.strings) params[k] = v;
  params["allow_inadmissible"] = job.allow_inadmissible;
  return {{"command", job.command},
          {"params", params},
          {"variant", nullptr},
          {"nu", nullptr},
          {"mu", nullptr},
          {"residual_linf", nullptr},
          {"residual_l2", nullptr},
          {"passing_variant", nullptr},
          {"validity_flags", json::array()}};
}

void put_residual(json& j, const oracle::ResidualReport& r) {
  j["residual_linf"] = r.linf;
  j["residual_l2"] = r.l2;
}

Result run_solve(const JobSpec& job) {
  Result res{base_sidecar(job), {kSampleColumns, {}}};
  const DampedParams p = damped(job);
  const closed_form::Variant variant = closed_form::parse_variant(job.strings.at("variant"));
  const Complex c1 = job.number("c1");
  const Complex c2 = job.number("c2");
  const double threshold = job.number("threshold");
  const std::vector<double> grid = sample_grid(job);
  json& j = res.sidecar;
  j["variant"] = closed_form::to_string(variant);
  j["nu"] = complex_json(closed_form::index(p, variant));
  const closed_form::Adjudication adj =
      closed_form::adjudicate(p, c1, c2, grid, threshold, job.allow_inadmissible);
  j["passing_variant"] = closed_form::to_string(adj.passing);
  const closed_form::VariantReport& mine =
      variant == closed_form::Variant::corrected ? adj.corrected : adj.paper_literal;
  if (!mine.evaluated) {
    j["validity_flags"].push_back("inadmissible");
    j["error"] = mine.error;
    res.status = 1;
    return res;
  }
  const closed_form::ClosedFormSpec spec =
      closed_form::general_solution(p, variant, c1, c2, job.allow_inadmissible);
  for (double t : grid) res.table.add_sample(closed_form::eval(spec, t));
  put_residual(j, mine.exponential);
  j["validity_flags"].push_back(spec.exploratory ? "exploratory" : "admissible");
  j["verdict"] = oracle::to_string(mine.exponential.verdict);
  j["order"] = spec.order;
  if (mine.exponential.verdict == oracle::Verdict::fail) res.status = 1;
  return res;
}

Result run_residual(const JobSpec& job) {
  Result res{base_sidecar(job),
             {{"variant", "re_nu", "im_nu", "evaluated", "residual_linf", "residual_l2", "verdict",
               "cosine_linf"},
              {}}};
  const DampedParams p = damped(job);
  const std::vector<double> grid = sample_grid(job);
  const closed_form::Adjudication adj =
      closed_form::adjudicate(p, job.number("c1"), job.number("c2"), grid,
                              job.number("threshold"), job.allow_inadmissible);
  json& j = res.sidecar;
  j["nu"] = json::object();
  j["residual_linf"] = json::object();
  j["residual_l2"] = json::object();
  j["cosine_linf"] = json::object();
  for (const closed_form::VariantReport* r : {&adj.paper_literal, &adj.corrected}) {
    const std::string name = closed_form::to_string(r->variant);
    j["nu"][name] = complex_json(r->nu);
    if (r->evaluated) {
      j["residual_linf"][name] = r->exponential.linf;
      j["residual_l2"][name] = r->exponential.l2;
      j["cosine_linf"][name] = r->cosine.linf;
      if (r->exploratory) j["validity_flags"].push_back(name + ": exploratory");
    } else {
      j["residual_linf"][name] = nullptr;
      j["residual_l2"][name] = nullptr;
      j["cosine_linf"][name] = nullptr;
      j["validity_flags"].push_back(name + ": " + r->error);
    }
    const double nan = std::nan("");
    res.table.rows.push_back({name, r->nu.real(), r->nu.imag(),
                              std::string(r->evaluated ? "true" : "false"),
                              r->evaluated ? r->exponential.linf : nan,
                              r->evaluated ? r->exponential.l2 : nan,
                              std::string(r->evaluated ? oracle::to_string(r->exponential.verdict)
                                                       : "not-evaluated"),
                              r->evaluated ? r->cosine.linf : nan});
  }
  j["passing_variant"] = closed_form::to_string(adj.passing);
  j["threshold"] = adj.threshold;
  if (adj.passing == closed_form::Passing::none) res.status = 1;
  return res;
}

Result run_floquet(const JobSpec& job) {
  Result res{base_sidecar(job), {kSampleColumns, {}}};
  const GeneralParams gp = general(job);
  const floquet::FloquetSolution sol = floquet::solve(gp, job.integer("trunc"));
  std::vector<SolutionSample> samples;
  for (double t : sample_grid(job)) samples.push_back(floquet::eval_floquet(sol, t));
  for (const SolutionSample& s : samples) res.table.add_sample(s);
  const oracle::ResidualReport rep =
      oracle::residual(oracle::mathieu_ode(gp), samples, job.number("threshold"));
  json& j = res.sidecar;
  const Complex mu = sol.normalized_mu();
  j["mu"] = complex_json(mu);
  j["mu_unreduced"] = complex_json(sol.mu);
  j["truncation"] = sol.truncation;
  j["tail_ratio"] = sol.tail_ratio;
  j["verdict"] = oracle::to_string(rep.verdict);
  put_residual(j, rep);
  j["validity_flags"].push_back(
      floquet::to_string(floquet::classify_stability(mu, job.number("boundary-tol"))));
  if (rep.verdict == oracle::Verdict::fail) res.status = 1;
  return res;
}

std::vector<double> axis(double lo, double hi, int n) {
  if (n == 1) return {lo};
  return oracle::uniform_grid(lo, hi, static_cast<std::size_t>(n));
}

Result run_sweep(const JobSpec& job) {
  Result res{base_sidecar(job), {{"h", "theta", "re_mu", "im_mu", "stability"}, {}}};
  const auto hs = axis(job.number("h-min"), job.number("h-max"), job.integer("h-n"));
  const auto thetas =
      axis(job.number("theta-min"), job.number("theta-max"), job.integer("theta-n"));
  const auto points = floquet::sweep(hs, thetas, job.integer("trunc"),
                                     static_cast<unsigned>(job.integer("threads")));
  std::map<std::string, int> counts{{"stable", 0}, {"boundary", 0}, {"unstable", 0}};
  for (const floquet::SweepPoint& p : points) {
    const std::string s =
        floquet::to_string(floquet::classify_stability(p.mu, job.number("boundary-tol")));
    ++counts[s];
    res.table.rows.push_back({p.h, p.theta, p.mu.real(), p.mu.imag(), s});
  }
  res.sidecar["counts"] = counts;
  return res;
}

Result run_transform(const JobSpec& job) {
  Result res{base_sidecar(job), {kSampleColumns, {}}};
  const reductions::ReductionResult r = reductions::reduce(reduction_input(job));
  const std::vector<double> grid =
      r.interior_grid(static_cast<std::size_t>(job.integer("n")), job.number("z0"), job.number("z1"));
  const auto [lo, hi] = r.transformed_domain();
  const double z0 = std::isfinite(lo) ? lo : grid.front();
  const double z1 = std::isfinite(hi) ? hi : grid.back();
  oracle::IntegratorOptions opts;
  opts.tol = job.number("tol");
  const auto sol = oracle::integrate_dense(r.reduced_equation(), job.number("w0"),
                                           job.number("dw0"), z0, z1, opts);
  std::vector<SolutionSample> z_samples;
  for (double z : grid) z_samples.push_back(sol.at(z));
  const reductions::PulledSeries pulled = reductions::pullback(r, z_samples);
  const std::vector<SolutionSample> interior = pulled.interior();
  for (const SolutionSample& s : interior) res.table.add_sample(s);
  const oracle::ResidualReport rep =
      oracle::residual(r.source_equation(), interior, job.number("threshold"));
  json& j = res.sidecar;
  put_residual(j, rep);
  j["verdict"] = oracle::to_string(rep.verdict);
  j["reduction"] = {{"h", complex_json(r.gp.h)},
                    {"theta", complex_json(r.gp.theta)},
                    {"stated_h", complex_json(r.stated_gp.h)},
                    {"stated_theta", complex_json(r.stated_gp.theta)},
                    {"map", reductions::to_string(r.map)},
                    {"prefactor_rate", r.prefactor_rate},
                    {"time_scale", r.time_scale}};
  if (r.stated_gp.h != r.gp.h || r.stated_gp.theta != r.gp.theta) {
    j["validity_flags"].push_back("stated coefficients fail substitution; substituted values used");
  }
  if (r.family == reductions::Family::eq11) {
    j["validity_flags"].push_back("source uses -t y' (printed form has +t y')");
  }
  if (rep.verdict == oracle::Verdict::fail) res.status = 1;
  return res;
}

Result run_flux(const JobSpec& job) {
  Result res{base_sidecar(job), {{"t", "y", "dy", "field"}, {}}};
  const flux::FluxParams fp = flux_params(job);
  const std::vector<double> grid = sample_grid(job);
  const TimeSeries series = flux::simulate_full(fp, 0.0, grid.back(), job.number("tol"), grid);
  std::vector<double> field(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const SolutionSample& s = series.values[i];
    field[i] = flux::field_from_velocity(fp, s);
    res.table.rows.push_back({s.t, s.y.real(), s.dy.real(), field[i]});
  }
  json& j = res.sidecar;
  const flux::InducedFieldModel model = flux::induced_field_model(fp);
  j["model"] = {{"epsilon", model.epsilon},
                {"phi", model.phi},
                {"alpha", model.alpha},
                {"prefactor", model.prefactor}};
  if (model.in_regime) {
    j["validity_flags"].push_back("in-regime");
  } else {
    for (const std::string& r : model.reasons) j["validity_flags"].push_back(r);
  }
  const flux::ModulationResult mod = flux::modulation_analysis(
      grid, field, fp.Omega, std::abs(fp.base.omega), job.number("t-start"));
  j["modulation"] = {{"carrier_amplitude", mod.carrier_amplitude},
                     {"modulation_depth", mod.modulation_depth},
                     {"modulation_phase", mod.modulation_phase},
                     {"carrier_frequency", mod.carrier_frequency},
                     {"modulation_frequency", mod.modulation_frequency},
                     {"carrier_bin", mod.carrier_bin},
                     {"modulation_bin", mod.modulation_bin}};
  return res;
}

Result run_integrate(const JobSpec& job) {
  Result res{base_sidecar(job), {kSampleColumns, {}}};
  const bool mathieu = job.strings.at("equation") == "mathieu";
  const oracle::LinearODE ode =
      mathieu ? oracle::mathieu_ode(general(job)) : oracle::damped_ode(damped(job));
  const std::vector<double> grid = sample_grid(job);
  oracle::IntegratorOptions opts;
  opts.tol = job.number("tol");
  const auto sol = oracle::integrate_dense(ode, job.number("y0"), job.number("dy0"), grid.front(),
                                           grid.back(), opts);
  std::vector<SolutionSample> samples;
  for (double t : grid) {
    samples.push_back(sol.differentiated(t));
    res.table.add_sample(samples.back());
  }
  const oracle::ResidualReport rep = oracle::residual(ode, samples);
  json& j = res.sidecar;
  put_residual(j, rep);
  j["steps"] = {{"accepted", sol.stats().accepted},
                {"rejected", sol.stats().rejected},
                {"evaluations", sol.stats().evaluations}};
  return res;
}

std::string render_csv(const Table& table) {
  std::ostringstream os;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << csv_cell(table.columns[i]);
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
    os << '\n';
  }
  return os.str();
}

json table_json(const Table& table) {
  json rows = json::array();
  for (const auto& row : table.rows) {
    json r = json::array();
    for (const Cell& c : row) {
      if (const double* d = std::get_if<double>(&c)) {
        r.push_back(*d);
      } else {
        r.push_back(std::get<std::string>(c));
      }
    }
    rows.push_back(std::move(r));
  }
  return {{"columns", table.columns}, {"rows", rows}};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw UsageError("failed writing '" + path + "'");
}

void emit(const JobSpec& job, const Result& res, std::ostream& out) {
  if (job.output == "json") {
    json doc = res.sidecar;
    doc["table"] = table_json(res.table);
    const std::string text = doc.dump(2) + "\n";
    if (job.out_path) {
      write_file(*job.out_path, text);
    } else {
      out << text;
    }
    return;
  }
  const std::string csv = render_csv(res.table);
  if (job.out_path) {
    write_file(*job.out_path, csv);
    write_file(*job.out_path + ".json", res.sidecar.dump(2) + "\n");
  } else {
    out << csv;
  }
}

}  // namespace

double JobSpec::number(const std::string& key) const {
  const auto it = numbers.find(key);
  if (it == numbers.end()) throw UsageError("missing value for --" + key);
  return it->second;
}

int JobSpec::integer(const std::string& key) const {
  return static_cast<int>(std::lround(number(key)));
}

JobSpec parse(const std::vector<std::string>& args, const std::optional<std::string>& env_tol) {
  JobSpec job;
  CLI::App app{"Mathieu equation toolkit: closed forms, Floquet exponents, reductions and flux-lattice response",
               "mathieu-kit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  const auto flags = command_flags();
  std::map<std::string, std::map<std::string, double>> values;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  std::map<std::string, std::map<std::string, std::string>> strings;
  std::map<std::string, double> tol_values;
  std::map<std::string, CLI::Option*> tol_options;
  std::map<std::string, bool> allow;
  std::map<std::string, std::string> outputs;
  std::map<std::string, std::string> out_paths;
  std::map<std::string, CLI::Option*> out_options;

  for (const auto& [name, list] : flags) {
    CLI::App* sub = app.add_subcommand(name, command_help(name));
    // -h stays free because --h is a parameter
    sub->set_help_flag("--help", "Print this help message and exit");
    for (const Flag& f : list) {
      double& slot = values[name][f.name] = f.fallback;
      CLI::Option* opt = sub->add_option(std::string("--") + f.name, slot, f.help);
      if (f.required) opt->required();
      options[name][f.name] = opt;
    }
    if (name == "solve") {
      strings[name]["variant"] = "corrected";
      sub->add_option("--variant", strings[name]["variant"], "corrected or paper-literal")
          ->check(CLI::IsMember({"corrected", "paper-literal"}));
    }
    if (name == "transform") {
      sub->add_option("--family", strings[name]["family"],
                      "eq11, eq13, eq15, eq17-sin, eq17-cos or damped")
          ->required()
          ->check(CLI::IsMember({"eq11", "eq13", "eq15", "eq17-sin", "eq17-cos", "damped"}));
    }
    if (name == "integrate") {
      strings[name]["equation"] = "mathieu";
      sub->add_option("--equation", strings[name]["equation"], "mathieu or damped")
          ->check(CLI::IsMember({"mathieu", "damped"}));
    }
    if (name == "solve" || name == "residual") {
      sub->add_flag("--allow-inadmissible", allow[name],
                    "evaluate round(Re nu) when nu is not an integer (exploratory)");
    }
    tol_options[name] =
        sub->add_option("--tol", tol_values[name], "oracle tolerance in [1e-14, 1e-3]");
    outputs[name] = "csv";
    sub->add_option("--output", outputs[name], "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    out_options[name] =
        sub->add_option("--out", out_paths[name], "output path (csv also writes PATH.json)");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw UsageError(app.help(), 0);
  } catch (const CLI::CallForAllHelp&) {
    throw UsageError(app.help("", CLI::AppFormatMode::All), 0);
  } catch (const CLI::ParseError& e) {
    std::string help;
    for (const CLI::App* sub : app.get_subcommands()) {
      if (sub->parsed()) help = "\nRun 'mathieu-kit " + sub->get_name() + " --help' for usage.";
    }
    throw UsageError(std::string(e.what()) + help);
  }

  const CLI::App* chosen = app.get_subcommands().front();
  job.command = chosen->get_name();
  job.numbers = values[job.command];
  job.strings = strings[job.command];
  for (const auto& [key, opt] : options[job.command]) {
    if (opt->count() > 0) job.given.insert(key);
  }
  job.allow_inadmissible = allow[job.command];
  job.output = outputs[job.command];
  if (out_options[job.command]->count() > 0) job.out_path = out_paths[job.command];

  // tolerance: flag, then environment, then default
  if (tol_options[job.command]->count() > 0) {
    job.numbers["tol"] = parse_tolerance(format_number(tol_values[job.command]), "--tol");
    job.given.insert("tol");
  } else if (env_tol && !env_tol->empty()) {
    job.numbers["tol"] = parse_tolerance(*env_tol, kToleranceEnv);
  } else {
    job.numbers["tol"] = kDefaultTolerance;
  }
  validate(job);
  return job;
}

int execute(const JobSpec& job, std::ostream& out, std::ostream& err) {
  try {
    Result res;
    const std::string& c = job.command;
    if (c == "solve") {
      res = run_solve(job);
    } else if (c == "residual") {
      res = run_residual(job);
    } else if (c == "floquet") {
      res = run_floquet(job);
    } else if (c == "sweep") {
      res = run_sweep(job);
    } else if (c == "transform") {
      res = run_transform(job);
    } else if (c == "flux") {
      res = run_flux(job);
    } else if (c == "integrate") {
      res = run_integrate(job);
    } else {
      throw UsageError("unknown command '" + c + "'");
    }
    emit(job, res, out);
    if (res.status != 0) {
      err << "mathieu-kit " << c << ": check failed";
      if (res.sidecar.contains("error")) err << ": " << res.sidecar["error"].get<std::string>();
      err << "\n";
    }
    return res.status;
  } catch (const UsageError& e) {
    err << "mathieu-kit: " << e.what() << "\n";
    return e.code();
  } catch (const InvalidInput& e) {
    err << "mathieu-kit: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "mathieu-kit " << job.command << ": " << e.what() << "\n";
    return 1;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::optional<std::string> env;
  if (const char* v = std::getenv(kToleranceEnv)) env = v;
  JobSpec job;
  try {
    job = parse(args, env);
  } catch (const UsageError& e) {
    (e.code() == 0 ? out : err) << e.what() << (e.code() == 0 ? "" : "\n");
    return e.code();
  }
  return execute(job, out, err);
}

}  // namespace mathieu::cli
