#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "job.hpp"

using namespace mathieu::cli;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_args(const std::vector<std::string>& args,
             const std::optional<std::string>& env = std::nullopt) {
  std::ostringstream out;
  std::ostringstream err;
  int code = 0;
  try {
    code = execute(parse(args, env), out, err);
  } catch (const UsageError& e) {
    err << e.what();
    code = e.code();
  }
  return {code, out.str(), err.str()};
}

int usage_code(const std::vector<std::string>& args,
               const std::optional<std::string>& env = std::nullopt) {
  try {
    parse(args, env);
  } catch (const UsageError& e) {
    return e.code();
  }
  return -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

const std::vector<std::vector<std::string>> kFixtures = {
    {"solve", "--m", "1", "--eta", "0", "--k0", "1", "--k", "1", "--omega", "2", "--variant",
     "corrected", "--t0", "0", "--t1", "10", "--dt", "0.01"},
    {"residual", "--m", "1.3", "--eta", "0.4", "--k0", "2", "--k", "0.7", "--omega", "1.5",
     "--allow-inadmissible", "--t1", "5", "--dt", "0.05"},
    {"floquet", "--h", "1", "--theta", "0.5", "--trunc", "25"},
    {"sweep", "--h-min", "-2", "--h-max", "10", "--h-n", "5", "--theta-min", "-2", "--theta-max",
     "2", "--theta-n", "5"},
    {"transform", "--family", "eq13", "--a", "0.7", "--b", "-0.3", "--n", "41"},
    {"flux", "--eta", "10", "--k0", "1e4", "--k", "100", "--omega", "0.1", "--Omega", "10"},
    {"integrate", "--equation", "damped", "--k0", "2", "--k", "0.5", "--eta", "0.1", "--t1",
     "3"},
};

}  // namespace

TEST_CASE("parse stated examples") {
  const JobSpec solve = parse(kFixtures[0]);
  CHECK(solve.command == "solve");
  CHECK(solve.number("omega") == 2.0);
  CHECK(solve.strings.at("variant") == "corrected");
  CHECK(solve.number("tol") == kDefaultTolerance);
  const JobSpec fl = parse(kFixtures[2]);
  CHECK(fl.command == "floquet");
  CHECK(fl.integer("trunc") == 25);
  CHECK(fl.given.count("h") == 1);
  CHECK(fl.given.count("h-im") == 0);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(usage_code({"solve", "--omega", "0", "--k0", "1", "--k", "1"}) == 2);
  CHECK(usage_code({"solve", "--k0", "1"}) == 2);  // missing --k
  CHECK(usage_code({"solve", "--k0", "1", "--k", "1", "--bogus", "3"}) == 2);
  CHECK(usage_code({"solve", "--k0", "1", "--k", "1", "--variant", "literal"}) == 2);
  CHECK(usage_code({"solve", "--k0", "1", "--k", "1", "--dt", "0"}) == 2);
  CHECK(usage_code({"floquet", "--h", "1", "--theta", "0", "--trunc", "2.5"}) == 2);
  CHECK(usage_code({"transform", "--family", "eq15", "--a", "1"}) == 2);  // lambda = 0
  CHECK(usage_code({"transform", "--family", "eq11", "--k0", "1"}) == 2);
  CHECK(usage_code({"flux", "--eta", "1", "--k0", "1", "--k", "0", "--omega", "1", "--Omega",
                    "-1"}) == 2);
  CHECK(usage_code({"frobnicate"}) == 2);
  CHECK(usage_code({}) == 2);
  CHECK(usage_code({"--help"}) == 0);
  CHECK(usage_code({"floquet", "--help"}) == 0);

  std::ostringstream out;
  std::ostringstream err;
  CHECK(run({"solve", "--omega", "0", "--k0", "1", "--k", "1"}, out, err) == 2);
  CHECK(out.str().empty());
  CHECK(err.str().find("omega") != std::string::npos);
}

TEST_CASE("tolerance precedence and range") {
  const std::vector<std::string> base = {"integrate", "--h", "1", "--t1", "1"};
  CHECK(parse(base).number("tol") == 1e-10);
  CHECK(parse(base, "1e-6").number("tol") == 1e-6);
  std::vector<std::string> flag = base;
  flag.insert(flag.end(), {"--tol", "1e-9"});
  CHECK(parse(flag, "1e-6").number("tol") == 1e-9);
  CHECK(usage_code(base, "1e-2") == 2);
  CHECK(usage_code(base, "1e-15") == 2);
  CHECK(usage_code(base, "abc") == 2);
  CHECK(usage_code(base, "1e-6x") == 2);
  flag.back() = "1";
  CHECK(usage_code(flag) == 2);
  CHECK(parse(base, "1e-14").number("tol") == 1e-14);
  CHECK(parse(base, "1e-3").number("tol") == 1e-3);
}

TEST_CASE("solve output contract") {
  const Run r = run_args(kFixtures[0]);
  CHECK(r.code == 0);
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "t,re_y,im_y,re_dy,im_dy");
  std::string row;
  std::size_t count = 0;
  while (std::getline(lines, row)) ++count;
  CHECK(count == 1001);

  std::vector<std::string> as_json = kFixtures[0];
  as_json.insert(as_json.end(), {"--output", "json"});
  const json j = json::parse(run_args(as_json).out);
  for (const char* key : {"command", "params", "variant", "nu", "mu", "residual_linf",
                          "residual_l2", "passing_variant", "validity_flags"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["nu"]["re"] == 1.0);
  CHECK(j["mu"].is_null());
  CHECK(j["residual_linf"].get<double>() < 1e-8);
  // every numeric flag is echoed
  for (const char* key : {"m", "eta", "k0", "k", "omega", "t0", "t1", "dt", "c1", "c2", "tol",
                          "threshold"}) {
    CHECK(j["params"].contains(key));
  }
  // 17 significant digits round-trip
  const double t = j["table"]["rows"][3][0].get<double>();
  CHECK(t == 0.03);
}

TEST_CASE("residual job reports both variants") {
  const Run r = run_args({"residual", "--k0", "2.25", "--k", "1", "--omega", "1", "--output",
                          "json"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["residual_linf"]["corrected"].get<double>() < 1e-8);
  CHECK(j["residual_linf"]["paper-literal"].get<double>() > 1e-3);
  CHECK(j["passing_variant"] == "corrected");

  // both inadmissible: numbers are still emitted and the run fails
  const Run bad = run_args({"residual", "--k0", "2", "--k", "0.7", "--omega", "1.5", "--output",
                            "json"});
  CHECK(bad.code == 1);
  const json b = json::parse(bad.out);
  CHECK(b["passing_variant"] == "none");
  CHECK(b["residual_linf"]["corrected"].is_null());
  CHECK(b["validity_flags"].size() == 2);
}

TEST_CASE("numerical failure exits with 1 and still writes the sidecar") {
  const Run r = run_args({"solve", "--k0", "2", "--k", "1", "--omega", "1.5", "--output", "json"});
  CHECK(r.code == 1);
  const json j = json::parse(r.out);
  CHECK(j["validity_flags"][0] == "inadmissible");
  CHECK(j["error"].get<std::string>().find("nearest integer") != std::string::npos);
  CHECK(j["table"]["rows"].empty());
}

TEST_CASE("sweep output is sorted and independent of thread count") {
  std::vector<std::string> one = kFixtures[3];
  one.insert(one.end(), {"--threads", "1"});
  std::vector<std::string> many = kFixtures[3];
  many.insert(many.end(), {"--threads", "4"});
  const Run a = run_args(one);
  const Run b = run_args(many);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  std::istringstream lines(a.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "h,theta,re_mu,im_mu,stability");
  double last_h = -1e300;
  double last_theta = -1e300;
  std::string row;
  while (std::getline(lines, row)) {
    double h = 0.0;
    double theta = 0.0;
    std::sscanf(row.c_str(), "%lf,%lf", &h, &theta);
    CHECK((h > last_h || (h == last_h && theta > last_theta)));
    last_h = h;
    last_theta = theta;
  }
}

TEST_CASE("transform flags the sign-corrected families") {
  const json j = json::parse(
      run_args({"transform", "--family", "eq17-sin", "--a", "2", "--b", "0", "--output", "json"})
          .out);
  CHECK(j["reduction"]["theta"]["re"] == 0.5);
  CHECK(j["reduction"]["stated_theta"]["re"] == -0.5);
  CHECK(j["residual_linf"].get<double>() < 1e-6);
  CHECK(j["validity_flags"].size() == 1);
}

TEST_CASE("repeated runs are byte-identical") {
  const auto dir = std::filesystem::temp_directory_path() / "mathieu_kit_cli_test";
  std::filesystem::create_directories(dir);
  int index = 0;
  for (const auto& fixture : kFixtures) {
    const Run a = run_args(fixture);
    const Run b = run_args(fixture);
    INFO(fixture.front());
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
    CHECK_FALSE(a.out.empty());

    const auto path = (dir / ("run" + std::to_string(index++) + ".csv")).string();
    std::vector<std::string> to_file = fixture;
    to_file.insert(to_file.end(), {"--out", path});
    REQUIRE(run_args(to_file).code == a.code);
    const std::string csv1 = slurp(path);
    const std::string json1 = slurp(path + ".json");
    REQUIRE(run_args(to_file).code == a.code);
    CHECK(slurp(path) == csv1);
    CHECK(slurp(path + ".json") == json1);
    CHECK(csv1 == a.out);
  }
  std::filesystem::remove_all(dir);
}
