#pragma once

// Command-line jobs: parsing into a validated JobSpec and deterministic
// execution to CSV/JSON.

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mathieu::cli {

inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr double kMinTolerance = 1e-14;
inline constexpr double kMaxTolerance = 1e-3;
inline constexpr const char* kToleranceEnv = "MATHIEU_KIT_TOL";

/// Bad flags or values. code 0 carries a help text instead of an error.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what, int code = 2)
      : std::runtime_error(what), code_(code) {}
  [[nodiscard]] int code() const { return code_; }

 private:
  int code_;
};

struct JobSpec {
  std::string command;
  std::map<std::string, double> numbers;       // every numeric flag, defaults included
  std::map<std::string, std::string> strings;  // variant, family, equation
  std::set<std::string> given;                 // flags present on the command line
  bool allow_inadmissible = false;
  std::string output = "csv";
  std::optional<std::string> out_path;

  [[nodiscard]] double number(const std::string& key) const;
  [[nodiscard]] int integer(const std::string& key) const;
};

/// args excludes the program name. env_tol is the value of MATHIEU_KIT_TOL.
JobSpec parse(const std::vector<std::string>& args,
              const std::optional<std::string>& env_tol = std::nullopt);

/// 0 on success, 1 on numerical failure, 2 on usage error.
int execute(const JobSpec& job, std::ostream& out, std::ostream& err);

/// parse + execute with the process environment.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mathieu::cli
