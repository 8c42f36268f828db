#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace obliq::cli {

enum ExitCode : int { ok = 0, config_error = 1, validation_failure = 2, solver_failure = 3 };

struct CommandOptions {
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  /// exact | grid | interpolated
  std::optional<std::string> method;
  std::optional<std::size_t> level;
  std::optional<double> tol;
  /// solve: also run the other route and print the sup-difference.
  /// simulate-cbp: also run the gap SRBM on the same noise.
  bool compare = false;
};

// Each command writes its summary JSON to `out` and error diagnostics to `err`.
int cmd_validate(const CommandOptions& o, std::ostream& out, std::ostream& err);
int cmd_solve(const CommandOptions& o, std::ostream& out, std::ostream& err);
int cmd_simulate_srbm(const CommandOptions& o, std::ostream& out, std::ostream& err);
int cmd_simulate_cbp(const CommandOptions& o, std::ostream& out, std::ostream& err);
int cmd_approximate(const CommandOptions& o, std::ostream& out, std::ostream& err);
int cmd_verify(const CommandOptions& o, std::ostream& out, std::ostream& err);

}  // namespace obliq::cli
