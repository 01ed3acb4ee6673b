#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flashcrowd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;  // failures while running a valid command
inline constexpr int kExitUsage = 2;    // bad flags, values, or model/statistic mix
inline constexpr int kExitIo = 3;       // unreadable inputs, unwritable outputs

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One flat bag of option values shared by every subcommand; each subcommand
// reads the fields it cares about. A JSON config file (--config) carries the
// same keys; flags given on the command line override file values.
struct CliOptions {
  std::int64_t n = 1000;
  double rho = 2.0;
  std::string policy = "min";
  std::int64_t reps = 100;
  std::uint64_t seed = 0;
  double alpha = 1.0;
  double delta = 3.0;
  std::string model = "peersim-min";
  std::string out = ".";

  double trace_step = 0.0;
  double trace_t_max = 0.0;  // 0 = unbounded
  bool run_to_completion = true;
  bool poissonized = false;
  std::string n_grid = "1000,10000,100000,1000000";
  std::string stats;  // empty = the model's full statistic set
  int workers = 1;
  double x = 1.0;  // critical-index scale
  std::int64_t kmax = 50;
  int quadrature = 4096;
  std::string tabulate = "nuR";
  double x_min = 0.0;
  double x_max = 5.0;
  std::int64_t steps = 101;
  std::string input;        // fit: estimates CSV
  std::string min_fits;     // report: slopes CSV, Min policy
  std::string random_fits;  // report: slopes CSV, Random policy
  double tolerance = 0.05;

  bool operator==(const CliOptions&) const = default;
};

struct CommandSpec {
  std::string subcommand;
  CliOptions options;

  bool operator==(const CommandSpec&) const = default;
};

// Parses and validates; nullopt means help was requested and printed.
// Throws UsageError (bad flags/values), IoError (unreadable config).
std::optional<CommandSpec> parse_cli(const std::vector<std::string>& args);

// Flat JSON round-trip of a parsed spec: feeding the result back through
// --config reproduces the same options.
std::string serialize_spec(const CommandSpec& spec);

// Runs the parsed command; throws UsageError / IoError / std::exception.
void execute(const CommandSpec& spec);

// Full dispatch: parse, execute, map errors to exit codes.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace flashcrowd
