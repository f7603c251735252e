#pragma once

// Command implementations behind the lagcut executable. Each cmd_* writes
// key=value summary lines to `out` and throws lagcut::Error on failure;
// run() parses a command line, dispatches, and maps failures to exit codes.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lagcut/driver.hpp"

namespace lagcut::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,          // bad flags, unreadable or malformed input
  kExitSolverFailure = 3,  // numerical or model failure while solving
  kExitTimeLimit = 4,      // solve stopped at the time limit; gap reported
};

struct GenerateOptions {
  std::string family = "sslp";  // sslp, snip or tiny
  std::uint64_t seed = 0;
  int count = 3;  // sslp and tiny: files per size
  int m = 5;
  int n = 10;
  std::optional<int> scenarios;  // default per family: sslp 5, snip 4, tiny 3
  // snip
  int nodes = 12;
  int arcs = 30;
  int interdictable = 8;
  std::vector<double> budgets{30.0, 50.0, 70.0, 90.0};
  // tiny
  int tiny_n = 4;
  int tiny_ny = 3;
  std::filesystem::path out = ".";
};

struct RootOptions {
  std::filesystem::path instance;
  VariantConfig config;
  std::filesystem::path out = ".";
  bool extensive_lp = true;          // compute z_LP from the extensive form when small enough
  std::optional<double> reference;  // best known z_IP, enables gap_closed
};

struct SolveOptions {
  std::filesystem::path instance;
  std::string mode = "lbc";  // lbc: Lagrangian root cuts; bbc: Benders root only
  VariantConfig config;      // root loop settings for lbc; time_limit covers both phases
  long max_nodes = 1'000'000;
  std::optional<std::filesystem::path> out;  // root trace directory
};

struct ProfileOptions {
  std::vector<std::filesystem::path> traces;
  std::vector<double> gammas{0.75, 0.95};
  std::optional<std::filesystem::path> out;  // one CSV per gamma; stdout when unset
};

/// Files are named <instance name>.sip; prints one file=<path> line each.
int cmd_generate(const GenerateOptions& opt, std::ostream& out);
/// Writes <out>/<instance>.<method>.csv point by point, so a failure leaves
/// the partial trace on disk.
int cmd_root(const RootOptions& opt, std::ostream& out);
int cmd_solve(const SolveOptions& opt, std::ostream& out);
int cmd_profile(const ProfileOptions& opt, std::ostream& out);

/// Entry point of the executable; argv[0] is the program name. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lagcut::cli
