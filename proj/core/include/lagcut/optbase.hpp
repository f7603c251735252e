#pragma once

// Self-contained LP/MIP kernel. Everything in the library that needs an
// optimization solve goes through solve_lp / solve_mip, so an adapter to an
// external solver only has to reproduce this surface.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace lagcut {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Primal feasibility tolerance used to certify solutions.
inline constexpr double kFeasibilityTol = 1e-7;
/// Distance from the nearest integer below which a value counts as integral.
inline constexpr double kIntegralityTol = 1e-6;

enum class Sense : std::uint8_t { GreaterEqual, LessEqual, Equal };
enum class VarType : std::uint8_t { Continuous, Integer, Binary };

struct LinearRow {
  std::vector<int> index;
  std::vector<double> value;
  Sense sense = Sense::GreaterEqual;
  double rhs = 0.0;
};

struct LinearProgram {
  std::vector<double> objective;
  double objective_constant = 0.0;
  bool maximize = false;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LinearRow> rows;
  std::vector<std::string> names;  // optional column names, used by dumps

  int num_cols() const noexcept { return static_cast<int>(objective.size()); }
  int num_rows() const noexcept { return static_cast<int>(rows.size()); }

  int add_column(double cost, double lo, double hi, std::string name = {});
  int add_row(std::vector<int> index, std::vector<double> value, Sense sense, double rhs);

  /// Throws Error(DimensionMismatch / InvalidArgument) when malformed.
  void validate() const;
};

struct MipProgram {
  LinearProgram lp;
  std::vector<VarType> types;
  /// Optional; fractional columns of higher priority are branched on first.
  std::vector<int> priority;

  int add_column(double cost, double lo, double hi, VarType type, std::string name = {});
  void validate() const;
};

enum class BasisStatus : std::uint8_t { Basic, AtLower, AtUpper, AtZero };

/// Simplex basis over structural columns and row logicals. Rows appended
/// after a basis was recorded are treated as basic when warm starting.
struct Basis {
  std::vector<BasisStatus> cols;
  std::vector<BasisStatus> rows;
  bool empty() const noexcept { return cols.empty() && rows.empty(); }
};

enum class SolveStatus : std::uint8_t { Optimal, Infeasible, Unbounded, LimitReached };
const char* to_string(SolveStatus status);

struct PoolEntry {
  std::vector<double> x;
  double objective = 0.0;
};

struct BoundRecord {
  double lower = 0.0;
  double upper = kInf;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::LimitReached;
  std::vector<double> primal;
  double objective = 0.0;
  /// Row duals as sensitivities d(objective)/d(rhs). LP only.
  std::vector<double> duals;
  /// Structural reduced costs, same sign convention as duals. LP only.
  std::vector<double> reduced_costs;
  /// Unbounded: primal direction. Infeasible: Farkas multipliers on rows.
  std::vector<double> ray;
  Basis basis;
  /// MIP: every integer-feasible point met during the search, best first.
  std::vector<PoolEntry> incumbent_pool;
  /// MIP: proven bound on the optimum (lower for min, upper for max).
  double bound = -kInf;
  /// MIP: (global bound, incumbent) after each processed node, both in the
  /// minimization sense.
  std::vector<BoundRecord> bound_log;
  long node_count = 0;
  long iterations = 0;
  double wall_time = 0.0;
};

struct LpOptions {
  const Basis* warm_start = nullptr;
  long iteration_limit = 0;  // 0 = automatic
};

struct MipLimits {
  long max_nodes = 1'000'000;
  double time_limit = kInf;  // seconds
  double gap_rel = 1e-9;
  double gap_abs = 1e-9;
  std::size_t pool_capacity = 256;
  bool log_bounds = false;
};

/// Bounded-variable primal simplex on a dense basis inverse.
SolveOutcome solve_lp(const LinearProgram& lp, const LpOptions& options = {});

/// Best-bound branch and bound over solve_lp relaxations.
SolveOutcome solve_mip(const MipProgram& mip, const MipLimits& limits = {});

/// Plain-text dump of a program; grammar documented in docs/lp_text.md.
void write_lp_text(const LinearProgram& lp, std::ostream& out,
                   const std::vector<VarType>* types = nullptr);

}  // namespace lagcut
