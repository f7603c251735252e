#pragma once

// Root-node cutting-plane loop over the cut variants, the branch-and-cut
// solver for the Benders master, and gap-closed profiles over bound traces.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lagcut/benders.hpp"
#include "lagcut/lagrangian.hpp"
#include "lagcut/model.hpp"

namespace lagcut {

enum class Variant : std::uint8_t { StrBen, Exact, Rstr1, Rstr2, RstrMIP, BendersOnly };
const char* to_string(Variant v);
/// Case-insensitive; nullopt for unknown names.
std::optional<Variant> parse_variant(std::string_view name);

struct EarlyStop {
  bool enabled = true;
  int window = 5;
  double fraction = 0.01;
};

struct VariantConfig {
  Variant variant = Variant::Exact;
  double delta = 0.5;  // ignored by StrBen and BendersOnly
  int K = 20;          // ignored by Exact
  double alpha = 1.0;
  double time_limit = kInf;  // seconds
  EarlyStop early_stop;
  int benders_cap = 500;        // Benders rounds before Lagrangian rounds are forced
  int max_iterations = 100000;  // master solves
  int max_oracle_calls = 100;   // per separation
  int workers = 1;
  /// Record the iteration count instead of wall time in traces, so repeated
  /// runs give identical files.
  bool iteration_clock = false;

  void validate() const;
};

struct TracePoint {
  double time_s = 0.0;
  double lower_bound = 0.0;
  int iter = 0;
  int n_benders = 0;
  int n_lagrangian = 0;  // Lagrangian, strengthened Benders and feasibility cuts
  int n_intL = 0;
};

struct BoundTrace {
  std::string instance;
  std::string method;
  double z_lp = -kInf;  // bound when the first Lagrangian round starts
  std::vector<TracePoint> points;

  double final_bound() const { return points.empty() ? -kInf : points.back().lower_bound; }
};

/// CSV with a "# schema=lagcut-trace/1 ..." comment line carrying instance,
/// method and z_lp, then time_s,lower_bound,iter,n_benders,n_lagrangian,n_intL.
void write_trace_csv(const BoundTrace& trace, std::ostream& out);
BoundTrace read_trace_csv(std::istream& in);

enum class RootStatus : std::uint8_t { Converged, EarlyStop, TimeLimit, IterationLimit };
const char* to_string(RootStatus s);

struct RootResult {
  explicit RootResult(MasterModel m) : master(std::move(m)) {}

  MasterModel master;
  BoundTrace trace;
  RootStatus status = RootStatus::Converged;
  MasterSolution last;
  int benders_rounds = 0;
  int lagrangian_rounds = 0;
  long oracle_calls = 0;
  double wall_time = 0.0;
};

/// Benders rounds until no Benders cut is violated, then Lagrangian rounds
/// per the variant until no cut is found, early stop or a limit. on_point
/// sees every trace point as it is recorded.
RootResult run_root_loop(const SipInstance& inst, const VariantConfig& cfg,
                         const std::function<void(const TracePoint&)>& on_point = {});

struct BranchAndCutOptions {
  bool benders = true;
  bool integer_lshaped = true;
  long max_nodes = 1'000'000;
  double time_limit = kInf;
  double gap_tol = 1e-6;
  int workers = 1;
};

struct BranchAndCutResult {
  SolveStatus status = SolveStatus::LimitReached;
  std::vector<double> x;
  double objective = kInf;
  double bound = -kInf;
  double gap = kInf;  // (UB - LB) / max(|UB|, |LB|)
  long node_count = 0;
  long lazy_cuts = 0;
  double wall_time = 0.0;
};

/// Best-first branch-and-cut on the master; integer candidates trigger lazy
/// Benders and integer L-shaped cuts until none is violated.
BranchAndCutResult run_branch_and_cut(const SipInstance& inst, MasterModel root,
                                      const BranchAndCutOptions& options = {});

struct ProfileRow {
  double gamma = 0.0;
  double tau = 0.0;
  std::string method;
  double rho = 0.0;
};

/// rho_m(tau) = share of instances whose trace for method m closed at least
/// gamma times the best closed gap by time tau. Rows are sorted by tau, then
/// method; tau runs over the union of finite crossing times.
std::vector<ProfileRow> gap_closed_profile(const std::vector<BoundTrace>& traces, double gamma);

/// CSV: gamma,tau,method,rho
void write_profile_csv(const std::vector<ProfileRow>& rows, std::ostream& out);

}  // namespace lagcut
