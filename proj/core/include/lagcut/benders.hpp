#pragma once

// Benders master model with per-scenario epigraph variables theta_s, plus
// the classical cut generators (LP-dual Benders cuts, integer L-shaped cuts).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "lagcut/model.hpp"
#include "lagcut/optbase.hpp"

namespace lagcut {

enum class CutFamily : std::uint8_t {
  Benders,
  IntegerLShaped,
  Lagrangian,
  StrengthenedBenders,
  LagrangianFeasibility,
};
const char* to_string(CutFamily family);
inline constexpr int kCutFamilyCount = 5;

/// coef_x^T x + coef_theta * theta_s >= rhs
struct Cut {
  CutFamily family = CutFamily::Benders;
  int scenario = 0;
  std::vector<double> coef_x;
  double coef_theta = 1.0;
  double rhs = 0.0;
  int born_at = 0;
  double violation_at_birth = 0.0;

  double lhs(std::span<const double> x, double theta) const;
  /// rhs - lhs; positive when (x, theta) is cut off.
  double violation(std::span<const double> x, double theta) const { return rhs - lhs(x, theta); }
};

/// Cut violation threshold for Benders cuts at (x^, theta^).
inline double benders_threshold(double theta_hat) { return 1e-4 * (std::abs(theta_hat) + 1.0); }
/// Threshold for integer L-shaped and Lagrangian cuts.
inline double fine_threshold(double theta_hat) { return 1e-6 * (std::abs(theta_hat) + 1.0); }

struct MasterSolution {
  SolveStatus status = SolveStatus::Optimal;
  std::vector<double> x;
  std::vector<double> theta;
  double lower_bound = 0.0;
  Basis basis;
  long iterations = 0;
};

enum class MasterMode : std::uint8_t { LpRelaxed, Integer };

class MasterModel {
 public:
  MasterModel(const SipInstance& inst, std::vector<double> theta_lower);

  const SipInstance& instance() const noexcept { return *inst_; }
  int n() const noexcept { return inst_->n; }
  int num_scenarios() const noexcept { return inst_->num_scenarios(); }
  const std::vector<double>& theta_lower() const noexcept { return theta_lower_; }

  /// Appends the cut unless an identical one (coefficients rounded at 1e-12)
  /// is already pooled. Returns whether it was added.
  bool add_cut(const Cut& cut);
  const std::vector<Cut>& cuts() const noexcept { return cuts_; }
  std::size_t count(CutFamily family) const;

  /// Columns x_0..x_{n-1} then theta_0..theta_{S-1}; one row per first-stage
  /// row followed by one row per cut (scaled to unit max coefficient).
  const LinearProgram& program() const noexcept { return lp_; }

  /// Solves the master. Throws FirstStageInfeasible when infeasible. The LP
  /// mode warm starts from the previous solve.
  MasterSolution solve(MasterMode mode = MasterMode::LpRelaxed);

  /// LP over the current cuts with replaced x bounds; used by tree search.
  /// Never throws on infeasibility.
  MasterSolution solve_node(const std::vector<double>& lower, const std::vector<double>& upper,
                            const Basis* warm) const;

  double objective(std::span<const double> x, std::span<const double> theta) const;

  /// CSV: scenario,family,coef_theta,rhs,violation_at_birth
  void export_cuts_csv(std::ostream& out) const;

 private:
  MasterSolution unpack(const SolveOutcome& out) const;

  const SipInstance* inst_;
  std::vector<double> theta_lower_;
  LinearProgram lp_;
  std::vector<Cut> cuts_;
  std::set<std::pair<int, std::vector<double>>> seen_;
  Basis last_basis_;
};

/// Benders cut from an optimal dual of the LP relaxation of Q_s at x^.
/// Always returned (no violation test); mu holds the row duals.
struct BendersCut {
  Cut cut;
  std::vector<double> mu;
  double lp_value = 0.0;  // Q_s^LP(x^)
};

BendersCut benders_cut_at(const SipInstance& inst, int s, std::span<const double> x_hat);

/// Returns the Benders cut only when it is violated at (x^, theta^) by at
/// least benders_threshold(theta^).
std::optional<BendersCut> separate_benders(const SipInstance& inst, int s,
                                           std::span<const double> x_hat, double theta_hat);

/// Integer L-shaped cut at binary x^; q_value may pass a cached Q_s(x^).
/// Throws UnsupportedCut unless the first stage is pure binary.
std::optional<Cut> separate_integer_lshaped(const SipInstance& inst, int s,
                                            std::span<const double> x_hat, double theta_hat,
                                            double lower_bound,
                                            std::optional<double> q_value = std::nullopt);

/// Minimum of q_s^T y over the LP relaxation of K^s: a valid lower bound on
/// Q_s over the first-stage feasible set.
double compute_theta_lower_bound(const SipInstance& inst, int s);

/// Master with theta lower bounds and one round of Benders cuts at a point
/// of {x : A x >= b} (LP relaxation).
MasterModel initialize_master(const SipInstance& inst);

}  // namespace lagcut
