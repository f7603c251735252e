#pragma once

// Two-stage stochastic integer program data model.
//
//   min  c^T x + sum_s p_s Q_s(x)   s.t.  A x >= b,  x in X
//   Q_s(x) = min { q_s^T y : W_s y >= h_s - T_s x,  y in Y_s }
//
// Equalities are stored as pairs of >= rows so that every constraint block
// has the single form "row >= rhs".

#include <span>
#include <string>
#include <vector>

#include "lagcut/optbase.hpp"
#include "lagcut/sparse.hpp"

namespace lagcut {

struct FirstStage {
  SparseMatrix A;  // rows x n
  std::vector<double> b;
  std::vector<double> c;
  std::vector<VarType> types;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct Scenario {
  double p = 0.0;
  std::vector<double> q;
  SparseMatrix W;  // rows x ny
  std::vector<double> h;
  SparseMatrix T;  // rows x n
  std::vector<VarType> types;
  std::vector<double> lower;
  std::vector<double> upper;

  int num_y() const noexcept { return static_cast<int>(q.size()); }
  int num_rows() const noexcept { return static_cast<int>(h.size()); }
};

struct SipInstance {
  std::string name;
  int n = 0;
  FirstStage first;
  std::vector<Scenario> scenarios;

  int num_scenarios() const noexcept { return static_cast<int>(scenarios.size()); }

  /// Throws DimensionMismatch (message names the scenario), ProbabilitySum or
  /// InvalidArgument.
  void validate() const;

  bool first_stage_pure_binary() const;
  /// Every first-stage and second-stage variable integer with finite bounds.
  bool pure_integer_bounded() const;

  friend bool operator==(const SipInstance&, const SipInstance&);
};

/// First-stage feasible point paired with an epigraph value theta >= Q_s(x).
struct EpigraphPoint {
  std::vector<double> x;
  double theta = 0.0;
};

struct ExtensiveForm {
  MipProgram program;
  /// Column offset of scenario s's y block; x occupies columns [0, n).
  std::vector<int> y_offset;
};

ExtensiveForm build_extensive_form(const SipInstance& inst);

/// Two-stage objective c^T x + sum_s p_s q_s^T y_s of an extensive-form point.
double two_stage_objective(const SipInstance& inst, std::span<const double> point);

/// Second-stage program of scenario s at a fixed x (y columns only).
MipProgram recourse_program(const SipInstance& inst, int s, std::span<const double> x);

/// Q_s(x); kInf when the second stage is infeasible. Throws UnboundedRecourse.
double eval_recourse(const SipInstance& inst, int s, std::span<const double> x);

/// Program over K^s = {(x, y): A x >= b, T_s x + W_s y >= h_s, x in X, y in Y}
/// with objective pi^T x + pi0 q_s^T y. Columns are x followed by y.
MipProgram scenario_joint_program(const SipInstance& inst, int s, std::span<const double> pi,
                                  double pi0);

/// All integer points of the first-stage box satisfying A x >= b.
/// Requires a bounded pure-integer first stage; throws CapExceededError when
/// more than cap points exist.
std::vector<std::vector<double>> enumerate_first_stage(const SipInstance& inst, std::size_t cap);

/// Exact epigraph vertices (x, Q_s(x)) over every feasible first-stage x with
/// finite recourse.
std::vector<EpigraphPoint> brute_force_epigraph(const SipInstance& inst, int s, std::size_t cap);

/// One binary x with c = 1, two equiprobable scenarios
/// min k y s.t. y >= 1 - x, y integer >= 0, with k = 2 and k = 3.
SipInstance make_fixture_t1();

}  // namespace lagcut
