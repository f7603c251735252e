#pragma once

// Nonanticipative Lagrangian dual
//   z(lambda) = sum_s p_s min { (c + lambda^s)^T x + q_s^T y : (x, y) in K^s }
// with sum_s p_s lambda^s = 0, and its primal characterization over the
// convex hulls of the scenario sets.

#include <vector>

#include "lagcut/model.hpp"

namespace lagcut {

struct Multipliers {
  std::vector<std::vector<double>> lambda;  // one length-n vector per scenario

  static Multipliers zero(const SipInstance& inst);
  /// Throws InvalidArgument unless sum_s p_s lambda^s = 0 within 1e-9.
  void validate(const SipInstance& inst) const;
};

struct DualValue {
  double value = 0.0;
  std::vector<double> scenario_values;   // inner minima, unweighted
  std::vector<std::vector<double>> x;    // per-scenario argmin x^s
};

DualValue eval_dual(const SipInstance& inst, const Multipliers& lam, int workers = 1);

struct DualResult {
  double lower = -kInf;  // best z(lambda) found
  double upper = kInf;   // cutting-plane model maximum, a valid bound on z_D
  bool limit_reached = false;
  int iterations = 0;
  Multipliers best;

  double midpoint() const { return 0.5 * (lower + upper); }
  double gap() const { return upper - lower; }
};

/// Proximal cutting-plane ascent; stops when upper - lower <= tol (1 + |lower|)
/// or after iter_cap oracle rounds (limit_reached set).
DualResult maximize_dual(const SipInstance& inst, double tol = 1e-7, int iter_cap = 500,
                         int workers = 1);

/// min sum_s p_s (c^T x^s + q_s^T y^s) with (x^s, y^s) in conv(K^s) and all
/// x^s equal, written over the enumerated points (x, Q_s(x)) of each
/// scenario. Throws CapExceededError when a scenario has more than cap
/// first-stage points.
double primal_characterization_check(const SipInstance& inst, std::size_t cap = 4096);

}  // namespace lagcut
