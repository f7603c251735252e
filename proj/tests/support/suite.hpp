#pragma once

// Fixed tiny-instance suites shared by the unit and acceptance tests, plus
// extensive-form reference values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lagcut/error.hpp"
#include "lagcut/instances.hpp"
#include "lagcut/model.hpp"
#include "lagcut/optbase.hpp"

namespace lagcut::suite {

/// Ten pure-integer instances: n = 4..6 binaries, 2..4 scenarios, 3..6
/// second-stage integers. Parameters depend on the index only.
inline std::vector<SipInstance> tiny_suite() {
  std::vector<SipInstance> out;
  for (int k = 0; k < 10; ++k) {
    TinyParams p;
    p.seed = static_cast<std::uint64_t>(k);
    p.n = 4 + k % 3;
    p.n_scenarios = 2 + k % 3;
    p.ny = 3 + k % 4;
    out.push_back(gen_tiny(p));
  }
  return out;
}

/// Five single-scenario instances.
inline std::vector<SipInstance> single_scenario_suite() {
  std::vector<SipInstance> out;
  for (int k = 0; k < 5; ++k) {
    TinyParams p;
    p.seed = 100 + static_cast<std::uint64_t>(k);
    p.n = 4 + k % 2;
    p.n_scenarios = 1;
    p.ny = 3 + k % 3;
    out.push_back(gen_tiny(p));
  }
  return out;
}

inline double extensive_lp(const SipInstance& inst) {
  const auto out = solve_lp(build_extensive_form(inst).program.lp);
  if (out.status != SolveStatus::Optimal) throw Error(ErrorCode::NumericalFailure, "extensive LP");
  return out.objective;
}

inline double extensive_ip(const SipInstance& inst) {
  const auto out = solve_mip(build_extensive_form(inst).program);
  if (out.status != SolveStatus::Optimal) throw Error(ErrorCode::NumericalFailure, "extensive MIP");
  return out.objective;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) / scale;
}

}  // namespace lagcut::suite
