#include "lagcut/benders.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "lagcut/error.hpp"
#include "lagcut/instances.hpp"

namespace lagcut {

const char* to_string(CutFamily family) {
  switch (family) {
    case CutFamily::Benders: return "benders";
    case CutFamily::IntegerLShaped: return "integer-lshaped";
    case CutFamily::Lagrangian: return "lagrangian";
    case CutFamily::StrengthenedBenders: return "strengthened-benders";
    case CutFamily::LagrangianFeasibility: return "lagrangian-feasibility";
  }
  return "unknown";
}

double Cut::lhs(std::span<const double> x, double theta) const {
  double v = coef_theta * theta;
  for (std::size_t j = 0; j < coef_x.size(); ++j) v += coef_x[j] * x[j];
  return v;
}

// ---------------------------------------------------------------- master

MasterModel::MasterModel(const SipInstance& inst, std::vector<double> theta_lower)
    : inst_(&inst), theta_lower_(std::move(theta_lower)) {
  inst.validate();
  if (static_cast<int>(theta_lower_.size()) != inst.num_scenarios()) {
    throw Error(ErrorCode::DimensionMismatch, "master: one theta bound per scenario required");
  }
  for (double t : theta_lower_) {
    if (!std::isfinite(t)) {
      throw Error(ErrorCode::InvalidArgument, "master: theta lower bounds must be finite");
    }
  }
  for (int j = 0; j < inst.n; ++j) {
    lp_.add_column(inst.first.c[j], inst.first.lower[j], inst.first.upper[j],
                   "x" + std::to_string(j));
  }
  for (int s = 0; s < inst.num_scenarios(); ++s) {
    lp_.add_column(inst.scenarios[s].p, theta_lower_[s], kInf, "theta" + std::to_string(s));
  }
  for (int r = 0; r < inst.first.A.rows(); ++r) {
    LinearRow row;
    for (const auto& t : inst.first.A.row(r)) {
      row.index.push_back(t.col);
      row.value.push_back(t.value);
    }
    row.rhs = inst.first.b[r];
    lp_.rows.push_back(std::move(row));
  }
}

bool MasterModel::add_cut(const Cut& cut) {
  if (cut.scenario < 0 || cut.scenario >= num_scenarios() ||
      static_cast<int>(cut.coef_x.size()) != n()) {
    throw Error(ErrorCode::DimensionMismatch, "cut does not match the master dimensions");
  }
  std::vector<double> key;
  key.reserve(cut.coef_x.size() + 2);
  auto round12 = [](double v) { return std::round(v * 1e12) / 1e12; };
  for (double v : cut.coef_x) key.push_back(round12(v));
  key.push_back(round12(cut.coef_theta));
  key.push_back(round12(cut.rhs));
  if (!seen_.insert({cut.scenario, std::move(key)}).second) return false;

  double scale = std::fabs(cut.coef_theta);
  for (double v : cut.coef_x) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) scale = 1.0;
  LinearRow row;
  for (int j = 0; j < n(); ++j) {
    if (cut.coef_x[j] != 0.0) {
      row.index.push_back(j);
      row.value.push_back(cut.coef_x[j] / scale);
    }
  }
  if (cut.coef_theta != 0.0) {
    row.index.push_back(n() + cut.scenario);
    row.value.push_back(cut.coef_theta / scale);
  }
  row.rhs = cut.rhs / scale;
  lp_.rows.push_back(std::move(row));
  cuts_.push_back(cut);
  return true;
}

std::size_t MasterModel::count(CutFamily family) const {
  return static_cast<std::size_t>(
      std::count_if(cuts_.begin(), cuts_.end(), [&](const Cut& c) { return c.family == family; }));
}

MasterSolution MasterModel::unpack(const SolveOutcome& out) const {
  MasterSolution sol;
  sol.status = out.status;
  sol.iterations = out.iterations;
  if (out.status != SolveStatus::Optimal) return sol;
  sol.x.assign(out.primal.begin(), out.primal.begin() + n());
  sol.theta.assign(out.primal.begin() + n(), out.primal.end());
  sol.lower_bound = out.objective;
  sol.basis = out.basis;
  return sol;
}

MasterSolution MasterModel::solve(MasterMode mode) {
  SolveOutcome out;
  if (mode == MasterMode::LpRelaxed) {
    LpOptions opts;
    opts.warm_start = last_basis_.empty() ? nullptr : &last_basis_;
    out = solve_lp(lp_, opts);
  } else {
    MipProgram mip;
    mip.lp = lp_;
    mip.types = inst_->first.types;
    mip.types.resize(lp_.objective.size(), VarType::Continuous);
    out = solve_mip(mip);
  }
  if (out.status == SolveStatus::Infeasible) {
    throw Error(ErrorCode::FirstStageInfeasible, "master problem is infeasible");
  }
  if (out.status == SolveStatus::Unbounded) {
    throw Error(ErrorCode::InvalidArgument, "master problem is unbounded");
  }
  if (out.status != SolveStatus::Optimal) {
    throw Error(ErrorCode::NumericalFailure, "master solve hit its limits");
  }
  if (mode == MasterMode::LpRelaxed) last_basis_ = out.basis;
  return unpack(out);
}

MasterSolution MasterModel::solve_node(const std::vector<double>& lower,
                                       const std::vector<double>& upper, const Basis* warm) const {
  LinearProgram lp = lp_;
  std::copy(lower.begin(), lower.end(), lp.lower.begin());
  std::copy(upper.begin(), upper.end(), lp.upper.begin());
  LpOptions opts;
  opts.warm_start = warm;
  return unpack(solve_lp(lp, opts));
}

double MasterModel::objective(std::span<const double> x, std::span<const double> theta) const {
  double v = 0.0;
  for (int j = 0; j < n(); ++j) v += inst_->first.c[j] * x[j];
  for (int s = 0; s < num_scenarios(); ++s) v += inst_->scenarios[s].p * theta[s];
  return v;
}

void MasterModel::export_cuts_csv(std::ostream& out) const {
  out << "scenario,family,coef_theta,rhs,violation_at_birth\n";
  for (const auto& c : cuts_) {
    out << c.scenario << ',' << to_string(c.family) << ',' << format_double(c.coef_theta) << ','
        << format_double(c.rhs) << ',' << format_double(c.violation_at_birth) << '\n';
  }
}

// ---------------------------------------------------------------- cuts

BendersCut benders_cut_at(const SipInstance& inst, int s, std::span<const double> x_hat) {
  const auto& sc = inst.scenarios.at(static_cast<std::size_t>(s));
  const auto rec = recourse_program(inst, s, x_hat);
  const auto out = solve_lp(rec.lp);
  if (out.status == SolveStatus::Infeasible) {
    throw Error(ErrorCode::ScenarioInfeasible,
                "scenario " + std::to_string(s) + ": LP relaxation of the recourse is infeasible");
  }
  if (out.status == SolveStatus::Unbounded) {
    throw Error(ErrorCode::UnboundedRecourse,
                "scenario " + std::to_string(s) + ": LP relaxation of the recourse is unbounded");
  }
  if (out.status != SolveStatus::Optimal) {
    throw Error(ErrorCode::NumericalFailure, "scenario LP solve failed");
  }
  BendersCut bc;
  bc.lp_value = out.objective;
  bc.mu = out.duals;
  for (double& m : bc.mu) m = std::max(m, 0.0);

  // q^T y = mu^T W y + d^T y >= mu^T (h - T x) + sum_j min(d_j l_j, d_j u_j)
  auto d = sc.W.multiply_transpose(bc.mu);
  double rhs = 0.0;
  for (int r = 0; r < sc.num_rows(); ++r) rhs += bc.mu[r] * sc.h[r];
  for (int j = 0; j < sc.num_y(); ++j) {
    const double dj = sc.q[j] - d[j];
    const double bound = dj > 0.0 ? sc.lower[j] : sc.upper[j];
    if (std::isfinite(bound)) rhs += dj * bound;
  }
  bc.cut.family = CutFamily::Benders;
  bc.cut.scenario = s;
  bc.cut.coef_x = sc.T.multiply_transpose(bc.mu);
  bc.cut.coef_theta = 1.0;
  bc.cut.rhs = rhs;
  return bc;
}

std::optional<BendersCut> separate_benders(const SipInstance& inst, int s,
                                           std::span<const double> x_hat, double theta_hat) {
  auto bc = benders_cut_at(inst, s, x_hat);
  const double viol = bc.cut.violation(x_hat, theta_hat);
  if (viol < benders_threshold(theta_hat)) return std::nullopt;
  bc.cut.violation_at_birth = viol;
  return bc;
}

std::optional<Cut> separate_integer_lshaped(const SipInstance& inst, int s,
                                            std::span<const double> x_hat, double theta_hat,
                                            double lower_bound, std::optional<double> q_value) {
  if (!inst.first_stage_pure_binary()) {
    throw Error(ErrorCode::UnsupportedCut, "integer L-shaped cuts need a pure binary first stage");
  }
  std::vector<double> x(x_hat.begin(), x_hat.end());
  for (double& v : x) {
    if (std::fabs(v - std::round(v)) > kIntegralityTol) {
      throw Error(ErrorCode::InvalidArgument, "integer L-shaped cut requested at fractional x");
    }
    v = std::round(v);
  }
  const double q = q_value ? *q_value : eval_recourse(inst, s, x);
  if (!std::isfinite(q)) {
    throw Error(ErrorCode::ScenarioInfeasible,
                "scenario " + std::to_string(s) + ": recourse infeasible at candidate");
  }
  const double gap = std::max(q - lower_bound, 0.0);
  Cut cut;
  cut.family = CutFamily::IntegerLShaped;
  cut.scenario = s;
  cut.coef_theta = 1.0;
  cut.coef_x.resize(x.size());
  double ones = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] == 1.0) {
      cut.coef_x[j] = -gap;
      ones += 1.0;
    } else {
      cut.coef_x[j] = gap;
    }
  }
  cut.rhs = q - gap * ones;
  const double viol = cut.violation(x, theta_hat);
  if (viol <= fine_threshold(theta_hat)) return std::nullopt;
  cut.violation_at_birth = viol;
  return cut;
}

double compute_theta_lower_bound(const SipInstance& inst, int s) {
  const std::vector<double> zero(inst.n, 0.0);
  const auto joint = scenario_joint_program(inst, s, zero, 1.0);
  const auto out = solve_lp(joint.lp);
  switch (out.status) {
    case SolveStatus::Optimal: return out.objective;
    case SolveStatus::Unbounded:
      throw Error(ErrorCode::UnboundedRecourse,
                  "scenario " + std::to_string(s) + ": recourse cost unbounded below");
    case SolveStatus::Infeasible:
      throw Error(ErrorCode::ScenarioInfeasible,
                  "scenario " + std::to_string(s) + ": relaxed joint set is empty");
    case SolveStatus::LimitReached: break;
  }
  throw Error(ErrorCode::NumericalFailure, "theta bound LP failed");
}

MasterModel initialize_master(const SipInstance& inst) {
  inst.validate();
  LinearProgram first;
  for (int j = 0; j < inst.n; ++j) first.add_column(0.0, inst.first.lower[j], inst.first.upper[j]);
  for (int r = 0; r < inst.first.A.rows(); ++r) {
    LinearRow row;
    for (const auto& t : inst.first.A.row(r)) {
      row.index.push_back(t.col);
      row.value.push_back(t.value);
    }
    row.rhs = inst.first.b[r];
    first.rows.push_back(std::move(row));
  }
  const auto out = solve_lp(first);
  if (out.status != SolveStatus::Optimal) {
    throw Error(ErrorCode::FirstStageInfeasible, "first-stage constraints A x >= b are infeasible");
  }
  std::vector<double> lower(inst.num_scenarios());
  for (int s = 0; s < inst.num_scenarios(); ++s) lower[s] = compute_theta_lower_bound(inst, s);
  MasterModel master(inst, lower);
  for (int s = 0; s < inst.num_scenarios(); ++s) {
    auto bc = benders_cut_at(inst, s, out.primal);
    bc.cut.violation_at_birth = bc.cut.violation(out.primal, lower[s]);
    master.add_cut(bc.cut);
  }
  return master;
}

}  // namespace lagcut
