#include "lagcut/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lagcut/error.hpp"

namespace lagcut {

namespace {

void check_bounds(const std::vector<VarType>& types, const std::vector<double>& lo,
                  const std::vector<double>& hi, const std::string& where) {
  for (std::size_t j = 0; j < types.size(); ++j) {
    if (lo[j] > hi[j]) {
      throw Error(ErrorCode::InvalidArgument,
                  where + ": variable " + std::to_string(j) + " has empty bounds");
    }
    if (types[j] == VarType::Binary && (lo[j] < 0.0 || hi[j] > 1.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  where + ": binary variable " + std::to_string(j) + " must lie in [0,1]");
    }
  }
}

void add_sparse_rows(LinearProgram& lp, const SparseMatrix& left, int left_offset,
                     const SparseMatrix* right, int right_offset, const std::vector<double>& rhs) {
  for (int r = 0; r < static_cast<int>(rhs.size()); ++r) {
    LinearRow row;
    for (const auto& t : left.row(r)) {
      row.index.push_back(left_offset + t.col);
      row.value.push_back(t.value);
    }
    if (right != nullptr) {
      for (const auto& t : right->row(r)) {
        row.index.push_back(right_offset + t.col);
        row.value.push_back(t.value);
      }
    }
    row.sense = Sense::GreaterEqual;
    row.rhs = rhs[r];
    lp.rows.push_back(std::move(row));
  }
}

void add_first_stage(MipProgram& mip, const SipInstance& inst, std::span<const double> cost) {
  for (int j = 0; j < inst.n; ++j) {
    mip.add_column(cost[j], inst.first.lower[j], inst.first.upper[j], inst.first.types[j],
                   "x" + std::to_string(j));
  }
  add_sparse_rows(mip.lp, inst.first.A, 0, nullptr, 0, inst.first.b);
}

}  // namespace

void SipInstance::validate() const {
  if (n < 0) throw Error(ErrorCode::DimensionMismatch, "negative first-stage dimension");
  const auto& f = first;
  if (static_cast<int>(f.c.size()) != n || static_cast<int>(f.types.size()) != n ||
      static_cast<int>(f.lower.size()) != n || static_cast<int>(f.upper.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "first stage: vector lengths differ from n");
  }
  if (f.A.cols() != n || f.A.rows() != static_cast<int>(f.b.size())) {
    throw Error(ErrorCode::DimensionMismatch, "first stage: A does not match b and n");
  }
  check_bounds(f.types, f.lower, f.upper, "first stage");
  if (scenarios.empty()) throw Error(ErrorCode::InvalidArgument, "instance has no scenarios");
  double total = 0.0;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const auto& sc = scenarios[s];
    const std::string where = "scenario " + std::to_string(s);
    const int ny = sc.num_y();
    const int m = sc.num_rows();
    if (static_cast<int>(sc.types.size()) != ny || static_cast<int>(sc.lower.size()) != ny ||
        static_cast<int>(sc.upper.size()) != ny) {
      throw Error(ErrorCode::DimensionMismatch, where + ": y vector lengths differ from q");
    }
    if (sc.W.rows() != m || sc.W.cols() != ny) {
      throw Error(ErrorCode::DimensionMismatch, where + ": W is not rows(h) x len(q)");
    }
    if (sc.T.rows() != m || sc.T.cols() != n) {
      throw Error(ErrorCode::DimensionMismatch, where + ": T is not rows(h) x n");
    }
    if (!(sc.p > 0.0 && sc.p <= 1.0)) {
      throw Error(ErrorCode::ProbabilitySum, where + ": probability outside (0,1]");
    }
    check_bounds(sc.types, sc.lower, sc.upper, where);
    total += sc.p;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::ProbabilitySum,
                "scenario probabilities sum to " + std::to_string(total));
  }
}

bool SipInstance::first_stage_pure_binary() const {
  for (int j = 0; j < n; ++j) {
    const bool binary = first.types[j] == VarType::Binary ||
                        (first.types[j] == VarType::Integer && first.lower[j] >= 0.0 &&
                         first.upper[j] <= 1.0);
    if (!binary) return false;
  }
  return true;
}

bool SipInstance::pure_integer_bounded() const {
  auto ok = [](const std::vector<VarType>& t, const std::vector<double>& lo,
               const std::vector<double>& hi) {
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (t[j] == VarType::Continuous || !std::isfinite(lo[j]) || !std::isfinite(hi[j])) {
        return false;
      }
    }
    return true;
  };
  if (!ok(first.types, first.lower, first.upper)) return false;
  for (const auto& sc : scenarios) {
    if (!ok(sc.types, sc.lower, sc.upper)) return false;
  }
  return true;
}

bool operator==(const SipInstance& a, const SipInstance& b) {
  auto same_first = [](const FirstStage& x, const FirstStage& y) {
    return x.A == y.A && x.b == y.b && x.c == y.c && x.types == y.types && x.lower == y.lower &&
           x.upper == y.upper;
  };
  if (a.name != b.name || a.n != b.n || !same_first(a.first, b.first) ||
      a.scenarios.size() != b.scenarios.size()) {
    return false;
  }
  for (std::size_t s = 0; s < a.scenarios.size(); ++s) {
    const auto& x = a.scenarios[s];
    const auto& y = b.scenarios[s];
    if (x.p != y.p || x.q != y.q || !(x.W == y.W) || x.h != y.h || !(x.T == y.T) ||
        x.types != y.types || x.lower != y.lower || x.upper != y.upper) {
      return false;
    }
  }
  return true;
}

ExtensiveForm build_extensive_form(const SipInstance& inst) {
  inst.validate();
  ExtensiveForm ef;
  add_first_stage(ef.program, inst, inst.first.c);
  for (int s = 0; s < inst.num_scenarios(); ++s) {
    const auto& sc = inst.scenarios[s];
    const int offset = ef.program.lp.num_cols();
    ef.y_offset.push_back(offset);
    for (int j = 0; j < sc.num_y(); ++j) {
      ef.program.add_column(sc.p * sc.q[j], sc.lower[j], sc.upper[j], sc.types[j],
                            "y" + std::to_string(s) + "_" + std::to_string(j));
    }
    add_sparse_rows(ef.program.lp, sc.T, 0, &sc.W, offset, sc.h);
  }
  // Fixing x first splits the remaining tree into independent scenarios.
  ef.program.priority.assign(static_cast<std::size_t>(ef.program.lp.num_cols()), 0);
  std::fill_n(ef.program.priority.begin(), inst.n, 1);
  return ef;
}

double two_stage_objective(const SipInstance& inst, std::span<const double> point) {
  double total = 0.0;
  for (int j = 0; j < inst.n; ++j) total += inst.first.c[j] * point[j];
  int offset = inst.n;
  for (const auto& sc : inst.scenarios) {
    double rec = 0.0;
    for (int j = 0; j < sc.num_y(); ++j) rec += sc.q[j] * point[offset + j];
    total += sc.p * rec;
    offset += sc.num_y();
  }
  return total;
}

MipProgram recourse_program(const SipInstance& inst, int s, std::span<const double> x) {
  const auto& sc = inst.scenarios.at(static_cast<std::size_t>(s));
  if (static_cast<int>(x.size()) != inst.n) {
    throw Error(ErrorCode::DimensionMismatch, "recourse: x has wrong length");
  }
  MipProgram mip;
  for (int j = 0; j < sc.num_y(); ++j) {
    mip.add_column(sc.q[j], sc.lower[j], sc.upper[j], sc.types[j]);
  }
  const auto tx = sc.T.multiply(x);
  std::vector<double> rhs(sc.h.size());
  for (std::size_t r = 0; r < rhs.size(); ++r) rhs[r] = sc.h[r] - tx[r];
  add_sparse_rows(mip.lp, sc.W, 0, nullptr, 0, rhs);
  return mip;
}

double eval_recourse(const SipInstance& inst, int s, std::span<const double> x) {
  const auto mip = recourse_program(inst, s, x);
  const auto out = solve_mip(mip);
  switch (out.status) {
    case SolveStatus::Optimal: return out.objective;
    case SolveStatus::Infeasible: return kInf;
    case SolveStatus::Unbounded:
      throw Error(ErrorCode::UnboundedRecourse,
                  "scenario " + std::to_string(s) + ": recourse unbounded below");
    case SolveStatus::LimitReached: break;
  }
  throw Error(ErrorCode::NumericalFailure,
              "scenario " + std::to_string(s) + ": recourse solve hit its limits");
}

MipProgram scenario_joint_program(const SipInstance& inst, int s, std::span<const double> pi,
                                  double pi0) {
  const auto& sc = inst.scenarios.at(static_cast<std::size_t>(s));
  if (static_cast<int>(pi.size()) != inst.n) {
    throw Error(ErrorCode::DimensionMismatch, "joint program: pi has wrong length");
  }
  MipProgram mip;
  add_first_stage(mip, inst, pi);
  for (int j = 0; j < sc.num_y(); ++j) {
    mip.add_column(pi0 * sc.q[j], sc.lower[j], sc.upper[j], sc.types[j]);
  }
  add_sparse_rows(mip.lp, sc.T, 0, &sc.W, inst.n, sc.h);
  return mip;
}

std::vector<std::vector<double>> enumerate_first_stage(const SipInstance& inst,
                                                       std::size_t cap) {
  std::vector<double> lo(inst.n), hi(inst.n);
  for (int j = 0; j < inst.n; ++j) {
    if (inst.first.types[j] == VarType::Continuous || !std::isfinite(inst.first.lower[j]) ||
        !std::isfinite(inst.first.upper[j])) {
      throw Error(ErrorCode::InvalidArgument,
                  "enumeration needs a bounded pure-integer first stage");
    }
    lo[j] = std::ceil(inst.first.lower[j] - kIntegralityTol);
    hi[j] = std::floor(inst.first.upper[j] + kIntegralityTol);
    if (lo[j] > hi[j]) return {};
  }
  std::vector<std::vector<double>> out;
  std::vector<double> x = lo;
  while (true) {
    const auto ax = inst.first.A.multiply(x);
    bool feasible = true;
    for (std::size_t r = 0; r < ax.size() && feasible; ++r) {
      feasible = ax[r] >= inst.first.b[r] - kFeasibilityTol;
    }
    if (feasible) {
      if (out.size() == cap) throw CapExceededError(cap + 1, cap);
      out.push_back(x);
    }
    // Odometer step, last coordinate fastest.
    int j = inst.n - 1;
    while (j >= 0 && x[j] >= hi[j]) {
      x[j] = lo[j];
      --j;
    }
    if (j < 0) break;
    x[j] += 1.0;
  }
  return out;
}

std::vector<EpigraphPoint> brute_force_epigraph(const SipInstance& inst, int s,
                                                std::size_t cap) {
  std::vector<EpigraphPoint> out;
  for (auto& x : enumerate_first_stage(inst, cap)) {
    const double q = eval_recourse(inst, s, x);
    if (q == kInf) continue;
    out.push_back({std::move(x), q});
  }
  return out;
}

SipInstance make_fixture_t1() {
  SipInstance inst;
  inst.name = "t1";
  inst.n = 1;
  inst.first.A = SparseMatrix(0, 1);
  inst.first.c = {1.0};
  inst.first.types = {VarType::Binary};
  inst.first.lower = {0.0};
  inst.first.upper = {1.0};
  for (double k : {2.0, 3.0}) {
    Scenario sc;
    sc.p = 0.5;
    sc.q = {k};
    sc.W = SparseMatrix(1, 1, {{0, 0, 1.0}});
    sc.T = SparseMatrix(1, 1, {{0, 0, 1.0}});
    sc.h = {1.0};
    sc.types = {VarType::Integer};
    sc.lower = {0.0};
    sc.upper = {kInf};
    inst.scenarios.push_back(std::move(sc));
  }
  return inst;
}

}  // namespace lagcut
