#include "lagcut/dualdecomp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "lagcut/error.hpp"
#include "parallel.hpp"

namespace lagcut {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double v = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) v += a[i] * b[i];
  return v;
}

SolveOutcome solve_scenario(const SipInstance& inst, int s, std::span<const double> lambda) {
  std::vector<double> cost(inst.first.c);
  for (int i = 0; i < inst.n; ++i) cost[i] += lambda[i];
  auto out = solve_mip(scenario_joint_program(inst, s, cost, 1.0));
  if (out.status == SolveStatus::Infeasible) {
    throw Error(ErrorCode::ScenarioInfeasible,
                "scenario " + std::to_string(s) + ": K^s is empty (assumption violated)");
  }
  if (out.status != SolveStatus::Optimal) {
    throw Error(ErrorCode::NumericalFailure,
                "scenario " + std::to_string(s) + ": dual subproblem ended with status " +
                    to_string(out.status));
  }
  return out;
}

// Points (x, c^T x + q^T y) of one scenario set, keyed by x.
class PointSet {
 public:
  void add(std::span<const double> x, double value) {
    std::vector<long long> key(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) key[j] = std::llround(x[j] * 1e9);
    auto [it, fresh] = index_.emplace(std::move(key), points_.size());
    if (fresh) {
      points_.push_back({std::vector<double>(x.begin(), x.end()), value});
    } else {
      points_[it->second].theta = std::min(points_[it->second].theta, value);
    }
  }
  const std::vector<EpigraphPoint>& points() const { return points_; }

 private:
  std::vector<EpigraphPoint> points_;
  std::map<std::vector<long long>, std::size_t> index_;
};

void absorb(const SipInstance& inst, int s, const SolveOutcome& out, PointSet& set) {
  const auto& q = inst.scenarios[s].q;
  for (const auto& e : out.incumbent_pool) {
    std::span<const double> x(e.x.data(), static_cast<std::size_t>(inst.n));
    double v = dot(inst.first.c, x);
    for (std::size_t j = 0; j < q.size(); ++j) v += q[j] * e.x[inst.n + j];
    set.add(x, v);
  }
}

}  // namespace

Multipliers Multipliers::zero(const SipInstance& inst) {
  Multipliers m;
  m.lambda.assign(inst.num_scenarios(), std::vector<double>(inst.n, 0.0));
  return m;
}

void Multipliers::validate(const SipInstance& inst) const {
  if (static_cast<int>(lambda.size()) != inst.num_scenarios()) {
    throw Error(ErrorCode::DimensionMismatch, "one multiplier vector per scenario expected");
  }
  for (int i = 0; i < inst.n; ++i) {
    double sum = 0.0;
    for (int s = 0; s < inst.num_scenarios(); ++s) {
      if (static_cast<int>(lambda[s].size()) != inst.n) {
        throw Error(ErrorCode::DimensionMismatch,
                    "multiplier of scenario " + std::to_string(s) + " has the wrong length");
      }
      sum += inst.scenarios[s].p * lambda[s][i];
    }
    if (std::fabs(sum) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument,
                  "multipliers violate sum_s p_s lambda^s = 0 at component " + std::to_string(i));
    }
  }
}

DualValue eval_dual(const SipInstance& inst, const Multipliers& lam, int workers) {
  lam.validate(inst);
  const int S = inst.num_scenarios();
  DualValue r;
  r.scenario_values.resize(S);
  r.x.resize(S);
  detail::parallel_for(S, workers, [&](int s) {
    const auto out = solve_scenario(inst, s, lam.lambda[s]);
    r.scenario_values[s] = out.objective;
    r.x[s].assign(out.primal.begin(), out.primal.begin() + inst.n);
  });
  for (int s = 0; s < S; ++s) r.value += inst.scenarios[s].p * r.scenario_values[s];
  return r;
}

DualResult maximize_dual(const SipInstance& inst, double tol, int iter_cap, int workers) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  inst.validate();
  const int n = inst.n;
  const int S = inst.num_scenarios();
  std::vector<PointSet> sets(S);

  auto evaluate = [&](const Multipliers& m) {
    std::vector<SolveOutcome> outs(S);
    detail::parallel_for(S, workers, [&](int s) { outs[s] = solve_scenario(inst, s, m.lambda[s]); });
    double value = 0.0;
    for (int s = 0; s < S; ++s) {
      value += inst.scenarios[s].p * outs[s].objective;
      absorb(inst, s, outs[s], sets[s]);
    }
    return std::make_pair(value, std::move(outs));
  };

  DualResult res;
  res.best = Multipliers::zero(inst);
  auto [z0, outs0] = evaluate(res.best);
  res.lower = z0;

  // A common first-stage point in every scenario set keeps the model bounded.
  for (int t = 0; t < S; ++t) {
    std::span<const double> xbar(outs0[t].primal.data(), static_cast<std::size_t>(n));
    std::vector<std::pair<int, double>> found;
    for (int s = 0; s < S; ++s) {
      const double qv = eval_recourse(inst, s, xbar);
      if (!std::isfinite(qv)) break;
      found.emplace_back(s, qv);
    }
    if (static_cast<int>(found.size()) < S) continue;
    for (const auto& [s, qv] : found) sets[s].add(xbar, dot(inst.first.c, xbar) + qv);
    break;
  }

  // Columns: lambda^s_i at s*n+i, eta_s at S*n+s.
  auto build = [&](const Multipliers* center, double radius) {
    LinearProgram lp;
    lp.maximize = true;
    for (int s = 0; s < S; ++s) {
      for (int i = 0; i < n; ++i) {
        if (center != nullptr) {
          const double c = center->lambda[s][i];
          lp.add_column(0.0, c - radius, c + radius);
        } else {
          lp.add_column(0.0, -kInf, kInf);
        }
      }
    }
    for (int s = 0; s < S; ++s) lp.add_column(inst.scenarios[s].p, -kInf, kInf);
    for (int i = 0; i < n; ++i) {
      std::vector<int> idx;
      std::vector<double> val;
      for (int s = 0; s < S; ++s) {
        idx.push_back(s * n + i);
        val.push_back(inst.scenarios[s].p);
      }
      lp.add_row(std::move(idx), std::move(val), Sense::Equal, 0.0);
    }
    for (int s = 0; s < S; ++s) {
      for (const auto& pt : sets[s].points()) {
        LinearRow row;
        row.sense = Sense::LessEqual;
        row.rhs = pt.theta;
        row.index.push_back(S * n + s);
        row.value.push_back(1.0);
        for (int i = 0; i < n; ++i) {
          if (pt.x[i] == 0.0) continue;
          row.index.push_back(s * n + i);
          row.value.push_back(-pt.x[i]);
        }
        lp.rows.push_back(std::move(row));
      }
    }
    return lp;
  };
  auto extract = [&](const SolveOutcome& out) {
    Multipliers m = Multipliers::zero(inst);
    for (int s = 0; s < S; ++s) {
      for (int i = 0; i < n; ++i) m.lambda[s][i] = out.primal[s * n + i];
    }
    // Re-project onto sum_s p_s lambda^s = 0 to remove LP round-off.
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int s = 0; s < S; ++s) sum += inst.scenarios[s].p * m.lambda[s][i];
      for (int s = 0; s < S; ++s) m.lambda[s][i] -= sum;
    }
    return m;
  };

  double cmax = 0.0;
  for (double c : inst.first.c) cmax = std::max(cmax, std::fabs(c));
  double radius = cmax > 0.0 ? 10.0 * cmax : 10.0;
  const auto close = [&] { return res.upper - res.lower <= tol * (1.0 + std::fabs(res.lower)); };
  while (true) {
    const auto free_model = solve_lp(build(nullptr, 0.0));
    if (free_model.status == SolveStatus::Optimal) {
      res.upper = std::max(free_model.objective, res.lower);
    } else if (free_model.status == SolveStatus::Unbounded) {
      res.upper = kInf;
    } else {
      throw Error(ErrorCode::NumericalFailure, "dual model LP failed");
    }
    if (close()) break;
    if (res.iterations >= iter_cap) {
      res.limit_reached = true;
      break;
    }
    ++res.iterations;
    const auto trust = solve_lp(build(&res.best, radius));
    if (trust.status != SolveStatus::Optimal) {
      throw Error(ErrorCode::NumericalFailure, "dual trust-region LP failed");
    }
    const auto cand = extract(trust);
    const double predicted = trust.objective;
    const double value = evaluate(cand).first;
    if (value > res.lower && value - res.lower >= 0.1 * (predicted - res.lower)) {
      res.lower = value;
      res.best = cand;
    } else {
      radius = std::max(radius * 0.5, 1e-9);
    }
  }
  return res;
}

double primal_characterization_check(const SipInstance& inst, std::size_t cap) {
  inst.validate();
  const int n = inst.n;
  const int S = inst.num_scenarios();
  LinearProgram lp;
  for (int i = 0; i < n; ++i) lp.add_column(0.0, -kInf, kInf);
  for (int s = 0; s < S; ++s) {
    const auto pts = brute_force_epigraph(inst, s, cap);
    if (pts.empty()) {
      throw Error(ErrorCode::ScenarioInfeasible,
                  "scenario " + std::to_string(s) + " has no feasible point");
    }
    const double p = inst.scenarios[s].p;
    std::vector<int> convex_idx;
    std::vector<std::vector<int>> link_idx(n);
    std::vector<std::vector<double>> link_val(n);
    for (const auto& pt : pts) {
      const int col = lp.add_column(p * (dot(inst.first.c, pt.x) + pt.theta), 0.0, kInf);
      convex_idx.push_back(col);
      for (int i = 0; i < n; ++i) {
        if (pt.x[i] == 0.0) continue;
        link_idx[i].push_back(col);
        link_val[i].push_back(pt.x[i]);
      }
    }
    lp.add_row(convex_idx, std::vector<double>(convex_idx.size(), 1.0), Sense::Equal, 1.0);
    for (int i = 0; i < n; ++i) {
      link_idx[i].push_back(i);
      link_val[i].push_back(-1.0);
      lp.add_row(std::move(link_idx[i]), std::move(link_val[i]), Sense::Equal, 0.0);
    }
  }
  const auto out = solve_lp(lp);
  if (out.status != SolveStatus::Optimal) {
    throw Error(ErrorCode::NumericalFailure,
                std::string("primal characterization LP ended with status ") + to_string(out.status));
  }
  return out.objective;
}

}  // namespace lagcut
