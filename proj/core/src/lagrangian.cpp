#include "lagcut/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <string>

#include "lagcut/error.hpp"
#include "lagcut/instances.hpp"

namespace lagcut {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double v = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) v += a[i] * b[i];
  return v;
}

}  // namespace

// ---------------------------------------------------------------- pool

bool EpigraphPool::add(std::span<const double> z, double theta) {
  std::vector<long long> key(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) key[j] = std::llround(z[j] * 1e9);
  auto it = index_.find(key);
  if (it != index_.end()) {
    auto& pt = points_[it->second];
    if (theta < pt.theta) {
      pt.theta = theta;
      return true;
    }
    return false;
  }
  index_.emplace(std::move(key), points_.size());
  points_.push_back({std::vector<double>(z.begin(), z.end()), theta});
  return true;
}

namespace {

void absorb_incumbents(const SipInstance& inst, int s, const SolveOutcome& out, bool reevaluate,
                       EpigraphPool& pool) {
  const auto& q = inst.scenarios[s].q;
  for (const auto& entry : out.incumbent_pool) {
    std::span<const double> z(entry.x.data(), static_cast<std::size_t>(inst.n));
    double theta = 0.0;
    if (reevaluate) {
      theta = eval_recourse(inst, s, z);
      if (!std::isfinite(theta)) continue;
    } else {
      for (std::size_t j = 0; j < q.size(); ++j) theta += q[j] * entry.x[inst.n + j];
    }
    pool.add(z, theta);
  }
}

SolveOutcome solve_joint(const SipInstance& inst, int s, std::span<const double> pi, double pi0) {
  const auto mip = scenario_joint_program(inst, s, pi, pi0);
  auto out = solve_mip(mip);
  if (out.status == SolveStatus::Infeasible) {
    throw Error(ErrorCode::ScenarioInfeasible,
                "scenario " + std::to_string(s) + ": K^s is empty (assumption violated)");
  }
  if (out.status == SolveStatus::Unbounded) {
    throw Error(ErrorCode::UnboundedRecourse,
                "scenario " + std::to_string(s) + ": scenario MIP is unbounded");
  }
  if (out.status != SolveStatus::Optimal) {
    throw Error(ErrorCode::NumericalFailure,
                "scenario " + std::to_string(s) + ": scenario MIP hit its limits");
  }
  return out;
}

}  // namespace

EpigraphPool init_epigraph_pool(const SipInstance& inst, int s) {
  EpigraphPool pool;
  const auto out = solve_joint(inst, s, inst.first.c, 1.0);
  absorb_incumbents(inst, s, out, false, pool);
  return pool;
}

QbarValue eval_qbar(const SipInstance& inst, int s, std::span<const double> pi, double pi0,
                    EpigraphPool* pool) {
  if (pi0 < 0.0) throw Error(ErrorCode::InvalidArgument, "eval_qbar: pi0 must be >= 0");
  const auto out = solve_joint(inst, s, pi, pi0);
  QbarValue r;
  r.value = out.objective;
  r.x.assign(out.primal.begin(), out.primal.begin() + inst.n);
  const auto& q = inst.scenarios[s].q;
  for (std::size_t j = 0; j < q.size(); ++j) r.recourse_cost += q[j] * out.primal[inst.n + j];
  if (pool != nullptr) absorb_incumbents(inst, s, out, pi0 < 1e-4, *pool);
  return r;
}

double eval_qstar_model(const EpigraphPool& pool, std::span<const double> pi, double pi0) {
  if (pool.empty()) throw Error(ErrorCode::NotInitialized, "epigraph pool is empty");
  double best = kInf;
  for (const auto& pt : pool.points()) best = std::min(best, dot(pi, pt.x) + pi0 * pt.theta);
  return best;
}

// ---------------------------------------------------------------- normalization

const char* to_string(NormKind kind) {
  switch (kind) {
    case NormKind::ExactBall: return "exact-ball";
    case NormKind::SpanPiNorm: return "span-pi-norm";
    case NormKind::SpanLambdaNorm: return "span-lambda-norm";
  }
  return "unknown";
}

NormalizationSpec build_normalization(NormKind kind,
                                      const std::vector<std::vector<double>>& recent_benders,
                                      int K, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  NormalizationSpec spec;
  spec.kind = kind;
  spec.alpha = alpha;
  if (kind == NormKind::ExactBall) return spec;
  std::set<std::vector<double>> seen;
  for (auto it = recent_benders.rbegin(); it != recent_benders.rend(); ++it) {
    if (static_cast<int>(spec.basis.size()) >= K) break;
    if (seen.insert(*it).second) spec.basis.push_back(*it);
  }
  return spec;
}

// ---------------------------------------------------------------- separation

namespace {

// LP over Pi_s with the pool model:  max tau - pi^T x^ - pi0 theta^
//   tau <= pi^T z + pi0 theta_z  for every pooled (z, theta_z)
// with pi = sum_k lambda_k v^k. The lambda-norm keeps lambda split into
// nonnegative parts; the pi-norm bounds |pi_i| through auxiliary w_i.
class SeparationModel {
 public:
  SeparationModel(NormKind kind, std::vector<std::vector<double>> basis, double alpha,
                  std::span<const double> x_hat, double theta_hat)
      : basis_(std::move(basis)), split_(kind != NormKind::SpanPiNorm) {
    const int K = static_cast<int>(basis_.size());
    const int n = static_cast<int>(x_hat.size());
    lp_.maximize = true;
    std::vector<double> gx(K);
    for (int k = 0; k < K; ++k) gx[k] = dot(basis_[k], x_hat);
    LinearRow norm;
    norm.sense = Sense::LessEqual;
    norm.rhs = 1.0;
    if (split_) {
      for (int k = 0; k < K; ++k) lp_.add_column(-gx[k], 0.0, kInf);
      for (int k = 0; k < K; ++k) lp_.add_column(gx[k], 0.0, kInf);
      for (int c = 0; c < 2 * K; ++c) {
        norm.index.push_back(c);
        norm.value.push_back(1.0);
      }
    } else {
      for (int k = 0; k < K; ++k) lp_.add_column(-gx[k], -kInf, kInf);
      for (int i = 0; i < n; ++i) {
        LinearRow plus, minus;
        for (int k = 0; k < K; ++k) {
          if (basis_[k][i] != 0.0) {
            plus.index.push_back(k);
            plus.value.push_back(-basis_[k][i]);
            minus.index.push_back(k);
            minus.value.push_back(basis_[k][i]);
          }
        }
        if (plus.index.empty()) continue;
        const int w = lp_.add_column(0.0, 0.0, kInf);
        plus.index.push_back(w);
        plus.value.push_back(1.0);
        minus.index.push_back(w);
        minus.value.push_back(1.0);
        lp_.rows.push_back(std::move(plus));
        lp_.rows.push_back(std::move(minus));
        norm.index.push_back(w);
        norm.value.push_back(1.0);
      }
    }
    pi0_col_ = lp_.add_column(-theta_hat, 0.0, 1.0 / alpha);
    tau_col_ = lp_.add_column(1.0, -kInf, kInf);
    norm.index.push_back(pi0_col_);
    norm.value.push_back(alpha);
    lp_.rows.push_back(std::move(norm));
  }

  int dimension() const { return static_cast<int>(basis_.size()); }

  void add_point(const EpigraphPoint& pt) {
    const int K = dimension();
    LinearRow row;
    row.sense = Sense::LessEqual;
    row.rhs = 0.0;
    for (int k = 0; k < K; ++k) {
      const double g = dot(basis_[k], pt.x);
      if (g == 0.0) continue;
      row.index.push_back(k);
      row.value.push_back(-g);
      if (split_) {
        row.index.push_back(K + k);
        row.value.push_back(g);
      }
    }
    if (pt.theta != 0.0) {
      row.index.push_back(pi0_col_);
      row.value.push_back(-pt.theta);
    }
    row.index.push_back(tau_col_);
    row.value.push_back(1.0);
    lp_.rows.push_back(std::move(row));
  }

  struct Point {
    double value = 0.0;
    std::vector<double> lambda;
    double pi0 = 0.0;
  };

  // Maximizes the model, optionally inside the box |lambda - c| <= r,
  // |pi0 - c0| <= r.
  Point solve(const Point* center, double radius) const {
    const int K = dimension();
    const LinearProgram* prog = &lp_;
    LinearProgram boxed;
    if (center != nullptr) {
      boxed = lp_;
      for (int k = 0; k < K; ++k) {
        std::vector<int> idx{k};
        std::vector<double> val{1.0};
        if (split_) {
          idx.push_back(K + k);
          val.push_back(-1.0);
        }
        boxed.add_row(idx, val, Sense::LessEqual, center->lambda[k] + radius);
        boxed.add_row(idx, val, Sense::GreaterEqual, center->lambda[k] - radius);
      }
      boxed.lower[pi0_col_] = std::max(0.0, center->pi0 - radius);
      boxed.upper[pi0_col_] = std::min(boxed.upper[pi0_col_], center->pi0 + radius);
      prog = &boxed;
    }
    const auto out = solve_lp(*prog);
    if (out.status != SolveStatus::Optimal) {
      throw Error(ErrorCode::NumericalFailure,
                  std::string("separation LP ended with status ") + to_string(out.status));
    }
    Point p;
    p.value = out.objective;
    p.lambda.resize(K);
    for (int k = 0; k < K; ++k) {
      p.lambda[k] = split_ ? out.primal[k] - out.primal[K + k] : out.primal[k];
    }
    p.pi0 = std::max(0.0, out.primal[pi0_col_]);
    return p;
  }

  std::vector<double> pi_of(const std::vector<double>& lambda, int n) const {
    std::vector<double> pi(n, 0.0);
    for (int k = 0; k < dimension(); ++k) {
      if (lambda[k] == 0.0) continue;
      for (int i = 0; i < n; ++i) pi[i] += lambda[k] * basis_[k][i];
    }
    return pi;
  }

 private:
  std::vector<std::vector<double>> basis_;
  bool split_;
  LinearProgram lp_;
  int pi0_col_ = 0;
  int tau_col_ = 0;
};

double max_abs_diff(const SeparationModel::Point& a, const SeparationModel::Point& b) {
  double d = std::fabs(a.pi0 - b.pi0);
  for (std::size_t k = 0; k < a.lambda.size(); ++k) {
    d = std::max(d, std::fabs(a.lambda[k] - b.lambda[k]));
  }
  return d;
}

}  // namespace

Cut SeparationResult::to_cut(int scenario, int born_at) const {
  Cut c;
  c.family = CutFamily::Lagrangian;
  c.scenario = scenario;
  c.coef_x = pi;
  c.coef_theta = pi0;
  c.rhs = rhs;
  c.born_at = born_at;
  c.violation_at_birth = violation;
  return c;
}

std::optional<SeparationResult> separate_restricted(const SipInstance& inst, int s,
                                                    std::span<const double> x_hat,
                                                    double theta_hat,
                                                    const NormalizationSpec& spec,
                                                    EpigraphPool& pool,
                                                    const SeparationOptions& options) {
  if (!(options.delta >= 0.0 && options.delta < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "delta must lie in [0, 1)");
  }
  if (!(spec.alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  if (pool.empty()) throw Error(ErrorCode::NotInitialized, "epigraph pool is empty");
  const int n = inst.n;
  std::vector<std::vector<double>> basis;
  if (spec.kind == NormKind::ExactBall) {
    for (int i = 0; i < n; ++i) {
      basis.emplace_back(n, 0.0);
      basis.back()[i] = 1.0;
    }
  } else {
    if (spec.basis.empty()) {
      throw Error(ErrorCode::InvalidArgument, "span normalization needs at least one vector");
    }
    for (const auto& v : spec.basis) {
      if (static_cast<int>(v.size()) != n) {
        throw Error(ErrorCode::DimensionMismatch, "basis vector length differs from n");
      }
    }
    basis = spec.basis;
  }
  SeparationModel model(spec.kind, basis, spec.alpha, x_hat, theta_hat);
  std::size_t absorbed = 0;
  auto sync_pool = [&] {
    for (; absorbed < pool.size(); ++absorbed) model.add_point(pool.points()[absorbed]);
  };
  // Theta updates of existing points only lower the model, so stale rows
  // would merely be weaker; rebuild rows lazily by re-adding changed points.
  sync_pool();

  const bool use_trust = options.trust_region.value_or(spec.kind == NormKind::ExactBall);
  const double small_ub = 1e-6 * (std::fabs(theta_hat) + 1.0);
  SeparationResult res;
  double lb = -kInf;
  double radius = 1.0;
  bool trust_active = use_trust;
  std::optional<SeparationModel::Point> incumbent, previous;

  while (true) {
    ++res.iterations;
    const auto untrusted = model.solve(nullptr, 0.0);
    const double ub = untrusted.value;
    res.upper_bound = ub;
    if (ub < small_ub) break;
    if (lb > -kInf && ub - lb <= options.delta * ub + 1e-9 * (1.0 + std::fabs(ub))) break;
    SeparationModel::Point cand = untrusted;
    if (trust_active && incumbent) cand = model.solve(&*incumbent, radius);
    if (previous && max_abs_diff(cand, *previous) < 1e-10) break;
    if (res.oracle_calls >= options.max_oracle_calls) {
      res.limit_reached = true;
      break;
    }
    const auto pi = model.pi_of(cand.lambda, n);
    const std::size_t before = pool.size();
    std::vector<double> thetas_before;
    thetas_before.reserve(before);
    for (const auto& pt : pool.points()) thetas_before.push_back(pt.theta);
    const auto q = eval_qbar(inst, s, pi, cand.pi0, &pool);
    ++res.oracle_calls;
    for (std::size_t k = 0; k < before; ++k) {
      if (pool.points()[k].theta < thetas_before[k]) model.add_point(pool.points()[k]);
    }
    sync_pool();
    const double viol = q.value - dot(pi, x_hat) - cand.pi0 * theta_hat;
    if (viol > lb) {
      lb = viol;
      res.pi = pi;
      res.pi0 = cand.pi0;
      res.rhs = q.value;
      res.violation = viol;
      incumbent = cand;
    } else if (trust_active) {
      radius *= 0.5;
      if (radius < 1e-4) trust_active = false;
    }
    res.trace.push_back({res.oracle_calls, ub, lb});
    previous = cand;
  }
  // Violations at round-off level are not cuts.
  if (!(lb > 1e-9 * (1.0 + std::fabs(theta_hat)))) return std::nullopt;
  return res;
}

void write_separation_trace(const SeparationResult& result, std::ostream& out) {
  out << "oracle_call,upper,lower\n";
  for (const auto& st : result.trace) {
    out << st.oracle_call << ',' << format_double(st.upper) << ',' << format_double(st.lower)
        << '\n';
  }
}

// ---------------------------------------------------------------- basis selection

BasisSelection select_basis_mip(const EpigraphPool& pool,
                                const std::vector<std::vector<double>>& candidates,
                                std::span<const double> x_hat, double theta_hat, int K,
                                double alpha) {
  if (pool.empty()) throw Error(ErrorCode::NotInitialized, "epigraph pool is empty");
  if (K < 1) throw Error(ErrorCode::InvalidArgument, "basis size K must be >= 1");
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  // Distinct nonzero candidates, first occurrence order.
  std::vector<std::vector<double>> v;
  {
    std::set<std::vector<double>> seen;
    for (const auto& c : candidates) {
      if (std::all_of(c.begin(), c.end(), [](double a) { return a == 0.0; })) continue;
      if (seen.insert(c).second) v.push_back(c);
    }
  }
  BasisSelection sel;
  if (v.empty()) return sel;
  const int m = static_cast<int>(v.size());
  MipProgram mip;
  mip.lp.maximize = true;
  // columns: lambda+ [0,m), lambda- [m,2m), z [2m,3m), pi0, tau
  for (int k = 0; k < m; ++k) mip.add_column(-dot(v[k], x_hat), 0.0, 1.0, VarType::Continuous);
  for (int k = 0; k < m; ++k) mip.add_column(dot(v[k], x_hat), 0.0, 1.0, VarType::Continuous);
  for (int k = 0; k < m; ++k) mip.add_column(0.0, 0.0, 1.0, VarType::Binary);
  const int pi0 = mip.add_column(-theta_hat, 0.0, 1.0 / alpha, VarType::Continuous);
  const int tau = mip.add_column(1.0, -kInf, kInf, VarType::Continuous);
  for (const auto& pt : pool.points()) {
    LinearRow row;
    row.sense = Sense::LessEqual;
    for (int k = 0; k < m; ++k) {
      const double g = dot(v[k], pt.x);
      if (g == 0.0) continue;
      row.index.insert(row.index.end(), {k, m + k});
      row.value.insert(row.value.end(), {-g, g});
    }
    if (pt.theta != 0.0) {
      row.index.push_back(pi0);
      row.value.push_back(-pt.theta);
    }
    row.index.push_back(tau);
    row.value.push_back(1.0);
    mip.lp.rows.push_back(std::move(row));
  }
  LinearRow norm, card;
  norm.sense = card.sense = Sense::LessEqual;
  norm.rhs = 1.0;
  card.rhs = K;
  for (int k = 0; k < m; ++k) {
    mip.lp.add_row({k, m + k, 2 * m + k}, {1.0, 1.0, -1.0}, Sense::LessEqual, 0.0);
    norm.index.insert(norm.index.end(), {k, m + k});
    norm.value.insert(norm.value.end(), {1.0, 1.0});
    card.index.push_back(2 * m + k);
    card.value.push_back(1.0);
  }
  norm.index.push_back(pi0);
  norm.value.push_back(alpha);
  mip.lp.rows.push_back(std::move(norm));
  mip.lp.rows.push_back(std::move(card));

  MipLimits limits;
  limits.max_nodes = 20000;
  limits.pool_capacity = 1;
  const auto out = solve_mip(mip, limits);
  sel.limit_reached = out.status == SolveStatus::LimitReached;
  if (out.primal.empty()) {
    sel.ub = out.status == SolveStatus::LimitReached ? out.bound : 0.0;
    return sel;
  }
  sel.ub = sel.limit_reached ? out.bound : out.objective;
  for (int k = 0; k < m; ++k) {
    if (out.primal[2 * m + k] > 0.5) sel.basis.push_back(v[k]);
  }
  return sel;
}

// ---------------------------------------------------------------- other families

Cut strengthen_benders(const SipInstance& inst, int s, const Cut& benders, EpigraphPool* pool) {
  const auto q = eval_qbar(inst, s, benders.coef_x, 1.0, pool);
  Cut c;
  c.family = CutFamily::StrengthenedBenders;
  c.scenario = s;
  c.coef_x = benders.coef_x;
  c.coef_theta = 1.0;
  c.rhs = q.value;
  c.born_at = benders.born_at;
  return c;
}

std::optional<Cut> separate_feasibility(const SipInstance& inst, int s,
                                        std::span<const double> x_hat,
                                        std::span<const double> lambda) {
  const auto& sc = inst.scenarios.at(static_cast<std::size_t>(s));
  const int n = inst.n;
  if (static_cast<int>(lambda.size()) != n || static_cast<int>(x_hat.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "feasibility cut: vector length differs from n");
  }
  MipProgram mip;
  for (int j = 0; j < n; ++j) {
    mip.add_column(lambda[j], inst.first.lower[j], inst.first.upper[j], inst.first.types[j]);
  }
  for (int j = 0; j < sc.num_y(); ++j) mip.add_column(0.0, sc.lower[j], sc.upper[j], sc.types[j]);
  for (int r = 0; r < inst.first.A.rows(); ++r) {
    LinearRow row;
    for (const auto& t : inst.first.A.row(r)) {
      row.index.push_back(t.col);
      row.value.push_back(t.value);
    }
    row.index.push_back(mip.add_column(1.0, 0.0, kInf, VarType::Continuous));
    row.value.push_back(1.0);
    row.rhs = inst.first.b[r];
    mip.lp.rows.push_back(std::move(row));
  }
  for (int r = 0; r < sc.num_rows(); ++r) {
    LinearRow row;
    for (const auto& t : sc.T.row(r)) {
      row.index.push_back(t.col);
      row.value.push_back(t.value);
    }
    for (const auto& t : sc.W.row(r)) {
      row.index.push_back(n + t.col);
      row.value.push_back(t.value);
    }
    row.index.push_back(mip.add_column(1.0, 0.0, kInf, VarType::Continuous));
    row.value.push_back(1.0);
    row.rhs = sc.h[r];
    mip.lp.rows.push_back(std::move(row));
  }
  const auto out = solve_mip(mip);
  if (out.status != SolveStatus::Optimal) {
    throw Error(ErrorCode::NumericalFailure,
                std::string("feasibility MIP ended with status ") + to_string(out.status));
  }
  Cut c;
  c.family = CutFamily::LagrangianFeasibility;
  c.scenario = s;
  c.coef_x.assign(lambda.begin(), lambda.end());
  c.coef_theta = 0.0;
  c.rhs = out.objective;
  const double viol = c.rhs - dot(lambda, x_hat);
  if (viol <= 1e-6 * (1.0 + std::fabs(c.rhs))) return std::nullopt;
  c.violation_at_birth = viol;
  return c;
}

}  // namespace lagcut
