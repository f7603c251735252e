#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <string>

#include "lagcut/error.hpp"
#include "lagcut/optbase.hpp"

namespace lagcut {

int MipProgram::add_column(double cost, double lo, double hi, VarType type, std::string name) {
  types.push_back(type);
  if (!priority.empty()) priority.push_back(0);
  return lp.add_column(cost, lo, hi, std::move(name));
}

void MipProgram::validate() const {
  lp.validate();
  if (static_cast<int>(types.size()) != lp.num_cols()) {
    throw Error(ErrorCode::DimensionMismatch, "integrality markers do not match column count");
  }
  if (!priority.empty() && static_cast<int>(priority.size()) != lp.num_cols()) {
    throw Error(ErrorCode::DimensionMismatch, "branching priorities do not match column count");
  }
}

namespace {

using Clock = std::chrono::steady_clock;

struct Node {
  double bound;
  long id;
  std::vector<double> lower;
  std::vector<double> upper;
  Basis basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

class IncumbentPool {
 public:
  explicit IncumbentPool(std::size_t capacity) : capacity_(capacity) {}

  void add(const std::vector<double>& x, double objective) {
    std::vector<long long> key(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) key[j] = std::llround(x[j] * 1e9);
    auto it = seen_.find(key);
    if (it != seen_.end()) return;
    seen_.emplace(std::move(key), entries_.size());
    entries_.push_back({x, objective});
  }

  // Best first by objective; insertion order breaks ties.
  std::vector<PoolEntry> take(double sign) {
    std::vector<std::size_t> order(entries_.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return sign * entries_[a].objective < sign * entries_[b].objective;
    });
    std::vector<PoolEntry> out;
    for (std::size_t k = 0; k < order.size() && out.size() < capacity_; ++k) {
      out.push_back(std::move(entries_[order[k]]));
    }
    return out;
  }

 private:
  std::size_t capacity_;
  std::map<std::vector<long long>, std::size_t> seen_;
  std::vector<PoolEntry> entries_;
};

}  // namespace

SolveOutcome solve_mip(const MipProgram& mip, const MipLimits& limits) {
  mip.validate();
  const auto start = Clock::now();
  const int n = mip.lp.num_cols();
  const double sign = mip.lp.maximize ? -1.0 : 1.0;

  // Work in minimization form throughout.
  LinearProgram work = mip.lp;
  if (work.maximize) {
    for (auto& c : work.objective) c = -c;
    work.objective_constant = -work.objective_constant;
    work.maximize = false;
  }
  std::vector<double> lo = work.lower;
  std::vector<double> hi = work.upper;
  for (int j = 0; j < n; ++j) {
    if (mip.types[j] == VarType::Continuous) continue;
    if (mip.types[j] == VarType::Binary) {
      lo[j] = std::max(lo[j], 0.0);
      hi[j] = std::min(hi[j], 1.0);
    }
    lo[j] = std::ceil(lo[j] - kIntegralityTol);
    hi[j] = std::floor(hi[j] + kIntegralityTol);
  }

  SolveOutcome out;
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  auto finish = [&](SolveOutcome& o) {
    o.wall_time = elapsed();
    return o;
  };
  for (int j = 0; j < n; ++j) {
    if (lo[j] > hi[j]) {
      out.status = SolveStatus::Infeasible;
      return finish(out);
    }
  }

  IncumbentPool pool(limits.pool_capacity);
  double incumbent = kInf;
  std::vector<double> best_x;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  open.push(Node{-kInf, next_id++, lo, hi, {}});
  bool unbounded = false;
  bool limit_hit = false;
  long iterations = 0;

  auto prune_tol = [&](double inc) {
    return std::max(limits.gap_abs, limits.gap_rel * std::fabs(inc));
  };

  // After branching the search plunges into one child and keeps the other
  // for later, so incumbents appear early; otherwise nodes come best first.
  std::optional<Node> dive;
  while (dive || !open.empty()) {
    if (out.node_count >= limits.max_nodes || elapsed() >= limits.time_limit) {
      limit_hit = true;
      break;
    }
    Node node;
    if (dive) {
      node = std::move(*dive);
      dive.reset();
      if (node.bound >= incumbent - prune_tol(incumbent)) continue;
    } else {
      if (open.top().bound >= incumbent - prune_tol(incumbent)) break;
      node = open.top();
      open.pop();
    }
    ++out.node_count;

    work.lower = node.lower;
    work.upper = node.upper;
    LpOptions opts;
    opts.warm_start = node.basis.empty() ? nullptr : &node.basis;
    SolveOutcome lp = solve_lp(work, opts);
    iterations += lp.iterations;

    if (limits.log_bounds) {
      double global = node.bound == -kInf ? lp.objective : node.bound;
      if (!open.empty()) global = std::min(global, open.top().bound);
      global = std::min(global, incumbent);
      out.bound_log.push_back({global, incumbent});
    }
    if (lp.status == SolveStatus::Infeasible) continue;
    if (lp.status == SolveStatus::Unbounded) {
      unbounded = true;
      break;
    }
    if (lp.objective >= incumbent - prune_tol(incumbent)) continue;

    // Highest priority first, then most fractional.
    int branch = -1;
    int best_prio = 0;
    double best_frac = 0.0;
    for (int j = 0; j < n; ++j) {
      if (mip.types[j] == VarType::Continuous) continue;
      const double v = lp.primal[j];
      const double f = std::fabs(v - std::round(v));
      if (f <= kIntegralityTol) continue;
      const int prio = mip.priority.empty() ? 0 : mip.priority[j];
      if (branch < 0 || prio > best_prio || (prio == best_prio && f > best_frac)) {
        best_prio = prio;
        best_frac = f;
        branch = j;
      }
    }
    if (branch < 0) {
      std::vector<double> x = lp.primal;
      double obj = work.objective_constant;
      for (int j = 0; j < n; ++j) {
        if (mip.types[j] != VarType::Continuous) x[j] = std::round(x[j]);
        obj += work.objective[j] * x[j];
      }
      pool.add(x, sign * obj);
      if (obj < incumbent) {
        incumbent = obj;
        best_x = std::move(x);
      }
      continue;
    }

    const double v = lp.primal[branch];
    Node down{lp.objective, next_id++, node.lower, node.upper, lp.basis};
    down.upper[branch] = std::floor(v);
    Node up{lp.objective, next_id++, std::move(node.lower), std::move(node.upper), std::move(lp.basis)};
    up.lower[branch] = std::ceil(v);
    if (v - std::floor(v) >= 0.5) std::swap(down, up);
    dive = std::move(down);
    open.push(std::move(up));
  }
  if (dive) open.push(std::move(*dive));

  out.iterations = iterations;
  out.incumbent_pool = pool.take(sign);
  if (unbounded) {
    out.status = SolveStatus::Unbounded;
    return finish(out);
  }
  double global_lb = incumbent;
  if (!open.empty()) global_lb = std::min(global_lb, open.top().bound);
  if (limit_hit) {
    out.status = SolveStatus::LimitReached;
    out.bound = sign * global_lb;
    if (!best_x.empty()) {
      out.primal = best_x;
      out.objective = sign * incumbent;
    }
    return finish(out);
  }
  if (best_x.empty()) {
    out.status = SolveStatus::Infeasible;
    return finish(out);
  }
  out.status = SolveStatus::Optimal;
  out.primal = std::move(best_x);
  out.objective = sign * incumbent;
  out.bound = sign * std::min(global_lb, incumbent);
  return finish(out);
}

}  // namespace lagcut
