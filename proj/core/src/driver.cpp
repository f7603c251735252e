#include "lagcut/driver.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>

#include "lagcut/error.hpp"
#include "lagcut/instances.hpp"
#include "parallel.hpp"

namespace lagcut {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return a == 0.0; });
}

}  // namespace

const char* to_string(Variant v) {
  switch (v) {
    case Variant::StrBen: return "StrBen";
    case Variant::Exact: return "Exact";
    case Variant::Rstr1: return "Rstr1";
    case Variant::Rstr2: return "Rstr2";
    case Variant::RstrMIP: return "RstrMIP";
    case Variant::BendersOnly: return "BendersOnly";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name) {
  std::string lower(name);
  for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  for (Variant v : {Variant::StrBen, Variant::Exact, Variant::Rstr1, Variant::Rstr2,
                    Variant::RstrMIP, Variant::BendersOnly}) {
    std::string candidate = to_string(v);
    for (auto& ch : candidate) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (candidate == lower) return v;
  }
  return std::nullopt;
}

const char* to_string(RootStatus s) {
  switch (s) {
    case RootStatus::Converged: return "converged";
    case RootStatus::EarlyStop: return "early-stop";
    case RootStatus::TimeLimit: return "time-limit";
    case RootStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

void VariantConfig::validate() const {
  if (!(delta >= 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidArgument, "delta must lie in [0, 1)");
  if (K < 1) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  if (!(time_limit >= 0.0)) throw Error(ErrorCode::InvalidArgument, "time limit must be >= 0");
  if (workers < 1) throw Error(ErrorCode::InvalidArgument, "workers must be >= 1");
  if (benders_cap < 0 || max_iterations < 1 || max_oracle_calls < 1) {
    throw Error(ErrorCode::InvalidArgument, "iteration limits must be positive");
  }
  if (early_stop.window < 1 || early_stop.fraction < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "invalid early-stop rule");
  }
}

// ---------------------------------------------------------------- traces

void write_trace_csv(const BoundTrace& trace, std::ostream& out) {
  out << "# schema=lagcut-trace/1 instance=" << trace.instance << " method=" << trace.method
      << " z_lp=" << format_double(trace.z_lp) << '\n';
  out << "time_s,lower_bound,iter,n_benders,n_lagrangian,n_intL\n";
  for (const auto& p : trace.points) {
    out << format_double(p.time_s) << ',' << format_double(p.lower_bound) << ',' << p.iter << ','
        << p.n_benders << ',' << p.n_lagrangian << ',' << p.n_intL << '\n';
  }
}

BoundTrace read_trace_csv(std::istream& in) {
  BoundTrace trace;
  std::string line;
  int line_no = 0;
  bool header = false;
  bool schema = false;
  auto fail = [&](const std::string& msg) { throw ParseError(line_no, 1, msg); };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream is(line.substr(1));
      std::string tok;
      while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const auto key = tok.substr(0, eq);
        const auto val = tok.substr(eq + 1);
        if (key == "schema") {
          if (val != "lagcut-trace/1") {
            throw Error(ErrorCode::VersionMismatch, "unsupported trace schema " + val);
          }
          schema = true;
        } else if (key == "instance") {
          trace.instance = val;
        } else if (key == "method") {
          trace.method = val;
        } else if (key == "z_lp") {
          trace.z_lp = val == "-inf" ? -kInf : val == "inf" ? kInf : std::stod(val);
        }
      }
      continue;
    }
    if (!header) {
      if (line != "time_s,lower_bound,iter,n_benders,n_lagrangian,n_intL") fail("bad trace header");
      header = true;
      continue;
    }
    std::istringstream is(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(is, field, ',')) f.push_back(field);
    if (f.size() != 6) fail("expected 6 fields");
    TracePoint p;
    try {
      p.time_s = std::stod(f[0]);
      p.lower_bound = f[1] == "-inf" ? -kInf : std::stod(f[1]);
      p.iter = std::stoi(f[2]);
      p.n_benders = std::stoi(f[3]);
      p.n_lagrangian = std::stoi(f[4]);
      p.n_intL = std::stoi(f[5]);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    trace.points.push_back(p);
  }
  if (!schema) throw ParseError(line_no, 1, "missing schema line");
  if (!header) throw ParseError(line_no, 1, "missing trace header");
  return trace;
}

// ---------------------------------------------------------------- root loop

namespace {

struct ScenarioOutput {
  std::vector<Cut> cuts;
  long oracle_calls = 0;
};

class RootLoop {
 public:
  RootLoop(const SipInstance& inst, const VariantConfig& cfg,
           const std::function<void(const TracePoint&)>& on_point)
      : inst_(inst),
        cfg_(cfg),
        on_point_(on_point),
        S_(inst.num_scenarios()),
        history_(S_),
        pools_(S_) {}

  RootResult run() {
    const auto start = Clock::now();
    RootResult r(initialize_master(inst_));
    r.trace.instance = inst_.name;
    r.trace.method = to_string(cfg_.variant);
    for (const auto& c : r.master.cuts()) remember(c);

    const bool lagrangian = cfg_.variant != Variant::BendersOnly && cfg_.variant != Variant::StrBen;
    std::vector<double> round_bounds;
    double base = 0.0;
    int iter = 0;
    while (true) {
      if (iter >= cfg_.max_iterations) {
        r.status = RootStatus::IterationLimit;
        break;
      }
      r.last = r.master.solve();
      ++iter;
      record(r, iter, start);
      if (seconds_since(start) > cfg_.time_limit) {
        r.status = RootStatus::TimeLimit;
        break;
      }
      const auto& sol = r.last;
      if (r.benders_rounds < cfg_.benders_cap) {
        std::vector<ScenarioOutput> out(S_);
        detail::parallel_for(S_, cfg_.workers, [&](int s) { out[s] = benders_step(sol, s, iter); });
        if (merge(r, out)) {
          ++r.benders_rounds;
          continue;
        }
      } else if (!lagrangian) {
        r.status = RootStatus::IterationLimit;
        break;
      }
      if (!lagrangian) {
        r.status = RootStatus::Converged;
        break;
      }
      const double bound = r.trace.points.back().lower_bound;
      if (round_bounds.empty()) {
        r.trace.z_lp = bound;
        base = bound;
      }
      round_bounds.push_back(bound);
      const int w = cfg_.early_stop.window;
      if (cfg_.early_stop.enabled && static_cast<int>(round_bounds.size()) > w) {
        const double recent = bound - round_bounds[round_bounds.size() - 1 - w];
        const double total = bound - base;
        if (recent < cfg_.early_stop.fraction * total || (total <= 0.0 && recent <= 0.0)) {
          r.status = RootStatus::EarlyStop;
          break;
        }
      }
      std::vector<ScenarioOutput> out(S_);
      detail::parallel_for(S_, cfg_.workers, [&](int s) { out[s] = lagrangian_step(sol, s, iter); });
      ++r.lagrangian_rounds;
      if (!merge(r, out)) {
        r.status = RootStatus::Converged;
        break;
      }
    }
    if (r.trace.z_lp == -kInf && !r.trace.points.empty()) r.trace.z_lp = r.trace.final_bound();
    r.wall_time = seconds_since(start);
    return r;
  }

 private:
  void remember(const Cut& c) {
    if (c.family == CutFamily::Benders && !is_zero(c.coef_x)) history_[c.scenario].push_back(c.coef_x);
  }

  void record(RootResult& r, int iter, Clock::time_point start) {
    TracePoint p;
    p.iter = iter;
    p.time_s = cfg_.iteration_clock ? static_cast<double>(iter) : seconds_since(start);
    p.lower_bound = r.last.lower_bound;
    if (!r.trace.points.empty()) {
      const auto& prev = r.trace.points.back();
      // Cuts only tighten the master, so the bound is monotone up to LP noise.
      p.lower_bound = std::max(p.lower_bound, prev.lower_bound);
      if (p.time_s <= prev.time_s) p.time_s = std::nextafter(prev.time_s, kInf);
    }
    p.n_benders = static_cast<int>(r.master.count(CutFamily::Benders));
    p.n_intL = static_cast<int>(r.master.count(CutFamily::IntegerLShaped));
    p.n_lagrangian = static_cast<int>(r.master.count(CutFamily::Lagrangian) +
                                      r.master.count(CutFamily::StrengthenedBenders) +
                                      r.master.count(CutFamily::LagrangianFeasibility));
    r.trace.points.push_back(p);
    if (on_point_) on_point_(p);
  }

  bool merge(RootResult& r, const std::vector<ScenarioOutput>& out) {
    bool added = false;
    for (const auto& o : out) {
      r.oracle_calls += o.oracle_calls;
      for (const auto& c : o.cuts) {
        if (r.master.add_cut(c)) {
          added = true;
          remember(c);
        }
      }
    }
    return added;
  }

  ScenarioOutput benders_step(const MasterSolution& sol, int s, int iter) const {
    ScenarioOutput o;
    const double theta = sol.theta[s];
    auto bc = benders_cut_at(inst_, s, sol.x);
    const double viol = bc.cut.violation(sol.x, theta);
    bc.cut.born_at = iter;
    if (viol >= benders_threshold(theta)) {
      bc.cut.violation_at_birth = viol;
      o.cuts.push_back(bc.cut);
    }
    if (cfg_.variant == Variant::StrBen) {
      auto sb = strengthen_benders(inst_, s, bc.cut, nullptr);
      ++o.oracle_calls;
      const double sv = sb.violation(sol.x, theta);
      if (sv > fine_threshold(theta)) {
        sb.violation_at_birth = sv;
        o.cuts.push_back(sb);
      }
    }
    return o;
  }

  ScenarioOutput lagrangian_step(const MasterSolution& sol, int s, int iter) {
    ScenarioOutput o;
    const double theta = sol.theta[s];
    auto& pool = pools_[s];
    if (!pool) pool = init_epigraph_pool(inst_, s);
    NormalizationSpec spec;
    spec.alpha = cfg_.alpha;
    const auto& hist = history_[s];
    switch (cfg_.variant) {
      case Variant::Exact:
        spec.kind = NormKind::ExactBall;
        break;
      case Variant::Rstr1:
      case Variant::Rstr2:
        if (hist.empty()) return o;
        spec = build_normalization(
            cfg_.variant == Variant::Rstr1 ? NormKind::SpanPiNorm : NormKind::SpanLambdaNorm, hist,
            cfg_.K, cfg_.alpha);
        break;
      case Variant::RstrMIP: {
        if (hist.empty()) return o;
        auto sel = select_basis_mip(*pool, hist, sol.x, theta, cfg_.K, cfg_.alpha);
        if (sel.ub <= fine_threshold(theta)) return o;
        spec.kind = NormKind::SpanLambdaNorm;
        spec.basis = sel.basis.empty() ? std::vector<std::vector<double>>{hist.back()}
                                       : std::move(sel.basis);
        break;
      }
      default:
        return o;
    }
    SeparationOptions opt;
    opt.delta = cfg_.delta;
    opt.max_oracle_calls = cfg_.max_oracle_calls;
    const auto res = separate_restricted(inst_, s, sol.x, theta, spec, *pool, opt);
    if (!res) return o;
    o.oracle_calls += res->oracle_calls;
    if (res->violation > fine_threshold(theta) && res->pi0 >= 1e-6) {
      o.cuts.push_back(res->to_cut(s, iter));
    }
    return o;
  }

  const SipInstance& inst_;
  const VariantConfig& cfg_;
  const std::function<void(const TracePoint&)>& on_point_;
  int S_;
  std::vector<std::vector<std::vector<double>>> history_;  // Benders coefficients, oldest first
  std::vector<std::optional<EpigraphPool>> pools_;
};

}  // namespace

RootResult run_root_loop(const SipInstance& inst, const VariantConfig& cfg,
                         const std::function<void(const TracePoint&)>& on_point) {
  cfg.validate();
  inst.validate();
  return RootLoop(inst, cfg, on_point).run();
}

// ---------------------------------------------------------------- branch-and-cut

namespace {

struct Node {
  double bound = -kInf;
  long id = 0;
  std::vector<double> lower, upper;
  Basis warm;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

double relative_gap(double ub, double lb) {
  if (ub == kInf || lb == -kInf) return kInf;
  const double scale = std::max(std::fabs(ub), std::fabs(lb));
  if (scale == 0.0) return 0.0;
  return std::max(0.0, (ub - lb) / scale);
}

}  // namespace

BranchAndCutResult run_branch_and_cut(const SipInstance& inst, MasterModel master,
                                      const BranchAndCutOptions& options) {
  const auto start = Clock::now();
  const int n = inst.n;
  const int S = inst.num_scenarios();
  if (options.integer_lshaped && !inst.first_stage_pure_binary()) {
    throw Error(ErrorCode::UnsupportedCut, "integer L-shaped cuts need a pure binary first stage");
  }
  BranchAndCutResult res;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  open.push({-kInf, next_id++, inst.first.lower, inst.first.upper, {}});
  double ub = kInf;
  bool limit = false;

  auto global_lb = [&] { return open.empty() ? ub : std::min(ub, open.top().bound); };

  while (!open.empty()) {
    if (relative_gap(ub, global_lb()) <= options.gap_tol) break;
    if (res.node_count >= options.max_nodes ||
        (res.node_count > 0 && seconds_since(start) > options.time_limit)) {
      limit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (ub < kInf && node.bound >= ub - options.gap_tol * std::max(1.0, std::fabs(ub))) continue;
    ++res.node_count;
    while (true) {
      const auto sol = master.solve_node(node.lower, node.upper, node.warm.empty() ? nullptr : &node.warm);
      if (sol.status == SolveStatus::Infeasible) break;
      if (sol.status != SolveStatus::Optimal) {
        throw Error(ErrorCode::NumericalFailure,
                    std::string("node LP ended with status ") + to_string(sol.status));
      }
      node.warm = sol.basis;
      if (ub < kInf && sol.lower_bound >= ub - options.gap_tol * std::max(1.0, std::fabs(ub))) break;
      int branch = -1;
      double best_frac = 0.0;
      for (int j = 0; j < n; ++j) {
        if (inst.first.types[j] == VarType::Continuous) continue;
        const double f = sol.x[j] - std::floor(sol.x[j]);
        const double dist = std::min(f, 1.0 - f);
        if (dist > kIntegralityTol && dist > best_frac) {
          best_frac = dist;
          branch = j;
        }
      }
      if (branch >= 0) {
        Node down{sol.lower_bound, next_id++, node.lower, node.upper, sol.basis};
        Node up{sol.lower_bound, next_id++, node.lower, node.upper, sol.basis};
        down.upper[branch] = std::floor(sol.x[branch]);
        up.lower[branch] = std::ceil(sol.x[branch]);
        open.push(std::move(down));
        open.push(std::move(up));
        break;
      }
      std::vector<double> x = sol.x;
      for (int j = 0; j < n; ++j) {
        if (inst.first.types[j] != VarType::Continuous) x[j] = std::round(x[j]);
      }
      std::vector<double> q(S);
      std::vector<std::vector<Cut>> found(S);
      detail::parallel_for(S, options.workers, [&](int s) {
        q[s] = eval_recourse(inst, s, x);
        if (!std::isfinite(q[s])) {
          throw Error(ErrorCode::ScenarioInfeasible,
                      "scenario " + std::to_string(s) + " has no recourse at an integer candidate");
        }
        if (options.benders) {
          if (auto bc = separate_benders(inst, s, x, sol.theta[s])) found[s].push_back(bc->cut);
        }
        if (options.integer_lshaped) {
          if (auto c = separate_integer_lshaped(inst, s, x, sol.theta[s], master.theta_lower()[s], q[s])) {
            found[s].push_back(*c);
          }
        }
      });
      bool added = false;
      for (auto& cuts : found) {
        for (auto& c : cuts) {
          c.born_at = static_cast<int>(res.node_count);
          if (master.add_cut(c)) {
            added = true;
            ++res.lazy_cuts;
          }
        }
      }
      if (added) continue;
      const double value = master.objective(x, q);
      if (value < ub) {
        ub = value;
        res.x = x;
      }
      break;
    }
  }
  res.objective = ub;
  res.bound = global_lb();
  if (res.x.empty() && open.empty() && !limit) {
    res.status = SolveStatus::Infeasible;
    res.bound = kInf;
    res.gap = kInf;
  } else {
    res.gap = relative_gap(ub, res.bound);
    res.status = (!limit && res.gap <= options.gap_tol) || (open.empty() && !limit)
                     ? SolveStatus::Optimal
                     : SolveStatus::LimitReached;
  }
  res.wall_time = seconds_since(start);
  return res;
}

// ---------------------------------------------------------------- profiles

std::vector<ProfileRow> gap_closed_profile(const std::vector<BoundTrace>& traces, double gamma) {
  if (traces.empty()) throw Error(ErrorCode::InvalidArgument, "no traces given");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(ErrorCode::InvalidArgument, "gamma must lie in (0, 1]");
  std::map<std::string, std::map<std::string, const BoundTrace*>> by_instance;
  std::set<std::string> methods;
  for (const auto& t : traces) {
    if (t.points.empty()) {
      throw Error(ErrorCode::InvalidArgument, "trace " + t.instance + "/" + t.method + " is empty");
    }
    auto& slot = by_instance[t.instance][t.method];
    if (slot != nullptr) {
      throw Error(ErrorCode::InvalidArgument, "duplicate trace " + t.instance + "/" + t.method);
    }
    slot = &t;
    methods.insert(t.method);
  }
  std::string missing;
  for (const auto& [inst, per] : by_instance) {
    for (const auto& m : methods) {
      if (!per.count(m)) missing += " " + inst + "/" + m;
    }
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::InvalidArgument, "instance sets differ across methods; missing:" + missing);
  }
  // t^gamma per (instance, method)
  std::map<std::string, std::vector<double>> crossing;
  std::set<double> taus;
  for (const auto& [inst, per] : by_instance) {
    double base = kInf;
    for (const auto& [m, t] : per) {
      base = std::min(base, std::isfinite(t->z_lp) ? t->z_lp : t->points.front().lower_bound);
    }
    double best = 0.0;
    for (const auto& [m, t] : per) best = std::max(best, t->final_bound() - base);
    const double target = gamma * best;
    for (const auto& [m, t] : per) {
      double when = kInf;
      for (const auto& p : t->points) {
        if (p.lower_bound - base >= target - 1e-12 * (1.0 + std::fabs(target))) {
          when = p.time_s;
          break;
        }
      }
      crossing[m].push_back(when);
      if (std::isfinite(when)) taus.insert(when);
    }
  }
  const double count = static_cast<double>(by_instance.size());
  std::vector<ProfileRow> rows;
  for (double tau : taus) {
    for (const auto& m : methods) {
      const auto& c = crossing[m];
      const auto hit = std::count_if(c.begin(), c.end(), [&](double t) { return t <= tau; });
      rows.push_back({gamma, tau, m, static_cast<double>(hit) / count});
    }
  }
  return rows;
}

void write_profile_csv(const std::vector<ProfileRow>& rows, std::ostream& out) {
  out << "gamma,tau,method,rho\n";
  for (const auto& r : rows) {
    out << format_double(r.gamma) << ',' << format_double(r.tau) << ',' << r.method << ','
        << format_double(r.rho) << '\n';
  }
}

}  // namespace lagcut
