#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <string>

#include "lagcut/error.hpp"
#include "lagcut/optbase.hpp"

namespace lagcut {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::LimitReached: return "limit";
  }
  return "unknown";
}

int LinearProgram::add_column(double cost, double lo, double hi, std::string name) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  if (!name.empty() || !names.empty()) {
    names.resize(objective.size() - 1);
    names.push_back(std::move(name));
  }
  return num_cols() - 1;
}

int LinearProgram::add_row(std::vector<int> index, std::vector<double> value, Sense sense,
                           double rhs) {
  rows.push_back(LinearRow{std::move(index), std::move(value), sense, rhs});
  return num_rows() - 1;
}

void LinearProgram::validate() const {
  const auto n = objective.size();
  if (lower.size() != n || upper.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "bound vectors do not match column count");
  }
  if (!names.empty() && names.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "name vector does not match column count");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j]) {
      throw Error(ErrorCode::InvalidArgument,
                  "column " + std::to_string(j) + " has invalid bounds");
    }
    if (!std::isfinite(objective[j])) {
      throw Error(ErrorCode::InvalidArgument,
                  "column " + std::to_string(j) + " has a non-finite cost");
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.index.size() != r.value.size()) {
      throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(i) + " is ragged");
    }
    for (std::size_t k = 0; k < r.index.size(); ++k) {
      if (r.index[k] < 0 || static_cast<std::size_t>(r.index[k]) >= n ||
          !std::isfinite(r.value[k])) {
        throw Error(ErrorCode::InvalidArgument,
                    "row " + std::to_string(i) + " has an invalid entry");
      }
    }
    if (!std::isfinite(r.rhs)) {
      throw Error(ErrorCode::InvalidArgument, "row " + std::to_string(i) + " has infinite rhs");
    }
  }
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kPivotTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kDegenerateStep = 1e-12;
constexpr int kRefactorEvery = 64;

struct Entry {
  int row;
  double value;
};

// Internal form: structural columns 0..n-1 and one logical per row,
// s_i = a_i x, encoded as a_i x - s_i = 0 with the row sense moved into the
// bounds of s_i. The basis always has m columns.
class DenseSimplex {
 public:
  DenseSimplex(const LinearProgram& lp, const Basis* warm) : lp_(lp) {
    n_ = lp.num_cols();
    m_ = lp.num_rows();
    total_ = n_ + m_;
    sign_ = lp.maximize ? -1.0 : 1.0;
    cols_.assign(static_cast<std::size_t>(n_), {});
    // Rows are equilibrated by powers of two so that absolute tolerances
    // mean the same thing on every row; duals are unscaled on output.
    row_scale_.assign(static_cast<std::size_t>(m_), 1.0);
    for (int i = 0; i < m_; ++i) {
      const auto& r = lp.rows[i];
      double big = 0.0;
      for (double v : r.value) big = std::max(big, std::fabs(v));
      if (big > 0.0) row_scale_[i] = std::ldexp(1.0, -std::ilogb(big));
      for (std::size_t k = 0; k < r.index.size(); ++k) {
        if (r.value[k] != 0.0) cols_[r.index[k]].push_back({i, r.value[k] * row_scale_[i]});
      }
    }
    // Merge duplicate (row, col) entries.
    for (auto& col : cols_) {
      std::sort(col.begin(), col.end(), [](const Entry& a, const Entry& b) { return a.row < b.row; });
      std::vector<Entry> merged;
      for (const auto& e : col) {
        if (!merged.empty() && merged.back().row == e.row) {
          merged.back().value += e.value;
        } else {
          merged.push_back(e);
        }
      }
      col = std::move(merged);
    }
    cost_.assign(static_cast<std::size_t>(total_), 0.0);
    lo_.assign(static_cast<std::size_t>(total_), 0.0);
    hi_.assign(static_cast<std::size_t>(total_), 0.0);
    for (int j = 0; j < n_; ++j) {
      cost_[j] = sign_ * lp.objective[j];
      lo_[j] = lp.lower[j];
      hi_[j] = lp.upper[j];
    }
    for (int i = 0; i < m_; ++i) {
      const auto& r = lp.rows[i];
      const int j = n_ + i;
      const double rhs = r.rhs * row_scale_[i];
      switch (r.sense) {
        case Sense::GreaterEqual: lo_[j] = rhs; hi_[j] = kInf; break;
        case Sense::LessEqual: lo_[j] = -kInf; hi_[j] = rhs; break;
        case Sense::Equal: lo_[j] = rhs; hi_[j] = rhs; break;
      }
    }
    x_.assign(static_cast<std::size_t>(total_), 0.0);
    st_.assign(static_cast<std::size_t>(total_), BasisStatus::AtLower);
    head_.assign(static_cast<std::size_t>(m_), -1);
    pos_.assign(static_cast<std::size_t>(total_), -1);

    bool ok = false;
    if (warm != nullptr && static_cast<int>(warm->cols.size()) == n_ &&
        static_cast<int>(warm->rows.size()) <= m_) {
      ok = load_basis(*warm);
    }
    if (!ok) load_slack_basis();
  }

  SolveOutcome run(long iteration_limit) {
    const auto start = Clock::now();
    if (iteration_limit <= 0) iteration_limit = 20000 + 50L * (n_ + m_);
    long degenerate_run = 0;
    bool bland = false;
    long since_refactor = 0;
    long iter = 0;
    const long bland_trigger = 2L * (n_ + m_);
    std::vector<double> cb(static_cast<std::size_t>(m_));
    std::vector<double> y(static_cast<std::size_t>(m_));
    std::vector<double> alpha(static_cast<std::size_t>(m_));

    SolveOutcome out;
    for (;;) {
      if (iter >= iteration_limit) {
        throw Error(ErrorCode::NumericalFailure,
                    "simplex pivot limit " + std::to_string(iteration_limit) + " reached (" +
                        std::to_string(m_) + " rows, " + std::to_string(n_) +
                        " cols, infeasibility " + std::to_string(infeasibility()) + ")");
      }
      const bool phase1 = infeasibility() > 0.0;
      for (int k = 0; k < m_; ++k) {
        const int j = head_[k];
        if (phase1) {
          cb[k] = below(j) ? -1.0 : (above(j) ? 1.0 : 0.0);
        } else {
          cb[k] = cost_[j];
        }
      }
      compute_y(cb, y);

      const int q = price(y, phase1, bland);
      if (q < 0) {
        // Confirm on a fresh factorization before concluding.
        if (since_refactor > 0) {
          if (!refactor()) recover_basis();
          since_refactor = 0;
          continue;
        }
        if (phase1) {
          out.status = SolveStatus::Infeasible;
          out.ray = y;
          for (int i = 0; i < m_; ++i) out.ray[i] *= row_scale_[i];
        } else {
          out.status = SolveStatus::Optimal;
          fill_optimal(y, out);
        }
        break;
      }

      const double dq = reduced_cost(q, phase1, y);
      double dir = dq < 0.0 ? 1.0 : -1.0;
      if (st_[q] == BasisStatus::AtUpper) dir = -1.0;
      if (st_[q] == BasisStatus::AtLower) dir = 1.0;
      ftran(q, alpha);

      // Ratio test, Harris two-pass: first find the largest step that keeps
      // every blocking basic within a small tolerance of its bound, then pick
      // the largest pivot among rows blocking no later than that step.
      auto blocking = [&](int k, double& target, double& rate) -> bool {
        const double a = alpha[k];
        if (std::fabs(a) < kPivotTol) return false;
        rate = -dir * a;
        const int j = head_[k];
        if (rate < 0.0) {
          if (phase1 && above(j)) {
            target = hi_[j];
          } else if (phase1 && below(j)) {
            return false;
          } else {
            if (lo_[j] == -kInf) return false;
            target = lo_[j];
          }
        } else {
          if (phase1 && below(j)) {
            target = lo_[j];
          } else if (phase1 && above(j)) {
            return false;
          } else {
            if (hi_[j] == kInf) return false;
            target = hi_[j];
          }
        }
        return true;
      };
      int leave = -1;
      double best_t = kInf;
      double leave_target = 0.0;
      if (bland) {
        for (int k = 0; k < m_; ++k) {
          double target, rate;
          if (!blocking(k, target, rate)) continue;
          const double t = std::max(0.0, std::fabs(x_[head_[k]] - target)) / std::fabs(rate);
          if (leave < 0 || t < best_t - 1e-12 ||
              (t <= best_t + 1e-12 && head_[k] < head_[leave])) {
            leave = k;
            best_t = t;
            leave_target = target;
          }
        }
      } else {
        double relaxed = kInf;
        for (int k = 0; k < m_; ++k) {
          double target, rate;
          if (!blocking(k, target, rate)) continue;
          const double tol = 0.5 * ptol(head_[k], target);
          const double t = (std::max(0.0, std::fabs(x_[head_[k]] - target)) + tol) / std::fabs(rate);
          relaxed = std::min(relaxed, t);
        }
        double best_piv = 0.0;
        for (int k = 0; k < m_; ++k) {
          double target, rate;
          if (!blocking(k, target, rate)) continue;
          const double t = std::max(0.0, std::fabs(x_[head_[k]] - target)) / std::fabs(rate);
          if (t > relaxed) continue;
          if (std::fabs(alpha[k]) > best_piv) {
            best_piv = std::fabs(alpha[k]);
            leave = k;
            best_t = t;
            leave_target = target;
          }
        }
      }
      const double range = hi_[q] - lo_[q];
      const bool can_flip = std::isfinite(range);
      if (leave < 0 && !can_flip) {
        if (phase1) {
          if (!refactor()) recover_basis();
          since_refactor = 0;
          ++iter;
          continue;
        }
        out.status = SolveStatus::Unbounded;
        out.ray.assign(static_cast<std::size_t>(n_), 0.0);
        if (q < n_) out.ray[q] = dir;
        for (int k = 0; k < m_; ++k) {
          if (head_[k] < n_) out.ray[head_[k]] = -dir * alpha[k];
        }
        out.primal.assign(x_.begin(), x_.begin() + n_);
        break;
      }

      ++iter;
      if (can_flip && (leave < 0 || range <= best_t)) {
        // Bound flip of the entering column; the basis is unchanged.
        const double t = range;
        x_[q] = dir > 0 ? hi_[q] : lo_[q];
        st_[q] = dir > 0 ? BasisStatus::AtUpper : BasisStatus::AtLower;
        for (int k = 0; k < m_; ++k) x_[head_[k]] += -dir * alpha[k] * t;
        degenerate_run = 0;
        bland = false;
        continue;
      }

      const double t = best_t;
      x_[q] += dir * t;
      for (int k = 0; k < m_; ++k) x_[head_[k]] += -dir * alpha[k] * t;
      const int jl = head_[leave];
      x_[jl] = leave_target;
      st_[jl] = (leave_target == lo_[jl]) ? BasisStatus::AtLower : BasisStatus::AtUpper;
      pos_[jl] = -1;
      head_[leave] = q;
      pos_[q] = leave;
      st_[q] = BasisStatus::Basic;
      update_inverse(leave, alpha);
      ++since_refactor;

      if (t <= kDegenerateStep) {
        if (++degenerate_run >= bland_trigger) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
      if (since_refactor >= kRefactorEvery) {
        if (!refactor()) recover_basis();
        since_refactor = 0;
      }
    }
    out.iterations = iter;
    out.basis = basis();
    out.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    return out;
  }

 private:
  double ptol(int j, double bound) const {
    (void)j;
    return 1e-9 * std::max(1.0, std::fabs(bound));
  }
  bool below(int j) const { return lo_[j] != -kInf && x_[j] < lo_[j] - ptol(j, lo_[j]); }
  bool above(int j) const { return hi_[j] != kInf && x_[j] > hi_[j] + ptol(j, hi_[j]); }

  double infeasibility() const {
    double s = 0.0;
    for (int k = 0; k < m_; ++k) {
      const int j = head_[k];
      if (below(j)) s += lo_[j] - x_[j];
      else if (above(j)) s += x_[j] - hi_[j];
    }
    return s;
  }

  template <typename F>
  void for_column(int j, F&& f) const {
    if (j < n_) {
      for (const auto& e : cols_[j]) f(e.row, e.value);
    } else {
      f(j - n_, -1.0);
    }
  }

  void compute_y(const std::vector<double>& cb, std::vector<double>& y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (int k = 0; k < m_; ++k) {
      const double c = cb[k];
      if (c == 0.0) continue;
      const double* row = &binv_[static_cast<std::size_t>(k) * m_];
      for (int i = 0; i < m_; ++i) y[i] += c * row[i];
    }
  }

  double reduced_cost(int j, bool phase1, const std::vector<double>& y) const {
    double d = phase1 ? 0.0 : cost_[j];
    for_column(j, [&](int i, double v) { d -= y[i] * v; });
    return d;
  }

  int price(const std::vector<double>& y, bool phase1, bool bland) const {
    int best = -1;
    double best_score = 0.0;
    for (int j = 0; j < total_; ++j) {
      const auto s = st_[j];
      if (s == BasisStatus::Basic) continue;
      if (lo_[j] == hi_[j]) continue;
      const double d = reduced_cost(j, phase1, y);
      bool eligible = false;
      if (s == BasisStatus::AtLower) eligible = d < -kDualTol;
      else if (s == BasisStatus::AtUpper) eligible = d > kDualTol;
      else eligible = std::fabs(d) > kDualTol;
      if (!eligible) continue;
      if (bland) return j;
      if (std::fabs(d) > best_score) {
        best_score = std::fabs(d);
        best = j;
      }
    }
    return best;
  }

  void ftran(int q, std::vector<double>& alpha) const {
    std::fill(alpha.begin(), alpha.end(), 0.0);
    for_column(q, [&](int i, double v) {
      for (int k = 0; k < m_; ++k) alpha[k] += binv_[static_cast<std::size_t>(k) * m_ + i] * v;
    });
  }

  void update_inverse(int r, const std::vector<double>& alpha) {
    const std::size_t m = static_cast<std::size_t>(m_);
    double* pr = &binv_[static_cast<std::size_t>(r) * m];
    const double inv = 1.0 / alpha[r];
    for (std::size_t i = 0; i < m; ++i) pr[i] *= inv;
    for (int k = 0; k < m_; ++k) {
      if (k == r) continue;
      const double f = alpha[k];
      if (f == 0.0) continue;
      double* rk = &binv_[static_cast<std::size_t>(k) * m];
      for (std::size_t i = 0; i < m; ++i) rk[i] -= f * pr[i];
    }
  }

  // Gauss-Jordan inversion of the current basis matrix. Returns false if
  // the basis is numerically singular.
  bool refactor() {
    const std::size_t m = static_cast<std::size_t>(m_);
    std::vector<double> b(m * m, 0.0);
    for (int k = 0; k < m_; ++k) {
      for_column(head_[k], [&](int i, double v) { b[static_cast<std::size_t>(i) * m + k] = v; });
    }
    binv_.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) binv_[i * m + i] = 1.0;
    for (std::size_t c = 0; c < m; ++c) {
      std::size_t piv = c;
      double best = std::fabs(b[c * m + c]);
      for (std::size_t r = c + 1; r < m; ++r) {
        const double v = std::fabs(b[r * m + c]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best < 1e-11) return false;
      if (piv != c) {
        for (std::size_t k = 0; k < m; ++k) {
          std::swap(b[c * m + k], b[piv * m + k]);
          std::swap(binv_[c * m + k], binv_[piv * m + k]);
        }
      }
      const double inv = 1.0 / b[c * m + c];
      for (std::size_t k = 0; k < m; ++k) {
        b[c * m + k] *= inv;
        binv_[c * m + k] *= inv;
      }
      for (std::size_t r = 0; r < m; ++r) {
        if (r == c) continue;
        const double f = b[r * m + c];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m; ++k) {
          b[r * m + k] -= f * b[c * m + k];
          binv_[r * m + k] -= f * binv_[c * m + k];
        }
      }
    }
    // binv_ rows are indexed by basis position because column k of B
    // corresponds to head_[k]: B^{-1} row k gives x_B[k].
    recompute_basics();
    return true;
  }

  void recompute_basics() {
    std::vector<double> r(static_cast<std::size_t>(m_), 0.0);
    for (int j = 0; j < total_; ++j) {
      if (st_[j] == BasisStatus::Basic || x_[j] == 0.0) continue;
      const double v = x_[j];
      for_column(j, [&](int i, double a) { r[i] -= a * v; });
    }
    for (int k = 0; k < m_; ++k) {
      double s = 0.0;
      const double* row = &binv_[static_cast<std::size_t>(k) * m_];
      for (int i = 0; i < m_; ++i) s += row[i] * r[i];
      x_[head_[k]] = s;
    }
  }

  void set_nonbasic(int j, BasisStatus hint) {
    BasisStatus s = hint;
    if (s == BasisStatus::AtLower && lo_[j] == -kInf) s = BasisStatus::AtUpper;
    if (s == BasisStatus::AtUpper && hi_[j] == kInf) s = BasisStatus::AtLower;
    if (s == BasisStatus::AtLower && lo_[j] == -kInf) s = BasisStatus::AtZero;
    if (s == BasisStatus::AtZero && lo_[j] != -kInf) s = BasisStatus::AtLower;
    if (s == BasisStatus::AtZero && hi_[j] != kInf) s = BasisStatus::AtUpper;
    st_[j] = s;
    pos_[j] = -1;
    x_[j] = s == BasisStatus::AtLower ? lo_[j] : (s == BasisStatus::AtUpper ? hi_[j] : 0.0);
  }

  void load_slack_basis() {
    for (int j = 0; j < n_; ++j) set_nonbasic(j, BasisStatus::AtLower);
    for (int i = 0; i < m_; ++i) {
      const int j = n_ + i;
      st_[j] = BasisStatus::Basic;
      head_[i] = j;
      pos_[j] = i;
    }
    // B = -I, so B^{-1} = -I.
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) binv_[static_cast<std::size_t>(i) * m_ + i] = -1.0;
    recompute_basics();
  }

  bool load_basis(const Basis& warm) {
    int count = 0;
    for (int j = 0; j < n_; ++j) count += warm.cols[j] == BasisStatus::Basic;
    for (std::size_t i = 0; i < warm.rows.size(); ++i) count += warm.rows[i] == BasisStatus::Basic;
    count += m_ - static_cast<int>(warm.rows.size());
    if (count != m_) return false;
    int k = 0;
    for (int j = 0; j < total_; ++j) {
      BasisStatus s;
      if (j < n_) s = warm.cols[j];
      else if (j - n_ < static_cast<int>(warm.rows.size())) s = warm.rows[j - n_];
      else s = BasisStatus::Basic;
      if (s == BasisStatus::Basic) {
        st_[j] = BasisStatus::Basic;
        head_[k] = j;
        pos_[j] = k;
        ++k;
      } else {
        set_nonbasic(j, s);
      }
    }
    if (!refactor()) {
      std::fill(head_.begin(), head_.end(), -1);
      std::fill(pos_.begin(), pos_.end(), -1);
      return false;
    }
    return true;
  }

  void recover_basis() {
    load_slack_basis();
  }

  void fill_optimal(const std::vector<double>& y, SolveOutcome& out) const {
    out.primal.assign(x_.begin(), x_.begin() + n_);
    double obj = lp_.objective_constant;
    for (int j = 0; j < n_; ++j) obj += lp_.objective[j] * x_[j];
    out.objective = obj;
    out.duals.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) out.duals[i] = sign_ * y[i] * row_scale_[i];
    out.reduced_costs.resize(static_cast<std::size_t>(n_));
    for (int j = 0; j < n_; ++j) out.reduced_costs[j] = sign_ * reduced_cost(j, false, y);
  }

  Basis basis() const {
    Basis b;
    b.cols.assign(st_.begin(), st_.begin() + n_);
    b.rows.assign(st_.begin() + n_, st_.end());
    return b;
  }

  const LinearProgram& lp_;
  int n_ = 0;
  int m_ = 0;
  int total_ = 0;
  double sign_ = 1.0;
  std::vector<std::vector<Entry>> cols_;
  std::vector<double> cost_, lo_, hi_, x_, row_scale_;
  std::vector<BasisStatus> st_;
  std::vector<int> head_, pos_;
  std::vector<double> binv_;
};

}  // namespace

SolveOutcome solve_lp(const LinearProgram& lp, const LpOptions& options) {
  lp.validate();
  if (options.warm_start != nullptr) {
    // A stalled warm start is retried once from the slack basis.
    try {
      DenseSimplex simplex(lp, options.warm_start);
      return simplex.run(options.iteration_limit);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NumericalFailure) throw;
    }
  }
  DenseSimplex simplex(lp, nullptr);
  return simplex.run(options.iteration_limit);
}

void write_lp_text(const LinearProgram& lp, std::ostream& out, const std::vector<VarType>* types) {
  auto name = [&](int j) {
    return lp.names.empty() || lp.names[j].empty() ? "x" + std::to_string(j) : lp.names[j];
  };
  auto num = [](double v) {
    if (v == kInf) return std::string("inf");
    if (v == -kInf) return std::string("-inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << (lp.maximize ? "maximize" : "minimize") << '\n' << "  obj:";
  for (int j = 0; j < lp.num_cols(); ++j) {
    if (lp.objective[j] != 0.0) out << ' ' << num(lp.objective[j]) << ' ' << name(j);
  }
  if (lp.objective_constant != 0.0) out << " + " << num(lp.objective_constant);
  out << "\nsubject to\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    const auto& r = lp.rows[i];
    out << "  r" << i << ':';
    for (std::size_t k = 0; k < r.index.size(); ++k) {
      out << ' ' << num(r.value[k]) << ' ' << name(r.index[k]);
    }
    out << (r.sense == Sense::GreaterEqual ? " >= " : r.sense == Sense::LessEqual ? " <= " : " = ")
        << num(r.rhs) << '\n';
  }
  out << "bounds\n";
  for (int j = 0; j < lp.num_cols(); ++j) {
    out << "  " << num(lp.lower[j]) << " <= " << name(j) << " <= " << num(lp.upper[j]) << '\n';
  }
  if (types != nullptr) {
    out << "integer\n";
    for (int j = 0; j < lp.num_cols(); ++j) {
      if ((*types)[j] != VarType::Continuous) out << "  " << name(j) << '\n';
    }
  }
  out << "end\n";
}

}  // namespace lagcut
