#pragma once

// Lagrangian cuts  pi^T x + pi0 theta_s >= Qbar_s(pi, pi0)  with
//   Qbar_s(pi, pi0) = min { pi^T x + pi0 q_s^T y : (x, y) in K^s },
// separated over a compact multiplier set Pi_s by a cutting-plane method on
// the concave function Qbar_s, modelled from above by a pool of epigraph
// points.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "lagcut/benders.hpp"
#include "lagcut/model.hpp"

namespace lagcut {

/// Finite subset of the epigraph E^s. Points are keyed by x; a repeated x
/// keeps the smallest theta.
class EpigraphPool {
 public:
  EpigraphPool() = default;

  /// Returns true when the pool changed.
  bool add(std::span<const double> z, double theta);
  const std::vector<EpigraphPoint>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

 private:
  std::vector<EpigraphPoint> points_;
  std::map<std::vector<long long>, std::size_t> index_;
};

/// Pool seeded with every incumbent of the perfect-information problem
/// min { c^T x + q_s^T y : (x, y) in K^s }.
EpigraphPool init_epigraph_pool(const SipInstance& inst, int s);

struct QbarValue {
  double value = 0.0;
  std::vector<double> x;       // argmin first-stage part
  double recourse_cost = 0.0;  // q_s^T y at the argmin
};

/// Exact MIP evaluation of Qbar_s. When pool is given, every incumbent of the
/// solve is added; for pi0 < 1e-4 their theta is recomputed as Q_s(z).
/// (x, recourse_cost) is a supergradient of Qbar_s at (pi, pi0).
QbarValue eval_qbar(const SipInstance& inst, int s, std::span<const double> pi, double pi0,
                    EpigraphPool* pool = nullptr);

/// min over the pool of pi^T z + pi0 theta. Throws NotInitialized when empty.
double eval_qstar_model(const EpigraphPool& pool, std::span<const double> pi, double pi0);

enum class NormKind : std::uint8_t {
  ExactBall,       // alpha pi0 + ||pi||_1 <= 1
  SpanPiNorm,      // pi = sum lambda_k v^k, alpha pi0 + ||pi||_1 <= 1
  SpanLambdaNorm,  // pi = sum lambda_k v^k, alpha pi0 + ||lambda||_1 <= 1
};
const char* to_string(NormKind kind);

struct NormalizationSpec {
  NormKind kind = NormKind::ExactBall;
  std::vector<std::vector<double>> basis;  // ignored by ExactBall
  double alpha = 1.0;
};

/// Basis = the last K distinct vectors of recent_benders (given oldest
/// first), stored most recent first.
NormalizationSpec build_normalization(NormKind kind,
                                      const std::vector<std::vector<double>>& recent_benders,
                                      int K, double alpha);

struct SeparationOptions {
  double delta = 0.5;
  int max_oracle_calls = 100;
  /// Box trust region around the incumbent multiplier; defaults to on for
  /// ExactBall only.
  std::optional<bool> trust_region;
};

struct SeparationStep {
  int oracle_call = 0;
  double upper = 0.0;
  double lower = 0.0;
};

struct SeparationResult {
  std::vector<double> pi;
  double pi0 = 0.0;
  double rhs = 0.0;        // Qbar_s(pi, pi0), certified by the MIP oracle
  double violation = 0.0;  // rhs - pi^T x^ - pi0 theta^
  double upper_bound = 0.0;
  int iterations = 0;
  int oracle_calls = 0;
  bool limit_reached = false;
  std::vector<SeparationStep> trace;

  Cut to_cut(int scenario, int born_at) const;
};

/// Cutting-plane maximization of Qbar_s(pi,pi0) - pi^T x^ - pi0 theta^ over
/// Pi_s. Returns nothing unless the violation found exceeds 1e-9 (1 + |theta^|).
std::optional<SeparationResult> separate_restricted(const SipInstance& inst, int s,
                                                    std::span<const double> x_hat,
                                                    double theta_hat,
                                                    const NormalizationSpec& spec,
                                                    EpigraphPool& pool,
                                                    const SeparationOptions& options = {});

/// CSV: oracle_call,upper,lower
void write_separation_trace(const SeparationResult& result, std::ostream& out);

struct BasisSelection {
  std::vector<std::vector<double>> basis;
  double ub = 0.0;  // optimum of the selection MIP over the pool model
  bool limit_reached = false;
};

/// Chooses at most K of the candidate vectors by the mixed-integer model of
/// the lambda-norm separation problem over the pool model.
BasisSelection select_basis_mip(const EpigraphPool& pool,
                                const std::vector<std::vector<double>>& candidates,
                                std::span<const double> x_hat, double theta_hat, int K,
                                double alpha);

/// Lagrangian optimality cut with lambda equal to the Benders coefficients:
/// coef_x^T x + theta_s >= Qbar_s(coef_x, 1). Its rhs is never below the
/// parent's.
Cut strengthen_benders(const SipInstance& inst, int s, const Cut& benders, EpigraphPool* pool);

/// Lagrangian feasibility cut lambda^T x >= min{1^T v + 1^T u + lambda^T x}
/// over the slacked scenario set. Returned only when it cuts off x^.
std::optional<Cut> separate_feasibility(const SipInstance& inst, int s,
                                        std::span<const double> x_hat,
                                        std::span<const double> lambda);

}  // namespace lagcut
