#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Everything here works from explicit enumeration of the first-stage set so
// that it shares no code path with the decomposition machinery.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "lagcut/lagrangian.hpp"
#include "lagcut/model.hpp"

namespace lagcut::oracle {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double v = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) v += a[i] * b[i];
  return v;
}

/// Qbar_s(pi, pi0) as a minimum over the full epigraph list (exact when the
/// first-stage set is finite).
inline double qbar(const std::vector<EpigraphPoint>& epi, std::span<const double> pi, double pi0) {
  double best = kInf;
  for (const auto& pt : epi) best = std::min(best, dot(pi, pt.x) + pi0 * pt.theta);
  return best;
}

inline double violation(const std::vector<EpigraphPoint>& epi, std::span<const double> pi,
                        double pi0, std::span<const double> x_hat, double theta_hat) {
  return qbar(epi, pi, pi0) - dot(pi, x_hat) - pi0 * theta_hat;
}

inline std::vector<double> combine(const std::vector<std::vector<double>>& basis,
                                   std::span<const double> lambda, int n) {
  std::vector<double> pi(n, 0.0);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    for (int i = 0; i < n; ++i) pi[i] += lambda[k] * basis[k][i];
  }
  return pi;
}

/// Maximum violation over a grid of the normalized boundary of Pi for a
/// basis of exactly two vectors. By positive homogeneity the maximum over
/// the whole set is max(0, maximum over that boundary). Lambda runs over a
/// square grid covering the feasible lambda box with spacing step * box
/// (box = 1 for the lambda norm); pi0 is the value that makes the
/// normalization tight.
inline double grid_max_two_basis(const std::vector<EpigraphPoint>& epi,
                                 const std::vector<std::vector<double>>& basis, NormKind kind,
                                 double alpha, std::span<const double> x_hat, double theta_hat,
                                 double step) {
  const int n = static_cast<int>(x_hat.size());
  // Precompute the per-point linear data: value = l0*g0 + l1*g1 + pi0*theta.
  struct Row {
    double g0, g1, theta;
  };
  std::vector<Row> rows;
  rows.reserve(epi.size());
  for (const auto& pt : epi) rows.push_back({dot(basis[0], pt.x), dot(basis[1], pt.x), pt.theta});
  const double h0 = dot(basis[0], x_hat);
  const double h1 = dot(basis[1], x_hat);
  double box = 1.0;
  if (kind == NormKind::SpanPiNorm) {
    // Largest |lambda|_inf with ||sum lambda_k v^k||_1 <= 1.
    double smallest = kInf;
    for (int a = 0; a < 3600; ++a) {
      const double t = 2.0 * 3.141592653589793 * a / 3600.0;
      double l0 = std::cos(t), l1 = std::sin(t);
      const double m = std::max(std::fabs(l0), std::fabs(l1));
      l0 /= m;
      l1 /= m;
      const std::vector<double> lam{l0, l1};
      const auto pi = combine(basis, lam, n);
      double norm = 0.0;
      for (double v : pi) norm += std::fabs(v);
      smallest = std::min(smallest, norm);
    }
    box = smallest > 1e-12 ? 1.05 / smallest : 0.0;
  }
  const long steps = std::lround(1.0 / step);
  const double h = box * step;
  double best = 0.0;
  for (long a = -steps; a <= steps; ++a) {
    const double l0 = a * h;
    for (long b = -steps; b <= steps; ++b) {
      const double l1 = b * h;
      double norm = 0.0;
      if (kind == NormKind::SpanPiNorm) {
        for (int i = 0; i < n; ++i) norm += std::fabs(l0 * basis[0][i] + l1 * basis[1][i]);
      } else {
        norm = std::fabs(l0) + std::fabs(l1);
      }
      if (norm > 1.0) continue;
      const double pi0 = (1.0 - norm) / alpha;
      double q = kInf;
      for (const auto& r : rows) q = std::min(q, l0 * r.g0 + l1 * r.g1 + pi0 * r.theta);
      best = std::max(best, q - l0 * h0 - l1 * h1 - pi0 * theta_hat);
    }
  }
  return best;
}

/// Smallest slack of a cut over an epigraph list.
inline double min_slack(const Cut& cut, const std::vector<EpigraphPoint>& epi) {
  double worst = kInf;
  for (const auto& pt : epi) worst = std::min(worst, -cut.violation(pt.x, pt.theta));
  return worst;
}

}  // namespace lagcut::oracle
