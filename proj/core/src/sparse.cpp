#include "lagcut/sparse.hpp"

#include <algorithm>
#include <string>

#include "lagcut/error.hpp"

namespace lagcut {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::ProbabilitySum: return "probability-sum";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::FirstStageInfeasible: return "first-stage-infeasible";
    case ErrorCode::UnboundedRecourse: return "unbounded-recourse";
    case ErrorCode::ScenarioInfeasible: return "scenario-infeasible";
    case ErrorCode::CapExceeded: return "cap-exceeded";
    case ErrorCode::NumericalFailure: return "numerical-failure";
    case ErrorCode::UnsupportedCut: return "unsupported-cut";
    case ErrorCode::NotInitialized: return "not-initialized";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::VersionMismatch: return "version-mismatch";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

SparseMatrix::SparseMatrix(int rows, int cols, std::vector<Triplet> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  for (const auto& t : entries_) {
    if (t.row < 0 || t.row >= rows_ || t.col < 0 || t.col >= cols_) {
      throw Error(ErrorCode::DimensionMismatch,
                  "sparse entry (" + std::to_string(t.row) + "," +
                      std::to_string(t.col) + ") outside " +
                      std::to_string(rows_) + "x" + std::to_string(cols_));
    }
  }
  canonicalize();
}

void SparseMatrix::canonicalize() {
  std::sort(entries_.begin(), entries_.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Triplet> merged;
  merged.reserve(entries_.size());
  for (const auto& t : entries_) {
    if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col) {
      merged.back().value += t.value;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Triplet& t) { return t.value == 0.0; });
  entries_ = std::move(merged);
  build_row_index();
}

void SparseMatrix::build_row_index() {
  row_start_.assign(static_cast<std::size_t>(rows_) + 1, 0);
  for (const auto& t : entries_) ++row_start_[static_cast<std::size_t>(t.row) + 1];
  for (std::size_t r = 0; r < static_cast<std::size_t>(rows_); ++r) {
    row_start_[r + 1] += row_start_[r];
  }
}

std::span<const Triplet> SparseMatrix::row(int r) const {
  if (row_start_.empty()) return {};
  const auto b = row_start_[static_cast<std::size_t>(r)];
  const auto e = row_start_[static_cast<std::size_t>(r) + 1];
  return std::span<const Triplet>(entries_).subspan(b, e - b);
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != cols_) {
    throw Error(ErrorCode::DimensionMismatch, "multiply: vector length mismatch");
  }
  std::vector<double> y(static_cast<std::size_t>(rows_), 0.0);
  for (const auto& t : entries_) y[t.row] += t.value * x[t.col];
  return y;
}

std::vector<double> SparseMatrix::multiply_transpose(std::span<const double> u) const {
  if (static_cast<int>(u.size()) != rows_) {
    throw Error(ErrorCode::DimensionMismatch, "multiply_transpose: vector length mismatch");
  }
  std::vector<double> y(static_cast<std::size_t>(cols_), 0.0);
  for (const auto& t : entries_) y[t.col] += t.value * u[t.row];
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(entries_.size());
  for (const auto& e : entries_) t.push_back({e.col, e.row, e.value});
  return SparseMatrix(cols_, rows_, std::move(t));
}

double SparseMatrix::at(int r, int c) const {
  for (const auto& t : row(r)) {
    if (t.col == c) return t.value;
  }
  return 0.0;
}

}  // namespace lagcut
