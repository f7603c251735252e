#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lagcut {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Coordinate-format sparse matrix. Entries are kept sorted by (row, col)
/// with duplicates summed and explicit zeros dropped, so two matrices with
/// the same mathematical content compare equal.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols) {}
  SparseMatrix(int rows, int cols, std::vector<Triplet> entries);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  const std::vector<Triplet>& entries() const noexcept { return entries_; }

  /// Entries of row r as a contiguous sub-span.
  std::span<const Triplet> row(int r) const;

  /// y = M x
  std::vector<double> multiply(std::span<const double> x) const;
  /// y = M^T u
  std::vector<double> multiply_transpose(std::span<const double> u) const;

  SparseMatrix transpose() const;
  double at(int r, int c) const;

  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
  }

 private:
  void canonicalize();
  void build_row_index();

  int rows_ = 0;
  int cols_ = 0;
  std::vector<Triplet> entries_;
  std::vector<std::size_t> row_start_;
};

}  // namespace lagcut
