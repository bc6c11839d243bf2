#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "scnn/dense.hpp"

namespace scnn {

struct Edge {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix. Within each row, column indices are strictly
/// increasing; row_ptr[0] == 0 and row_ptr[rows] == nnz.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t rows, std::size_t cols,
            std::vector<std::uint64_t> row_ptr,
            std::vector<std::uint32_t> col_idx, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::uint64_t> row_ptr() const { return row_ptr_; }
  std::span<const std::uint32_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }
  /// Training updates edge weights in place; the structure arrays never change.
  std::span<double> values_mut() { return values_; }

  template <typename Fn>  // fn(row, col, value)
  void for_each_edge(Fn&& fn) const {
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        fn(r, static_cast<std::size_t>(col_idx_[k]), values_[k]);
      }
    }
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint64_t> row_ptr_{0};
  std::vector<std::uint32_t> col_idx_;
  std::vector<double> values_;
};

/// Builds a CSR matrix from an unordered edge list. Throws
/// std::invalid_argument on an out-of-range index or a duplicate (row, col)
/// pair, naming the offending pair.
CsrMatrix csr_from_edges(std::size_t rows, std::size_t cols,
                         std::span<const Edge> edges);

/// a * b for sparse a and dense b. Per output element the present terms are
/// accumulated in ascending column order; row ranges may be computed on
/// different threads, which does not change any per-element sum.
DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& b);

/// transpose(a) * b without materializing the transpose. Requires
/// a.rows() == b.rows().
DenseMatrix spmm_transpose(const CsrMatrix& a, const DenseMatrix& b);

}  // namespace scnn
