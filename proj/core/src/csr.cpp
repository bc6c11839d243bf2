#include "scnn/csr.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "scnn/threading.hpp"

namespace scnn {

namespace {

std::string pair_str(std::size_t r, std::size_t c) {
  return "(" + std::to_string(r) + ", " + std::to_string(c) + ")";
}

}  // namespace

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols,
                     std::vector<std::uint64_t> row_ptr,
                     std::vector<std::uint32_t> col_idx,
                     std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 ||
      row_ptr_.back() != col_idx_.size() || col_idx_.size() != values_.size()) {
    throw std::invalid_argument("CsrMatrix: inconsistent structure arrays");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    if (row_ptr_[r] > row_ptr_[r + 1]) {
      throw std::invalid_argument("CsrMatrix: row_ptr not non-decreasing");
    }
    for (std::uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (col_idx_[k] >= cols_) {
        throw std::invalid_argument("CsrMatrix: column index out of range");
      }
      if (k > row_ptr_[r] && col_idx_[k - 1] >= col_idx_[k]) {
        throw std::invalid_argument(
            "CsrMatrix: columns not strictly increasing in row " +
            std::to_string(r));
      }
    }
  }
}

CsrMatrix csr_from_edges(std::size_t rows, std::size_t cols,
                         std::span<const Edge> edges) {
  for (const Edge& e : edges) {
    if (e.row >= rows || e.col >= cols) {
      throw std::invalid_argument("csr_from_edges: index out of range at " +
                                  pair_str(e.row, e.col));
    }
  }
  std::vector<Edge> sorted(edges.begin(), edges.end());
  std::sort(sorted.begin(), sorted.end(), [](const Edge& a, const Edge& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].row == sorted[i - 1].row &&
        sorted[i].col == sorted[i - 1].col) {
      throw std::invalid_argument("csr_from_edges: duplicate edge at " +
                                  pair_str(sorted[i].row, sorted[i].col));
    }
  }
  std::vector<std::uint64_t> row_ptr(rows + 1, 0);
  std::vector<std::uint32_t> col_idx(sorted.size());
  std::vector<double> values(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    row_ptr[sorted[i].row + 1]++;
    col_idx[i] = static_cast<std::uint32_t>(sorted[i].col);
    values[i] = sorted[i].value;
  }
  for (std::size_t r = 0; r < rows; ++r) row_ptr[r + 1] += row_ptr[r];
  return CsrMatrix(rows, cols, std::move(row_ptr), std::move(col_idx),
                   std::move(values));
}

DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("spmm: a.cols " + std::to_string(a.cols()) +
                                " != b.rows " + std::to_string(b.rows()));
  }
  DenseMatrix out(a.rows(), b.cols());
  const auto row_ptr = a.row_ptr();
  const auto col_idx = a.col_idx();
  const auto values = a.values();
  const std::size_t n = b.cols();
  parallel_for(a.rows(), [&](std::size_t r0, std::size_t r1) {
    for (std::size_t i = r0; i < r1; ++i) {
      double* __restrict dst = out.data() + i * n;
      for (std::uint64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
        const double w = values[k];
        const double* __restrict src = b.data() + col_idx[k] * n;
        for (std::size_t j = 0; j < n; ++j) dst[j] += w * src[j];
      }
    }
  });
  return out;
}

DenseMatrix spmm_transpose(const CsrMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("spmm_transpose: a.rows " +
                                std::to_string(a.rows()) + " != b.rows " +
                                std::to_string(b.rows()));
  }
  DenseMatrix out(a.cols(), b.cols());
  const auto row_ptr = a.row_ptr();
  const auto col_idx = a.col_idx();
  const auto values = a.values();
  const std::size_t n = b.cols();
  // Rows of a scatter into rows of out, so the parallel split is over output
  // columns; every thread walks the rows of a in the same ascending order.
  parallel_for(n, [&](std::size_t c0, std::size_t c1) {
    for (std::size_t r = 0; r < a.rows(); ++r) {
      const double* __restrict src = b.data() + r * n;
      for (std::uint64_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
        const double w = values[k];
        double* __restrict dst = out.data() + col_idx[k] * n;
        for (std::size_t j = c0; j < c1; ++j) dst[j] += w * src[j];
      }
    }
  });
  return out;
}

}  // namespace scnn
