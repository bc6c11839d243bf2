#include "scnn/dense.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "scnn/threading.hpp"

namespace scnn {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw std::invalid_argument(
        "DenseMatrix: values length " + std::to_string(values_.size()) +
        " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

bool DenseMatrix::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix out(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out(c, r) = m(r, c);
    }
  }
  return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument(
        "matmul: inner dimensions differ, " + std::to_string(a.cols()) +
        " vs " + std::to_string(b.rows()));
  }
  DenseMatrix out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  parallel_for(a.rows(), [&](std::size_t r0, std::size_t r1) {
    for (std::size_t i = r0; i < r1; ++i) {
      double* __restrict dst = out.data() + i * n;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        const double w = a(i, k);
        const double* __restrict src = b.data() + k * n;
        for (std::size_t j = 0; j < n; ++j) dst[j] += w * src[j];
      }
    }
  });
  return out;
}

}  // namespace scnn
