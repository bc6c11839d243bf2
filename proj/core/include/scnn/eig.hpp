#pragma once

#include <vector>

#include "scnn/dense.hpp"

namespace scnn {

struct SymEig {
  std::vector<double> eigenvalues;  // descending
  DenseMatrix eigenvectors;         // column i pairs with eigenvalues[i]
};

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Sweeps until the off-diagonal Frobenius norm drops below tol times the
/// Frobenius norm of the input. Eigenvalues come back sorted descending and
/// each eigenvector is signed so its largest-magnitude component is
/// non-negative. Throws std::invalid_argument for non-square input or
/// asymmetry beyond 1e-10.
SymEig sym_eig(const DenseMatrix& a, double tol = 1e-14);

}  // namespace scnn
