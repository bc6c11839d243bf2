#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "scnn/dense.hpp"

namespace scnn {

enum class Direction { Descending, Ascending };

/// Fitted PCA basis. Columns of components are unit principal directions
/// ordered by descending eigenvalue; all components are kept.
struct PcaModel {
  std::vector<double> mean;
  DenseMatrix components;
  std::vector<double> eigenvalues;

  std::size_t feature_count() const { return mean.size(); }
};

/// Feature permutation plus the score of each original feature position.
/// permutation[0] is the most (Descending) or least (Ascending) important
/// original index; ties keep the lower original index first.
struct ImportanceOrdering {
  std::vector<std::size_t> permutation;
  std::vector<double> scores;
  Direction direction = Direction::Descending;
};

/// Fits PCA on rows-as-samples data. Covariance uses divisor samples-1.
/// Eigenvalues within -1e-10 of zero are clipped to zero; anything more
/// negative reports a numeric failure.
PcaModel pca_fit(const DenseMatrix& x);

/// (x - mean) * components. Output columns are already in descending
/// importance order with scores eigenvalues[j].
DenseMatrix pca_transform(const PcaModel& model, const DenseMatrix& x);

ImportanceOrdering make_ordering(std::span<const double> scores,
                                 Direction direction);

/// Column j of the result is column permutation[j] of x.
DenseMatrix apply_ordering(const DenseMatrix& x,
                           const ImportanceOrdering& ordering);

/// CSV with header "feature_index,score,rank"; rank is the position in the
/// ordering's permutation.
void write_importance_csv(const ImportanceOrdering& ordering, std::ostream& os);

}  // namespace scnn
