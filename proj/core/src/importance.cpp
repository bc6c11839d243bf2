#include "scnn/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "scnn/eig.hpp"
#include "scnn/errors.hpp"
#include "scnn/text.hpp"
#include "scnn/threading.hpp"

namespace scnn {

PcaModel pca_fit(const DenseMatrix& x) {
  const std::size_t samples = x.rows();
  const std::size_t features = x.cols();
  if (samples < 2) {
    throw std::invalid_argument("pca_fit: need at least 2 samples");
  }
  if (!x.all_finite()) {
    throw std::invalid_argument("pca_fit: input contains non-finite values");
  }

  PcaModel model;
  model.mean.assign(features, 0.0);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto row = x.row(i);
    for (std::size_t j = 0; j < features; ++j) model.mean[j] += row[j];
  }
  for (double& m : model.mean) m /= static_cast<double>(samples);

  // Upper triangle of the sample covariance, mirrored afterwards.
  DenseMatrix cov(features, features);
  parallel_for(features, [&](std::size_t f0, std::size_t f1) {
    for (std::size_t a = f0; a < f1; ++a) {
      for (std::size_t i = 0; i < samples; ++i) {
        const auto row = x.row(i);
        const double da = row[a] - model.mean[a];
        for (std::size_t b = a; b < features; ++b) {
          cov(a, b) += da * (row[b] - model.mean[b]);
        }
      }
    }
  });
  const double divisor = static_cast<double>(samples - 1);
  for (std::size_t a = 0; a < features; ++a) {
    for (std::size_t b = a; b < features; ++b) {
      cov(a, b) /= divisor;
      cov(b, a) = cov(a, b);
    }
  }

  SymEig eig = sym_eig(cov);
  for (double& lambda : eig.eigenvalues) {
    if (lambda < 0.0) {
      if (lambda < -1e-10) {
        throw NumericError("pca_fit: covariance eigenvalue " +
                           std::to_string(lambda) + " below numerical noise");
      }
      lambda = 0.0;
    }
  }
  model.components = std::move(eig.eigenvectors);
  model.eigenvalues = std::move(eig.eigenvalues);
  return model;
}

DenseMatrix pca_transform(const PcaModel& model, const DenseMatrix& x) {
  if (x.cols() != model.feature_count()) {
    throw std::invalid_argument("pca_transform: expected " +
                                std::to_string(model.feature_count()) +
                                " features, got " + std::to_string(x.cols()));
  }
  DenseMatrix centered(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      centered(i, j) = x(i, j) - model.mean[j];
    }
  }
  return matmul(centered, model.components);
}

ImportanceOrdering make_ordering(std::span<const double> scores,
                                 Direction direction) {
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw std::invalid_argument("make_ordering: non-finite score");
    }
  }
  ImportanceOrdering ordering;
  ordering.scores.assign(scores.begin(), scores.end());
  ordering.direction = direction;
  ordering.permutation.resize(scores.size());
  std::iota(ordering.permutation.begin(), ordering.permutation.end(),
            std::size_t{0});
  // stable_sort keeps the lower original index first on ties.
  if (direction == Direction::Descending) {
    std::stable_sort(ordering.permutation.begin(), ordering.permutation.end(),
                     [&](std::size_t a, std::size_t b) {
                       return scores[a] > scores[b];
                     });
  } else {
    std::stable_sort(ordering.permutation.begin(), ordering.permutation.end(),
                     [&](std::size_t a, std::size_t b) {
                       return scores[a] < scores[b];
                     });
  }
  return ordering;
}

DenseMatrix apply_ordering(const DenseMatrix& x,
                           const ImportanceOrdering& ordering) {
  if (x.cols() != ordering.permutation.size()) {
    throw std::invalid_argument("apply_ordering: matrix has " +
                                std::to_string(x.cols()) +
                                " columns, ordering expects " +
                                std::to_string(ordering.permutation.size()));
  }
  DenseMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto src = x.row(i);
    auto dst = out.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      dst[j] = src[ordering.permutation[j]];
    }
  }
  return out;
}

void write_importance_csv(const ImportanceOrdering& ordering,
                          std::ostream& os) {
  std::vector<std::size_t> rank(ordering.permutation.size());
  for (std::size_t r = 0; r < ordering.permutation.size(); ++r) {
    rank[ordering.permutation[r]] = r;
  }
  os << "feature_index,score,rank\n";
  for (std::size_t f = 0; f < ordering.scores.size(); ++f) {
    os << f << ',' << fmt(ordering.scores[f]) << ',' << rank[f] << '\n';
  }
}

}  // namespace scnn
