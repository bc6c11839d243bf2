#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scnn/dense.hpp"
#include "scnn/rng.hpp"

namespace scnn {

/// Random forest hyperparameters. features_per_split == 0 means
/// ceil(sqrt(feature count)), resolved at fit time.
struct RfConfig {
  std::size_t num_trees = 50;
  std::size_t max_depth = 12;
  std::size_t min_samples_leaf = 5;
  std::size_t features_per_split = 0;
  double subsample_fraction = 0.8;
  RngSeed seed;
};

struct RfImportance {
  std::vector<double> scores;  // per original feature, sums to 1
  bool single_class = false;   // all-zero scores, input had one label
};

/// Mean decrease in Gini impurity per feature, averaged over trees and
/// normalized to sum to 1. Trees are grown on subsamples drawn without
/// replacement; splits use midpoint thresholds between adjacent distinct
/// values. Deterministic given cfg.seed (per-tree derived streams, fixed
/// aggregation order).
RfImportance rf_importance(const DenseMatrix& x, std::span<const int> labels,
                           const RfConfig& cfg);

}  // namespace scnn
