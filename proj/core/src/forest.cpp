#include "scnn/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace scnn {

namespace {

double gini(std::span<const std::size_t> counts, std::size_t total) {
  double sum_sq = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

struct TreeBuilder {
  const DenseMatrix& x;
  std::span<const int> labels;
  const RfConfig& cfg;
  std::size_t num_classes;
  std::size_t features_per_split;
  std::size_t root_size;
  SplitMix64& eng;
  std::vector<double>& importance;  // accumulated for this tree

  std::vector<std::uint32_t> feature_pool;
  std::vector<std::pair<double, int>> scratch;  // (value, label)

  void grow(std::vector<std::size_t>& indices, std::size_t begin,
            std::size_t end, std::size_t depth) {
    const std::size_t n = end - begin;
    std::vector<std::size_t> counts(num_classes, 0);
    for (std::size_t i = begin; i < end; ++i) counts[labels[indices[i]]]++;
    const std::size_t present =
        num_classes - std::count(counts.begin(), counts.end(), std::size_t{0});
    if (present <= 1 || depth >= cfg.max_depth ||
        n < 2 * cfg.min_samples_leaf) {
      return;
    }

    // Candidate features, sampled without replacement; candidate order is
    // the tie-break order for equal impurity decreases.
    feature_pool.resize(x.cols());
    std::iota(feature_pool.begin(), feature_pool.end(), std::uint32_t{0});
    const std::size_t k = std::min(features_per_split, x.cols());
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t j =
          t + static_cast<std::size_t>(eng.below(feature_pool.size() - t));
      std::swap(feature_pool[t], feature_pool[j]);
    }

    const double parent_gini = gini(counts, n);
    double best_decrease = 0.0;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    bool found = false;

    std::vector<std::size_t> left_counts(num_classes);
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t f = feature_pool[t];
      scratch.clear();
      for (std::size_t i = begin; i < end; ++i) {
        scratch.emplace_back(x(indices[i], f), labels[indices[i]]);
      }
      std::sort(scratch.begin(), scratch.end());
      if (scratch.front().first == scratch.back().first) continue;

      std::fill(left_counts.begin(), left_counts.end(), 0);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_counts[scratch[i].second]++;
        if (scratch[i].first == scratch[i + 1].first) continue;
        const std::size_t n_left = i + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < cfg.min_samples_leaf || n_right < cfg.min_samples_leaf) {
          continue;
        }
        double right_sq = 0.0, left_sq = 0.0;
        for (std::size_t c = 0; c < num_classes; ++c) {
          const double pl =
              static_cast<double>(left_counts[c]) / static_cast<double>(n_left);
          const double pr = static_cast<double>(counts[c] - left_counts[c]) /
                            static_cast<double>(n_right);
          left_sq += pl * pl;
          right_sq += pr * pr;
        }
        const double child =
            (static_cast<double>(n_left) * (1.0 - left_sq) +
             static_cast<double>(n_right) * (1.0 - right_sq)) /
            static_cast<double>(n);
        const double decrease = parent_gini - child;
        if (decrease > best_decrease) {
          best_decrease = decrease;
          best_feature = f;
          best_threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);
          found = true;
        }
      }
    }
    if (!found) return;

    importance[best_feature] +=
        (static_cast<double>(n) / static_cast<double>(root_size)) *
        best_decrease;

    const auto mid = std::stable_partition(
        indices.begin() + begin, indices.begin() + end, [&](std::size_t idx) {
          return x(idx, best_feature) <= best_threshold;
        });
    const std::size_t split = static_cast<std::size_t>(mid - indices.begin());
    grow(indices, begin, split, depth + 1);
    grow(indices, split, end, depth + 1);
  }
};

}  // namespace

RfImportance rf_importance(const DenseMatrix& x, std::span<const int> labels,
                           const RfConfig& cfg) {
  const std::size_t samples = x.rows();
  const std::size_t features = x.cols();
  if (labels.size() != samples) {
    throw std::invalid_argument("rf_importance: labels length " +
                                std::to_string(labels.size()) +
                                " does not match sample count " +
                                std::to_string(samples));
  }
  if (samples < cfg.min_samples_leaf) {
    throw std::invalid_argument("rf_importance: fewer samples than min_samples_leaf");
  }
  if (cfg.num_trees == 0 || cfg.subsample_fraction <= 0.0 ||
      cfg.subsample_fraction > 1.0) {
    throw std::invalid_argument("rf_importance: invalid forest configuration");
  }
  int max_label = 0;
  for (int y : labels) {
    if (y < 0) throw std::invalid_argument("rf_importance: negative label");
    max_label = std::max(max_label, y);
  }
  const std::size_t num_classes = static_cast<std::size_t>(max_label) + 1;

  RfImportance result;
  result.scores.assign(features, 0.0);
  std::size_t distinct = 0;
  {
    std::vector<bool> seen(num_classes, false);
    for (int y : labels) {
      if (!seen[y]) {
        seen[y] = true;
        ++distinct;
      }
    }
  }
  if (distinct <= 1) {
    result.single_class = true;
    return result;
  }

  const std::size_t fps =
      cfg.features_per_split > 0
          ? std::min(cfg.features_per_split, features)
          : static_cast<std::size_t>(
                std::ceil(std::sqrt(static_cast<double>(features))));
  const std::size_t subsample = std::max<std::size_t>(
      1, static_cast<std::size_t>(cfg.subsample_fraction *
                                  static_cast<double>(samples)));

  std::vector<double> totals(features, 0.0);
  std::vector<std::size_t> index_pool(samples);
  for (std::size_t tree = 0; tree < cfg.num_trees; ++tree) {
    SplitMix64 eng(derive_stream(cfg.seed, rng_domain::kForestTree, tree));
    std::iota(index_pool.begin(), index_pool.end(), std::size_t{0});
    for (std::size_t t = 0; t < subsample; ++t) {
      const std::size_t j =
          t + static_cast<std::size_t>(eng.below(samples - t));
      std::swap(index_pool[t], index_pool[j]);
    }
    std::vector<std::size_t> indices(index_pool.begin(),
                                     index_pool.begin() + subsample);
    std::vector<double> tree_importance(features, 0.0);
    TreeBuilder builder{x,   labels, cfg, num_classes,    fps,
                        subsample, eng,    tree_importance, {}, {}};
    builder.grow(indices, 0, indices.size(), 0);
    for (std::size_t f = 0; f < features; ++f) totals[f] += tree_importance[f];
  }

  double sum = 0.0;
  for (std::size_t f = 0; f < features; ++f) {
    totals[f] /= static_cast<double>(cfg.num_trees);
    sum += totals[f];
  }
  if (sum > 0.0) {
    for (double& s : totals) s /= sum;
  }
  result.scores = std::move(totals);
  return result;
}

}  // namespace scnn
