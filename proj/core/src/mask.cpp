#include "scnn/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace scnn {

DegreeDistribution DegreeDistribution::left_regular(std::size_t d) {
  if (d == 0) {
    throw std::invalid_argument("DegreeDistribution: degree must be positive");
  }
  DegreeDistribution dist;
  dist.kind = Kind::LeftRegular;
  dist.degree = d;
  return dist;
}

DegreeDistribution DegreeDistribution::tabulated(
    std::vector<std::size_t> support, std::vector<double> probs) {
  if (support.empty()) {
    throw std::invalid_argument("DegreeDistribution: empty support");
  }
  if (support.size() != probs.size()) {
    throw std::invalid_argument(
        "DegreeDistribution: support and probs lengths differ");
  }
  double total = 0.0;
  for (double p : probs) {
    if (p < 0.0) {
      throw std::invalid_argument("DegreeDistribution: negative probability");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument(
        "DegreeDistribution: probabilities sum to " + std::to_string(total));
  }
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] == 0) {
      throw std::invalid_argument("DegreeDistribution: degrees must be positive");
    }
    if (i > 0 && support[i - 1] >= support[i]) {
      throw std::invalid_argument(
          "DegreeDistribution: support must be strictly increasing");
    }
  }
  DegreeDistribution dist;
  dist.kind = Kind::Tabulated;
  dist.support = std::move(support);
  dist.probs = std::move(probs);
  return dist;
}

std::size_t BipartiteMask::edge_count() const {
  std::size_t total = 0;
  for (const auto& nbrs : adjacency) total += nbrs.size();
  return total;
}

std::size_t ScLayerSpec::participating_targets(std::size_t j) const {
  return std::min(j + 1, receptive_field);
}

void ScLayerSpec::validate() const {
  if (n_left == 0 || n_right == 0) {
    throw std::invalid_argument("ScLayerSpec: layer sizes must be positive");
  }
  if (num_blocks == 0 || n_left % num_blocks != 0 || n_right % num_blocks != 0) {
    throw std::invalid_argument(
        "ScLayerSpec: num_blocks must divide both layer sizes (" +
        std::to_string(n_left) + ", " + std::to_string(n_right) + " vs B=" +
        std::to_string(num_blocks) + ")");
  }
  if (receptive_field == 0 || receptive_field > num_blocks) {
    throw std::invalid_argument(
        "ScLayerSpec: receptive_field must be in [1, num_blocks]");
  }
  if (block_degrees.size() != num_blocks) {
    throw std::invalid_argument(
        "ScLayerSpec: expected " + std::to_string(num_blocks) +
        " block degrees, got " + std::to_string(block_degrees.size()));
  }
  const std::size_t br = right_block_size();
  for (std::size_t j = 0; j < num_blocks; ++j) {
    if (block_degrees[j] == 0) {
      throw std::invalid_argument("ScLayerSpec: block " + std::to_string(j + 1) +
                                  " has zero degree");
    }
    const std::size_t cap = br * participating_targets(j);
    if (block_degrees[j] > cap) {
      throw std::invalid_argument(
          "ScLayerSpec: block " + std::to_string(j + 1) + " degree " +
          std::to_string(block_degrees[j]) +
          " exceeds achievable maximum " + std::to_string(cap) +
          " under its truncated window");
    }
  }
}

std::vector<std::size_t> sample_degrees(const DegreeDistribution& dist,
                                        std::size_t n, RngSeed rng) {
  if (dist.kind == DegreeDistribution::Kind::LeftRegular) {
    return std::vector<std::size_t>(n, dist.degree);
  }
  std::vector<double> cdf(dist.probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.probs.size(); ++i) {
    acc += dist.probs[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;
  SplitMix64 eng(rng);
  std::vector<std::size_t> degrees(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = eng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t idx =
        std::min<std::size_t>(it - cdf.begin(), dist.support.size() - 1);
    degrees[i] = dist.support[idx];
  }
  return degrees;
}

namespace {

/// First k entries of a Fisher-Yates shuffle over pool, i.e. a uniform sample
/// of k distinct values without replacement. Sorted before returning.
void sample_without_replacement(std::vector<std::uint32_t>& pool, std::size_t k,
                                SplitMix64& eng,
                                std::vector<std::uint32_t>& out) {
  const std::size_t n = pool.size();
  for (std::size_t t = 0; t < k; ++t) {
    const std::size_t j = t + static_cast<std::size_t>(eng.below(n - t));
    std::swap(pool[t], pool[j]);
  }
  out.insert(out.end(), pool.begin(), pool.begin() + k);
}

void reset_pool(std::vector<std::uint32_t>& pool, std::uint32_t offset,
                std::size_t n) {
  pool.resize(n);
  std::iota(pool.begin(), pool.end(), offset);
}

}  // namespace

BipartiteMask build_rsp_mask(std::size_t n_left, std::size_t n_right,
                             std::span<const std::size_t> degrees,
                             RngSeed rng) {
  if (degrees.size() != n_left) {
    throw std::invalid_argument("build_rsp_mask: expected " +
                                std::to_string(n_left) + " degrees, got " +
                                std::to_string(degrees.size()));
  }
  for (std::size_t i = 0; i < n_left; ++i) {
    if (degrees[i] > n_right) {
      throw std::invalid_argument(
          "build_rsp_mask: node " + std::to_string(i) + " degree " +
          std::to_string(degrees[i]) + " exceeds layer width " +
          std::to_string(n_right));
    }
  }
  BipartiteMask mask;
  mask.n_left = n_left;
  mask.n_right = n_right;
  mask.adjacency.resize(n_left);
  SplitMix64 eng(rng);
  std::vector<std::uint32_t> pool;
  for (std::size_t i = 0; i < n_left; ++i) {
    reset_pool(pool, 0, n_right);
    mask.adjacency[i].reserve(degrees[i]);
    sample_without_replacement(pool, degrees[i], eng, mask.adjacency[i]);
    std::sort(mask.adjacency[i].begin(), mask.adjacency[i].end());
  }
  return mask;
}

BipartiteMask build_sc_mask(const ScLayerSpec& spec, RngSeed rng) {
  spec.validate();
  const std::size_t bl = spec.left_block_size();
  const std::size_t br = spec.right_block_size();

  BipartiteMask mask;
  mask.n_left = spec.n_left;
  mask.n_right = spec.n_right;
  mask.adjacency.resize(spec.n_left);
  SplitMix64 eng(rng);
  std::vector<std::uint32_t> pool;

  for (std::size_t u = 0; u < spec.n_left; ++u) {
    const std::size_t j = u / bl;  // source block, 0-based
    const std::size_t targets = spec.participating_targets(j);
    const std::size_t first_target = j + 1 - targets;
    const std::size_t degree = spec.block_degrees[j];
    const std::size_t base = degree / targets;
    const std::size_t rem = degree % targets;
    auto& nbrs = mask.adjacency[u];
    nbrs.reserve(degree);
    for (std::size_t t = 0; t < targets; ++t) {
      const std::size_t k = first_target + t;  // target block, 0-based
      const std::size_t share = base + (t < rem ? 1 : 0);
      if (share == 0) continue;
      reset_pool(pool, static_cast<std::uint32_t>(k * br), br);
      sample_without_replacement(pool, share, eng, nbrs);
    }
    std::sort(nbrs.begin(), nbrs.end());
  }
  return mask;
}

BipartiteMask full_mask(std::size_t n_left, std::size_t n_right) {
  if (n_left == 0 || n_right == 0) {
    throw std::invalid_argument("full_mask: dimensions must be positive");
  }
  BipartiteMask mask;
  mask.n_left = n_left;
  mask.n_right = n_right;
  mask.adjacency.assign(n_left, std::vector<std::uint32_t>(n_right));
  for (auto& nbrs : mask.adjacency) {
    std::iota(nbrs.begin(), nbrs.end(), std::uint32_t{0});
  }
  return mask;
}

MaskStats mask_stats(const BipartiteMask& mask) {
  MaskStats stats;
  stats.edge_count = mask.edge_count();
  stats.density = mask.n_left == 0 || mask.n_right == 0
                      ? 0.0
                      : static_cast<double>(stats.edge_count) /
                            (static_cast<double>(mask.n_left) *
                             static_cast<double>(mask.n_right));
  std::vector<std::size_t> in_deg(mask.n_right, 0);
  std::size_t max_out = 0;
  for (const auto& nbrs : mask.adjacency) max_out = std::max(max_out, nbrs.size());
  stats.out_degree_histogram.assign(max_out + 1, 0);
  for (const auto& nbrs : mask.adjacency) {
    stats.out_degree_histogram[nbrs.size()]++;
    for (auto v : nbrs) in_deg[v]++;
  }
  const std::size_t max_in =
      in_deg.empty() ? 0 : *std::max_element(in_deg.begin(), in_deg.end());
  stats.in_degree_histogram.assign(max_in + 1, 0);
  for (std::size_t d : in_deg) stats.in_degree_histogram[d]++;
  return stats;
}

void write_mask_csv(const BipartiteMask& mask, std::ostream& os) {
  os << "left,right\n";
  for (std::size_t u = 0; u < mask.adjacency.size(); ++u) {
    for (auto v : mask.adjacency[u]) {
      os << u << ',' << v << '\n';
    }
  }
}

}  // namespace scnn
