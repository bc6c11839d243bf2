#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "scnn/rng.hpp"

namespace scnn {

/// Out-degree law for the left side of a bipartite layer graph. Either every
/// node gets the same degree (left regular) or degrees are drawn i.i.d. from a
/// tabulated distribution.
struct DegreeDistribution {
  enum class Kind { LeftRegular, Tabulated };

  Kind kind = Kind::LeftRegular;
  std::size_t degree = 1;              // LeftRegular
  std::vector<std::size_t> support;    // Tabulated, strictly increasing
  std::vector<double> probs;           // Tabulated, sums to 1 within 1e-12

  static DegreeDistribution left_regular(std::size_t d);
  static DegreeDistribution tabulated(std::vector<std::size_t> support,
                                      std::vector<double> probs);
};

/// Binary adjacency of a bipartite graph between two adjacent layers. Left
/// nodes are the source layer, right nodes the target layer; each neighbor
/// list is sorted and duplicate-free.
struct BipartiteMask {
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  std::vector<std::vector<std::uint32_t>> adjacency;

  std::size_t edge_count() const;
};

/// Parameters of a spatially-coupled layer: both sides are partitioned into
/// num_blocks equal blocks; source block j connects only to target blocks
/// {j-r+1, ..., j} clipped to the chain (terminated windows, no wrap-around).
/// block_degrees[j] is the left-regular out-degree of every node in source
/// block j.
struct ScLayerSpec {
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  std::size_t num_blocks = 1;       // B
  std::size_t receptive_field = 1;  // r
  std::vector<std::size_t> block_degrees;

  std::size_t left_block_size() const { return n_left / num_blocks; }
  std::size_t right_block_size() const { return n_right / num_blocks; }

  /// Number of target blocks source block j (0-based) participates in:
  /// min(j+1, r).
  std::size_t participating_targets(std::size_t j) const;

  /// Throws std::invalid_argument naming the offending field or block
  /// (blocks are reported 1-based).
  void validate() const;
};

struct MaskStats {
  std::size_t edge_count = 0;
  double density = 0.0;
  std::vector<std::size_t> out_degree_histogram;  // index = degree
  std::vector<std::size_t> in_degree_histogram;
};

/// Draws n i.i.d. out-degrees from dist. LeftRegular(d) yields the constant
/// sequence d without consuming randomness.
std::vector<std::size_t> sample_degrees(const DegreeDistribution& dist,
                                        std::size_t n, RngSeed rng);

/// Random sparse layer: left node i picks degrees[i] distinct right neighbors
/// uniformly without replacement. Deterministic given rng.
BipartiteMask build_rsp_mask(std::size_t n_left, std::size_t n_right,
                             std::span<const std::size_t> degrees, RngSeed rng);

/// Spatially-coupled layer. Each source node splits its block degree as
/// evenly as possible across its participating target blocks, with the extra
/// units going to the lowest-index blocks, then samples without replacement
/// inside each block. With num_blocks == 1 this consumes randomness exactly
/// like build_rsp_mask, so the two constructions coincide for equal seeds.
BipartiteMask build_sc_mask(const ScLayerSpec& spec, RngSeed rng);

/// Complete bipartite graph.
BipartiteMask full_mask(std::size_t n_left, std::size_t n_right);

MaskStats mask_stats(const BipartiteMask& mask);

/// Edge list as CSV with header "left,right", rows sorted by (left, right).
void write_mask_csv(const BipartiteMask& mask, std::ostream& os);

}  // namespace scnn
