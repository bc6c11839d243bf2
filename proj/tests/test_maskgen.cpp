#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "scnn/mask.hpp"

using namespace scnn;

namespace {

std::string mask_bytes(const BipartiteMask& mask) {
  std::ostringstream os;
  write_mask_csv(mask, os);
  return os.str();
}

ScLayerSpec published_sc_spec() {
  ScLayerSpec spec;
  spec.n_left = 784;
  spec.n_right = 784;
  spec.num_blocks = 8;
  spec.receptive_field = 2;
  spec.block_degrees = {98, 130, 98, 49, 20, 10, 10, 10};
  return spec;
}

}  // namespace

TEST_CASE("sample_degrees left regular is the constant sequence") {
  const auto d53 = sample_degrees(DegreeDistribution::left_regular(53), 784,
                                  RngSeed{1, 0});
  REQUIRE(d53.size() == 784);
  for (auto d : d53) CHECK(d == 53);

  const auto ones = sample_degrees(DegreeDistribution::left_regular(1), 3,
                                   RngSeed{1, 0});
  CHECK(ones == std::vector<std::size_t>{1, 1, 1});
}

TEST_CASE("sample_degrees tabulated concentrates around its mean") {
  // Mean 3, per-sample deviation 1, so the sample mean over 10000 draws has
  // sigma 0.01; 3 sigma band is +-0.03.
  const auto dist = DegreeDistribution::tabulated({2, 4}, {0.5, 0.5});
  const auto degrees = sample_degrees(dist, 10000, RngSeed{7, 0});
  double sum = 0.0;
  for (auto d : degrees) {
    CHECK((d == 2 || d == 4));
    sum += static_cast<double>(d);
  }
  CHECK(std::abs(sum / 10000.0 - 3.0) <= 0.03);
}

TEST_CASE("degree distribution validation") {
  CHECK_THROWS_AS(DegreeDistribution::tabulated({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(DegreeDistribution::tabulated({1, 2}, {0.7, -0.3}),
                  std::invalid_argument);
  CHECK_THROWS_AS(DegreeDistribution::tabulated({2, 1}, {0.5, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(DegreeDistribution::tabulated({1, 2}, {0.5, 0.6}),
                  std::invalid_argument);
  CHECK_THROWS_AS(DegreeDistribution::left_regular(0), std::invalid_argument);
}

TEST_CASE("build_rsp_mask with degree equal to the layer width is complete") {
  const std::vector<std::size_t> degrees(4, 4);
  const BipartiteMask mask = build_rsp_mask(4, 4, degrees, RngSeed{3, 0});
  CHECK(mask.edge_count() == 16);
  for (const auto& nbrs : mask.adjacency) {
    REQUIRE(nbrs.size() == 4);
    for (std::size_t v = 0; v < 4; ++v) CHECK(nbrs[v] == v);
  }
}

TEST_CASE("build_rsp_mask published configuration has 784*53 edges") {
  const std::vector<std::size_t> degrees(784, 53);
  const BipartiteMask mask = build_rsp_mask(784, 784, degrees, RngSeed{5, 1});
  CHECK(mask.edge_count() == 41552);
  const MaskStats stats = mask_stats(mask);
  CHECK(stats.edge_count == 41552);
  CHECK(stats.density == doctest::Approx(53.0 / 784.0).epsilon(1e-12));
}

TEST_CASE("build_rsp_mask is deterministic and errors on impossible degrees") {
  const std::vector<std::size_t> degrees(10, 4);
  const BipartiteMask a = build_rsp_mask(10, 12, degrees, RngSeed{9, 2});
  const BipartiteMask b = build_rsp_mask(10, 12, degrees, RngSeed{9, 2});
  CHECK(mask_bytes(a) == mask_bytes(b));
  const BipartiteMask c = build_rsp_mask(10, 12, degrees, RngSeed{9, 3});
  CHECK(mask_bytes(a) != mask_bytes(c));

  std::vector<std::size_t> bad(10, 4);
  bad[7] = 13;
  CHECK_THROWS_WITH_AS(build_rsp_mask(10, 12, bad, RngSeed{9, 2}),
                       doctest::Contains("node 7"), std::invalid_argument);
}

TEST_CASE("full_mask edge counts") {
  CHECK(full_mask(2, 3).edge_count() == 6);
  CHECK(full_mask(1, 1).edge_count() == 1);
  CHECK(full_mask(784, 784).edge_count() == 614656);
  CHECK(mask_stats(full_mask(4, 4)).density == 1.0);
}

TEST_CASE("mask_stats on an empty adjacency") {
  BipartiteMask mask;
  mask.n_left = 3;
  mask.n_right = 4;
  mask.adjacency.resize(3);
  const MaskStats stats = mask_stats(mask);
  CHECK(stats.edge_count == 0);
  CHECK(stats.density == 0.0);
  CHECK(stats.out_degree_histogram[0] == 3);
  CHECK(stats.in_degree_histogram[0] == 4);
}

TEST_CASE("mask_stats histograms are consistent with the edge count") {
  const std::vector<std::size_t> degrees = {3, 1, 4, 2, 2};
  const BipartiteMask mask = build_rsp_mask(5, 6, degrees, RngSeed{21, 0});
  const MaskStats stats = mask_stats(mask);
  std::size_t from_out = 0;
  for (std::size_t d = 0; d < stats.out_degree_histogram.size(); ++d) {
    from_out += d * stats.out_degree_histogram[d];
  }
  std::size_t from_in = 0;
  for (std::size_t d = 0; d < stats.in_degree_histogram.size(); ++d) {
    from_in += d * stats.in_degree_histogram[d];
  }
  CHECK(from_out == stats.edge_count);
  CHECK(from_in == stats.edge_count);
}

TEST_CASE("build_sc_mask matches the published arithmetic") {
  const BipartiteMask mask = build_sc_mask(published_sc_spec(), RngSeed{1, 4});
  // 98 nodes per source block, degrees {98,130,98,49,20,10,10,10}.
  CHECK(mask.edge_count() == 98 * (98 + 130 + 98 + 49 + 20 + 10 + 10 + 10));
  CHECK(mask.edge_count() == 41650);

  // Source block 1 participates in exactly one window, so its 98-degree nodes
  // connect to all of target block 1.
  for (std::size_t u = 0; u < 98; ++u) {
    REQUIRE(mask.adjacency[u].size() == 98);
    for (std::size_t v = 0; v < 98; ++v) CHECK(mask.adjacency[u][v] == v);
  }
}

TEST_CASE("build_sc_mask rejects an unachievable block degree naming the block") {
  ScLayerSpec spec = published_sc_spec();
  spec.block_degrees[0] = 99;  // block 1 has only one 98-wide window
  CHECK_THROWS_WITH_AS(build_sc_mask(spec, RngSeed{1, 4}),
                       doctest::Contains("block 1"), std::invalid_argument);
}

TEST_CASE("spec validation rejects inconsistent shapes") {
  ScLayerSpec spec = published_sc_spec();
  spec.block_degrees.pop_back();
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = published_sc_spec();
  spec.n_left = 783;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  spec = published_sc_spec();
  spec.receptive_field = 9;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("build_sc_mask with one block degenerates to build_rsp_mask") {
  ScLayerSpec spec;
  spec.n_left = 784;
  spec.n_right = 784;
  spec.num_blocks = 1;
  spec.receptive_field = 1;
  spec.block_degrees = {53};
  const RngSeed seed{77, 5};
  const BipartiteMask sc = build_sc_mask(spec, seed);
  const std::vector<std::size_t> degrees(784, 53);
  const BipartiteMask rsp = build_rsp_mask(784, 784, degrees, seed);
  CHECK(mask_bytes(sc) == mask_bytes(rsp));
}

TEST_CASE("sc locality, degree exactness and determinism over random specs") {
  std::size_t checked = 0;
  for (std::uint64_t trial = 0; trial < 60; ++trial) {
    SplitMix64 eng(RngSeed{trial, 50});
    ScLayerSpec spec;
    spec.num_blocks = 2 + eng.below(9);             // B in [2, 10]
    spec.receptive_field = 1 + eng.below(spec.num_blocks);  // r in [1, B]
    const std::size_t bl = 1 + eng.below(12);
    const std::size_t br = 1 + eng.below(12);
    spec.n_left = spec.num_blocks * bl;
    spec.n_right = spec.num_blocks * br;
    spec.block_degrees.resize(spec.num_blocks);
    for (std::size_t j = 0; j < spec.num_blocks; ++j) {
      const std::size_t cap = br * spec.participating_targets(j);
      spec.block_degrees[j] = 1 + eng.below(cap);
    }

    const RngSeed seed{trial, 51};
    const BipartiteMask mask = build_sc_mask(spec, seed);

    // Degree exactness and locality, every edge.
    const std::size_t B = spec.num_blocks;
    const std::size_t r = spec.receptive_field;
    for (std::size_t u = 0; u < spec.n_left; ++u) {
      const std::size_t j = u / bl;
      REQUIRE(mask.adjacency[u].size() == spec.block_degrees[j]);
      std::set<std::uint32_t> uniq(mask.adjacency[u].begin(),
                                   mask.adjacency[u].end());
      CHECK(uniq.size() == mask.adjacency[u].size());
      for (auto v : mask.adjacency[u]) {
        REQUIRE(v < spec.n_right);
        const std::size_t k = v / br;
        // Window rule: target block k must satisfy j-r+1 <= k <= j (0-based).
        CHECK(k <= j);
        CHECK(k + r >= j + 1);
        CHECK(k < B);
      }
    }

    CHECK(mask_bytes(mask) == mask_bytes(build_sc_mask(spec, seed)));
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("rsp neighbor choice is uniform: in-degree concentration") {
  // Each of 200 left nodes picks 10 of 200 right nodes, so a right node's
  // in-degree is Binomial(200, 0.05): mean 10, variance 9.5. Averaging over
  // 500 seeds gives sigma sqrt(9.5/500) ~= 0.1378; the 5-sigma band is 0.689.
  const std::size_t seeds = 500;
  std::vector<double> in_degree_sum(200, 0.0);
  const std::vector<std::size_t> degrees(200, 10);
  for (std::uint64_t s = 0; s < seeds; ++s) {
    const BipartiteMask mask = build_rsp_mask(200, 200, degrees, RngSeed{s, 60});
    for (const auto& nbrs : mask.adjacency) {
      for (auto v : nbrs) in_degree_sum[v] += 1.0;
    }
  }
  for (std::size_t v = 0; v < 200; ++v) {
    CHECK(std::abs(in_degree_sum[v] / seeds - 10.0) <= 0.689);
  }
}

TEST_CASE("mask csv export format") {
  BipartiteMask mask;
  mask.n_left = 2;
  mask.n_right = 3;
  mask.adjacency = {{0, 2}, {1}};
  CHECK(mask_bytes(mask) == "left,right\n0,0\n0,2\n1,1\n");
}
