// Microbenchmarks for the hot training-loop kernels at the published
// experiment scale: 784-wide layers, batch 128, published degree vectors.

#include <benchmark/benchmark.h>

#include <vector>

#include "scnn/csr.hpp"
#include "scnn/dense.hpp"
#include "scnn/mask.hpp"
#include "scnn/network.hpp"
#include "scnn/rng.hpp"
#include "scnn/threading.hpp"
#include "scnn/train.hpp"

namespace {

scnn::CsrMatrix published_sc_weights() {
  scnn::ScLayerSpec spec;
  spec.n_left = 784;
  spec.n_right = 784;
  spec.num_blocks = 8;
  spec.receptive_field = 2;
  spec.block_degrees = {98, 130, 98, 49, 20, 10, 10, 10};
  const scnn::BipartiteMask mask = scnn::build_sc_mask(spec, scnn::RngSeed{1, 0});
  std::vector<scnn::Edge> edges;
  scnn::SplitMix64 eng(scnn::RngSeed{2, 0});
  for (std::size_t u = 0; u < mask.n_left; ++u) {
    for (auto v : mask.adjacency[u]) {
      edges.push_back(scnn::Edge{v, u, eng.uniform(-0.1, 0.1)});
    }
  }
  return scnn::csr_from_edges(784, 784, edges);
}

scnn::DenseMatrix random_batch(std::size_t rows, std::size_t cols) {
  scnn::DenseMatrix m(rows, cols);
  scnn::SplitMix64 eng(scnn::RngSeed{3, 0});
  for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = eng.uniform();
  return m;
}

void SpmmScLayer(benchmark::State& state) {
  scnn::set_num_threads(static_cast<int>(state.range(0)));
  const scnn::CsrMatrix w = published_sc_weights();
  const scnn::DenseMatrix z = random_batch(784, 128);
  for (auto _ : state) {
    scnn::DenseMatrix out = scnn::spmm(w, z);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * w.nnz() * 128);
  scnn::set_num_threads(1);
}
BENCHMARK(SpmmScLayer)->Arg(1)->Arg(2);

void SpmmTransposeScLayer(benchmark::State& state) {
  scnn::set_num_threads(static_cast<int>(state.range(0)));
  const scnn::CsrMatrix w = published_sc_weights();
  const scnn::DenseMatrix delta = random_batch(784, 128);
  for (auto _ : state) {
    scnn::DenseMatrix out = scnn::spmm_transpose(w, delta);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * w.nnz() * 128);
  scnn::set_num_threads(1);
}
BENCHMARK(SpmmTransposeScLayer)->Arg(1)->Arg(2);

void DenseMatmulFcLayer(benchmark::State& state) {
  const scnn::DenseMatrix w = random_batch(784, 784);
  const scnn::DenseMatrix z = random_batch(784, 128);
  for (auto _ : state) {
    scnn::DenseMatrix out = scnn::matmul(w, z);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * 784 * 784 * 128);
}
BENCHMARK(DenseMatmulFcLayer);

void BuildRspMask(benchmark::State& state) {
  const std::vector<std::size_t> degrees(784, 53);
  for (auto _ : state) {
    scnn::BipartiteMask mask =
        scnn::build_rsp_mask(784, 784, degrees, scnn::RngSeed{4, 0});
    benchmark::DoNotOptimize(mask.adjacency.data());
  }
}
BENCHMARK(BuildRspMask);

void BuildScMask(benchmark::State& state) {
  scnn::ScLayerSpec spec;
  spec.n_left = 784;
  spec.n_right = 784;
  spec.num_blocks = 8;
  spec.receptive_field = 2;
  spec.block_degrees = {98, 130, 98, 49, 20, 10, 10, 10};
  for (auto _ : state) {
    scnn::BipartiteMask mask = scnn::build_sc_mask(spec, scnn::RngSeed{5, 0});
    benchmark::DoNotOptimize(mask.adjacency.data());
  }
}
BENCHMARK(BuildScMask);

void TrainStepScNetwork(benchmark::State& state) {
  scnn::set_num_threads(static_cast<int>(state.range(0)));
  scnn::NetworkSpec spec;
  spec.layer_dims = {784, 784, 784, 784, 784, 784, 10};
  for (int l = 0; l < 5; ++l) {
    scnn::ScLayerSpec sc;
    sc.n_left = 784;
    sc.n_right = 784;
    sc.num_blocks = 8;
    sc.receptive_field = 2;
    sc.block_degrees = {98, 130, 98, 49, 20, 10, 10, 10};
    spec.connectivity.push_back(scnn::Connectivity::spatially_coupled(sc));
  }
  spec.connectivity.push_back(scnn::Connectivity::full());
  spec.init_seed = scnn::RngSeed{6, 0};
  scnn::Network net = scnn::init_network(spec);

  const scnn::DenseMatrix batch = random_batch(128, 784);
  std::vector<int> labels(128);
  scnn::SplitMix64 eng(scnn::RngSeed{7, 0});
  for (auto& y : labels) y = static_cast<int>(eng.below(10));
  scnn::TrainConfig cfg;
  cfg.l2_coeff = 5e-5;

  for (auto _ : state) {
    scnn::ForwardResult fwd =
        scnn::forward(net, batch, scnn::Mode::Train, scnn::RngSeed{8, 0});
    scnn::LossResult loss = scnn::softmax_cross_entropy(fwd.logits, labels);
    scnn::Gradients grads = scnn::backward(net, fwd.cache, loss.dlogits);
    scnn::sgd_step(net, grads, cfg);
    benchmark::DoNotOptimize(loss.loss);
  }
  scnn::set_num_threads(1);
}
BENCHMARK(TrainStepScNetwork)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
