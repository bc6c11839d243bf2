#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "scnn/csr.hpp"
#include "scnn/dense.hpp"
#include "scnn/mask.hpp"
#include "scnn/rng.hpp"

namespace scnn {

enum class Mode { Train, Eval };

enum class ConnectivityKind : std::uint8_t { Full = 0, Rsp = 1, Sc = 2 };

/// Connectivity choice for one layer transition.
struct Connectivity {
  ConnectivityKind kind = ConnectivityKind::Full;
  DegreeDistribution degrees;  // Rsp only
  ScLayerSpec sc;              // Sc only

  static Connectivity full();
  static Connectivity rsp(DegreeDistribution degrees);
  static Connectivity spatially_coupled(ScLayerSpec spec);
};

struct NetworkSpec {
  std::vector<std::size_t> layer_dims;     // [N0, ..., NL]
  std::vector<Connectivity> connectivity;  // one per transition
  double dropout_keep_prob = 1.0;          // hidden activations, Train mode
  RngSeed init_seed;

  void validate() const;
};

/// Parameters of one transition. The mask reads left = source layer,
/// right = target layer; weights are stored target-major (N_l x N_{l-1}) so
/// the weight support is the transpose of the mask. Training never creates
/// fill-in: the support is fixed at construction.
struct LayerParams {
  BipartiteMask mask;
  CsrMatrix weights;
  std::vector<double> bias;
};

struct Network {
  std::vector<std::size_t> layer_dims;
  std::vector<LayerParams> layers;
  std::vector<ConnectivityKind> kinds;  // per transition
  std::vector<std::size_t> sc_blocks;   // per transition, 0 when not SC
  double dropout_keep_prob = 1.0;

  std::size_t depth() const { return layers.size(); }
  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }
};

/// Per-batch intermediate state. Activations are stored feature-major
/// (neurons x batch): entry 0 is the transposed input, entries 1..L-1 the
/// hidden activations after dropout. Hidden dropout masks are kept so the
/// backward pass replays exactly the forward draw.
struct ForwardCache {
  Mode mode = Mode::Eval;
  double keep_prob = 1.0;
  std::size_t batch = 0;
  std::vector<DenseMatrix> activations;
  std::vector<std::vector<std::uint8_t>> drop_masks;
};

struct ForwardResult {
  DenseMatrix logits;  // batch x classes
  ForwardCache cache;
};

struct Gradients {
  struct Layer {
    std::vector<double> weights;  // aligned to CSR values of the transition
    std::vector<double> bias;
  };
  std::vector<Layer> layers;
};

struct LossResult {
  double loss = 0.0;
  DenseMatrix dlogits;  // batch x classes, already divided by batch size
};

struct ParamCount {
  std::size_t weights = 0;
  std::size_t biases = 0;
  std::size_t total = 0;
  std::size_t fc_equivalent_weights = 0;
  std::size_t fc_equivalent_total = 0;
  double reduction_ratio = 0.0;  // 1 - weights / fc_equivalent_weights
};

/// Numerically stable logistic function.
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Mask for one transition, as init_network builds it: Full ignores the rng,
/// Rsp samples degrees then neighbors, Sc samples windows. transition_index
/// selects the per-layer rng streams.
BipartiteMask build_connectivity_mask(const Connectivity& conn,
                                      std::size_t n_src, std::size_t n_dst,
                                      RngSeed init_seed,
                                      std::size_t transition_index);

/// Builds masks per the connectivity choices, draws each present weight
/// uniformly from [-s, s] with s = sqrt(6 / (fan_in + fan_out)) where fan_in
/// and fan_out are the layer's mean masked degrees, and zeroes the biases.
/// Bit-deterministic given spec.init_seed.
Network init_network(const NetworkSpec& spec);

/// Hidden layers apply the sigmoid; the output transition emits raw logits
/// (softmax lives in the loss). Train mode with keep_prob p < 1 zeroes each
/// hidden activation independently with probability 1-p and scales survivors
/// by 1/p; Eval applies no dropout and no scaling.
ForwardResult forward(const Network& net, const DenseMatrix& batch, Mode mode,
                      RngSeed rng);

/// Mean over the batch of -log softmax(logits)[label], computed with
/// max-subtraction. dlogits = (softmax - onehot) / batch.
LossResult softmax_cross_entropy(const DenseMatrix& logits,
                                 std::span<const int> labels);

/// Exact reverse-mode gradients restricted to the mask support. Equals the
/// dense gradient multiplied elementwise by the mask indicator.
Gradients backward(const Network& net, const ForwardCache& cache,
                   const DenseMatrix& dlogits);

ParamCount param_count(const Network& net);

}  // namespace scnn
