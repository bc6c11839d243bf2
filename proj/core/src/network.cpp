#include "scnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "scnn/threading.hpp"

namespace scnn {

Connectivity Connectivity::full() { return Connectivity{}; }

Connectivity Connectivity::rsp(DegreeDistribution degrees) {
  Connectivity c;
  c.kind = ConnectivityKind::Rsp;
  c.degrees = std::move(degrees);
  return c;
}

Connectivity Connectivity::spatially_coupled(ScLayerSpec spec) {
  Connectivity c;
  c.kind = ConnectivityKind::Sc;
  c.sc = std::move(spec);
  return c;
}

void NetworkSpec::validate() const {
  if (layer_dims.size() < 2) {
    throw std::invalid_argument("NetworkSpec: need at least input and output layers");
  }
  for (std::size_t d : layer_dims) {
    if (d == 0) throw std::invalid_argument("NetworkSpec: zero-width layer");
  }
  if (connectivity.size() != layer_dims.size() - 1) {
    throw std::invalid_argument(
        "NetworkSpec: expected " + std::to_string(layer_dims.size() - 1) +
        " connectivity entries, got " + std::to_string(connectivity.size()));
  }
  if (dropout_keep_prob <= 0.0 || dropout_keep_prob > 1.0) {
    throw std::invalid_argument("NetworkSpec: dropout_keep_prob must be in (0, 1]");
  }
  for (std::size_t l = 0; l < connectivity.size(); ++l) {
    if (connectivity[l].kind == ConnectivityKind::Sc) {
      const ScLayerSpec& sc = connectivity[l].sc;
      if (sc.n_left != layer_dims[l] || sc.n_right != layer_dims[l + 1]) {
        throw std::invalid_argument(
            "NetworkSpec: SC spec of transition " + std::to_string(l) +
            " is " + std::to_string(sc.n_left) + "x" +
            std::to_string(sc.n_right) + ", layer dims are " +
            std::to_string(layer_dims[l]) + "x" +
            std::to_string(layer_dims[l + 1]));
      }
      sc.validate();
    }
  }
}

BipartiteMask build_connectivity_mask(const Connectivity& conn,
                                      std::size_t n_src, std::size_t n_dst,
                                      RngSeed init_seed,
                                      std::size_t transition_index) {
  const std::size_t l = transition_index;
  switch (conn.kind) {
    case ConnectivityKind::Rsp: {
      const auto degrees = sample_degrees(
          conn.degrees, n_src,
          derive_stream(init_seed, rng_domain::kMaskLayer, 2 * l));
      return build_rsp_mask(
          n_src, n_dst, degrees,
          derive_stream(init_seed, rng_domain::kMaskLayer, 2 * l + 1));
    }
    case ConnectivityKind::Sc:
      return build_sc_mask(
          conn.sc, derive_stream(init_seed, rng_domain::kMaskLayer, 2 * l + 1));
    case ConnectivityKind::Full:
    default:
      return full_mask(n_src, n_dst);
  }
}

Network init_network(const NetworkSpec& spec) {
  spec.validate();
  Network net;
  net.layer_dims = spec.layer_dims;
  net.dropout_keep_prob = spec.dropout_keep_prob;
  const std::size_t transitions = spec.connectivity.size();
  net.layers.reserve(transitions);
  net.kinds.reserve(transitions);
  net.sc_blocks.reserve(transitions);

  for (std::size_t l = 0; l < transitions; ++l) {
    const std::size_t n_src = spec.layer_dims[l];
    const std::size_t n_dst = spec.layer_dims[l + 1];
    const Connectivity& conn = spec.connectivity[l];

    LayerParams params;
    params.mask =
        build_connectivity_mask(conn, n_src, n_dst, spec.init_seed, l);

    // Weight support is the transpose of the mask (target-major rows).
    std::vector<Edge> edges;
    edges.reserve(params.mask.edge_count());
    for (std::size_t u = 0; u < n_src; ++u) {
      for (auto v : params.mask.adjacency[u]) {
        edges.push_back(Edge{v, u, 0.0});
      }
    }
    params.weights = csr_from_edges(n_dst, n_src, edges);

    const double edge_count = static_cast<double>(params.weights.nnz());
    const double fan_in = edge_count / static_cast<double>(n_dst);
    const double fan_out = edge_count / static_cast<double>(n_src);
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    SplitMix64 eng(derive_stream(spec.init_seed, rng_domain::kInitLayer, l));
    for (double& w : params.weights.values_mut()) w = eng.uniform(-s, s);

    params.bias.assign(n_dst, 0.0);

    net.layers.push_back(std::move(params));
    net.kinds.push_back(conn.kind);
    net.sc_blocks.push_back(
        conn.kind == ConnectivityKind::Sc ? conn.sc.num_blocks : 0);
  }
  return net;
}

namespace {

void add_bias_rows(DenseMatrix& m, std::span<const double> bias) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    const double b = bias[i];
    for (double& v : row) v += b;
  }
}

}  // namespace

ForwardResult forward(const Network& net, const DenseMatrix& batch, Mode mode,
                      RngSeed rng) {
  if (batch.cols() != net.input_dim()) {
    throw std::invalid_argument("forward: batch width " +
                                std::to_string(batch.cols()) +
                                " does not match input dim " +
                                std::to_string(net.input_dim()));
  }
  if (!batch.all_finite()) {
    throw std::invalid_argument("forward: non-finite input");
  }

  ForwardResult out;
  ForwardCache& cache = out.cache;
  cache.mode = mode;
  cache.keep_prob = net.dropout_keep_prob;
  cache.batch = batch.rows();
  cache.activations.reserve(net.depth());
  cache.activations.push_back(transpose(batch));

  const bool dropping = mode == Mode::Train && net.dropout_keep_prob < 1.0;
  const double keep = net.dropout_keep_prob;
  SplitMix64 eng(rng);

  for (std::size_t l = 0; l + 1 < net.depth(); ++l) {
    DenseMatrix act = spmm(net.layers[l].weights, cache.activations.back());
    add_bias_rows(act, net.layers[l].bias);
    for (double& v : std::span(act.data(), act.rows() * act.cols())) {
      v = sigmoid(v);
    }
    if (dropping) {
      auto& mask = cache.drop_masks.emplace_back(act.rows() * act.cols());
      double* v = act.data();
      for (std::size_t i = 0; i < mask.size(); ++i) {
        const bool kept = eng.uniform() < keep;
        mask[i] = kept ? 1 : 0;
        v[i] = kept ? v[i] / keep : 0.0;
      }
    }
    cache.activations.push_back(std::move(act));
  }

  const LayerParams& head = net.layers.back();
  DenseMatrix logits_fm = spmm(head.weights, cache.activations.back());
  add_bias_rows(logits_fm, head.bias);
  out.logits = transpose(logits_fm);
  return out;
}

LossResult softmax_cross_entropy(const DenseMatrix& logits,
                                 std::span<const int> labels) {
  const std::size_t batch = logits.rows();
  const std::size_t classes = logits.cols();
  if (labels.size() != batch) {
    throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw std::invalid_argument("softmax_cross_entropy: label " +
                                  std::to_string(y) + " out of range");
    }
  }
  LossResult out;
  out.dlogits = DenseMatrix(batch, classes);
  const double inv_batch = 1.0 / static_cast<double>(batch);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch; ++i) {
    const auto row = logits.row(i);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - m);
    const double log_z = std::log(z);
    loss -= row[labels[i]] - m - log_z;
    auto grad = out.dlogits.row(i);
    for (std::size_t c = 0; c < classes; ++c) {
      grad[c] = std::exp(row[c] - m - log_z) * inv_batch;
    }
    grad[labels[i]] -= inv_batch;
  }
  out.loss = loss * inv_batch;
  return out;
}

Gradients backward(const Network& net, const ForwardCache& cache,
                   const DenseMatrix& dlogits) {
  if (cache.activations.size() != net.depth()) {
    throw std::invalid_argument("backward: cache does not match network depth");
  }
  if (dlogits.rows() != cache.batch ||
      dlogits.cols() != net.output_dim()) {
    throw std::invalid_argument("backward: dlogits shape mismatch");
  }

  Gradients grads;
  grads.layers.resize(net.depth());
  DenseMatrix delta = transpose(dlogits);  // classes x batch

  const bool dropped = cache.mode == Mode::Train && cache.keep_prob < 1.0;
  const double keep = cache.keep_prob;

  for (std::size_t l = net.depth(); l-- > 0;) {
    const CsrMatrix& w = net.layers[l].weights;
    const DenseMatrix& src_act = cache.activations[l];
    auto& layer_grads = grads.layers[l];
    layer_grads.weights.assign(w.nnz(), 0.0);
    layer_grads.bias.assign(w.rows(), 0.0);

    const auto row_ptr = w.row_ptr();
    const auto col_idx = w.col_idx();
    const std::size_t batch = cache.batch;
    parallel_for(w.rows(), [&](std::size_t r0, std::size_t r1) {
      for (std::size_t i = r0; i < r1; ++i) {
        const double* __restrict d = delta.data() + i * batch;
        double bias_sum = 0.0;
        for (std::size_t s = 0; s < batch; ++s) bias_sum += d[s];
        layer_grads.bias[i] = bias_sum;
        for (std::uint64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
          const double* __restrict a = src_act.data() + col_idx[k] * batch;
          double g = 0.0;
          for (std::size_t s = 0; s < batch; ++s) g += d[s] * a[s];
          layer_grads.weights[k] = g;
        }
      }
    });

    if (l == 0) break;

    DenseMatrix upstream = spmm_transpose(w, delta);
    // src_act is the post-dropout activation a = mask * sigmoid(pre) / keep,
    // so sigmoid(pre) = a * keep wherever the unit was kept.
    double* __restrict u = upstream.data();
    const double* __restrict a = src_act.data();
    const std::size_t count = upstream.rows() * upstream.cols();
    if (dropped) {
      const auto& mask = cache.drop_masks[l - 1];
      for (std::size_t i = 0; i < count; ++i) {
        if (mask[i]) {
          const double h = a[i] * keep;
          u[i] = (u[i] / keep) * h * (1.0 - h);
        } else {
          u[i] = 0.0;
        }
      }
    } else {
      for (std::size_t i = 0; i < count; ++i) {
        u[i] *= a[i] * (1.0 - a[i]);
      }
    }
    delta = std::move(upstream);
  }
  return grads;
}

ParamCount param_count(const Network& net) {
  ParamCount pc;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    pc.weights += net.layers[l].weights.nnz();
    pc.biases += net.layer_dims[l + 1];
    pc.fc_equivalent_weights += net.layer_dims[l] * net.layer_dims[l + 1];
  }
  pc.total = pc.weights + pc.biases;
  pc.fc_equivalent_total = pc.fc_equivalent_weights + pc.biases;
  pc.reduction_ratio =
      1.0 - static_cast<double>(pc.weights) /
                static_cast<double>(pc.fc_equivalent_weights);
  return pc;
}

}  // namespace scnn
