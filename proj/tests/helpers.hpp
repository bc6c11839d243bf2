#pragma once

// Shared test utilities: independent dense oracles, random instance
// generators and a reference dense-masked network. Everything here is written
// against the plain definitions, not against the library kernels it checks.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scnn/csr.hpp"
#include "scnn/dense.hpp"
#include "scnn/mask.hpp"
#include "scnn/network.hpp"
#include "scnn/rng.hpp"

namespace scnn_test {

using scnn::CsrMatrix;
using scnn::DenseMatrix;
using scnn::Edge;

// ---------------------------------------------------------------------------
// dense oracles

inline DenseMatrix densify(const CsrMatrix& a) {
  DenseMatrix out(a.rows(), a.cols());
  a.for_each_edge([&](std::size_t r, std::size_t c, double v) { out(r, c) = v; });
  return out;
}

inline DenseMatrix dense_matmul_oracle(const DenseMatrix& a,
                                       const DenseMatrix& b) {
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

inline double max_rel_error(const DenseMatrix& got, const DenseMatrix& want) {
  double worst = 0.0;
  for (std::size_t i = 0; i < got.rows(); ++i) {
    for (std::size_t j = 0; j < got.cols(); ++j) {
      const double denom = std::max({std::abs(want(i, j)), std::abs(got(i, j)), 1.0});
      worst = std::max(worst, std::abs(got(i, j) - want(i, j)) / denom);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// random instances

inline std::vector<Edge> random_edges(std::size_t rows, std::size_t cols,
                                      std::size_t count, std::uint64_t seed) {
  scnn::SplitMix64 eng(scnn::RngSeed{seed, 0});
  std::vector<std::uint64_t> cells(rows * cols);
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = i;
  count = std::min(count, cells.size());
  std::vector<Edge> edges;
  edges.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t j = t + static_cast<std::size_t>(eng.below(cells.size() - t));
    std::swap(cells[t], cells[j]);
    edges.push_back(Edge{cells[t] / cols, cells[t] % cols,
                         eng.uniform(-1.0, 1.0)});
  }
  return edges;
}

inline DenseMatrix random_dense(std::size_t rows, std::size_t cols,
                                std::uint64_t seed, double lo = -1.0,
                                double hi = 1.0) {
  scnn::SplitMix64 eng(scnn::RngSeed{seed, 1});
  DenseMatrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = eng.uniform(lo, hi);
  }
  return out;
}

// ---------------------------------------------------------------------------
// reference dense-masked network (independent of the CSR path)

struct RefNet {
  // w[l][i][j]: weight from source j to target i; zero wherever masked out.
  std::vector<std::vector<std::vector<double>>> w;
  std::vector<std::vector<std::vector<std::uint8_t>>> mask;
  std::vector<std::vector<double>> bias;
  std::vector<std::size_t> dims;
};

inline RefNet ref_from_network(const scnn::Network& net) {
  RefNet ref;
  ref.dims = net.layer_dims;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const auto& weights = net.layers[l].weights;
    std::vector<std::vector<double>> wl(
        weights.rows(), std::vector<double>(weights.cols(), 0.0));
    std::vector<std::vector<std::uint8_t>> ml(
        weights.rows(), std::vector<std::uint8_t>(weights.cols(), 0));
    weights.for_each_edge([&](std::size_t r, std::size_t c, double v) {
      wl[r][c] = v;
      ml[r][c] = 1;
    });
    ref.w.push_back(std::move(wl));
    ref.mask.push_back(std::move(ml));
    ref.bias.push_back(net.layers[l].bias);
  }
  return ref;
}

inline double ref_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Activations per layer for a batch; entry 0 is the input, last entry holds
/// raw logits. batch is sample-major.
inline std::vector<std::vector<std::vector<double>>> ref_forward(
    const RefNet& ref, const std::vector<std::vector<double>>& batch) {
  std::vector<std::vector<std::vector<double>>> acts;
  acts.push_back(batch);
  for (std::size_t l = 0; l < ref.w.size(); ++l) {
    const bool last = l + 1 == ref.w.size();
    std::vector<std::vector<double>> next(
        batch.size(), std::vector<double>(ref.dims[l + 1], 0.0));
    for (std::size_t s = 0; s < batch.size(); ++s) {
      for (std::size_t i = 0; i < ref.dims[l + 1]; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < ref.dims[l]; ++j) {
          sum += ref.w[l][i][j] * acts.back()[s][j];
        }
        sum += ref.bias[l][i];
        next[s][i] = last ? sum : ref_sigmoid(sum);
      }
    }
    acts.push_back(std::move(next));
  }
  return acts;
}

struct RefGrads {
  std::vector<std::vector<std::vector<double>>> w;  // dense, mask-projected
  std::vector<std::vector<double>> bias;
};

/// Dense backprop from given dlogits (sample-major), gradients multiplied by
/// the mask indicator at the end.
inline RefGrads ref_backward(
    const RefNet& ref,
    const std::vector<std::vector<std::vector<double>>>& acts,
    const std::vector<std::vector<double>>& dlogits) {
  const std::size_t layers = ref.w.size();
  const std::size_t batch = dlogits.size();
  RefGrads grads;
  grads.w.resize(layers);
  grads.bias.resize(layers);
  std::vector<std::vector<double>> delta = dlogits;
  for (std::size_t l = layers; l-- > 0;) {
    grads.w[l].assign(ref.dims[l + 1], std::vector<double>(ref.dims[l], 0.0));
    grads.bias[l].assign(ref.dims[l + 1], 0.0);
    for (std::size_t i = 0; i < ref.dims[l + 1]; ++i) {
      for (std::size_t s = 0; s < batch; ++s) {
        grads.bias[l][i] += delta[s][i];
        for (std::size_t j = 0; j < ref.dims[l]; ++j) {
          grads.w[l][i][j] += delta[s][i] * acts[l][s][j];
        }
      }
    }
    if (l > 0) {
      std::vector<std::vector<double>> prev(
          batch, std::vector<double>(ref.dims[l], 0.0));
      for (std::size_t s = 0; s < batch; ++s) {
        for (std::size_t j = 0; j < ref.dims[l]; ++j) {
          double sum = 0.0;
          for (std::size_t i = 0; i < ref.dims[l + 1]; ++i) {
            sum += ref.w[l][i][j] * delta[s][i];
          }
          const double a = acts[l][s][j];
          prev[s][j] = sum * a * (1.0 - a);
        }
      }
      delta = std::move(prev);
    }
    for (std::size_t i = 0; i < ref.dims[l + 1]; ++i) {
      for (std::size_t j = 0; j < ref.dims[l]; ++j) {
        if (!ref.mask[l][i][j]) grads.w[l][i][j] = 0.0;
      }
    }
  }
  return grads;
}

inline std::vector<std::vector<double>> to_rows(const DenseMatrix& m) {
  std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// misc

/// Random network over arbitrary masks for oracle tests: every (i, j) edge is
/// kept with the given density (always at least one edge per target row).
inline scnn::Network random_masked_network(const std::vector<std::size_t>& dims,
                                           double density, std::uint64_t seed) {
  scnn::SplitMix64 eng(scnn::RngSeed{seed, 7});
  scnn::Network net;
  net.layer_dims = dims;
  net.dropout_keep_prob = 1.0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < dims[l + 1]; ++i) {
      bool any = false;
      for (std::size_t j = 0; j < dims[l]; ++j) {
        if (eng.uniform() < density) {
          edges.push_back(Edge{i, j, eng.uniform(-1.0, 1.0)});
          any = true;
        }
      }
      if (!any) {
        edges.push_back(Edge{i, static_cast<std::size_t>(eng.below(dims[l])),
                             eng.uniform(-1.0, 1.0)});
      }
    }
    scnn::LayerParams params;
    params.weights = scnn::csr_from_edges(dims[l + 1], dims[l], edges);
    params.mask.n_left = dims[l];
    params.mask.n_right = dims[l + 1];
    params.mask.adjacency.resize(dims[l]);
    params.weights.for_each_edge([&](std::size_t r, std::size_t c, double) {
      params.mask.adjacency[c].push_back(static_cast<std::uint32_t>(r));
    });
    for (auto& nbrs : params.mask.adjacency) std::sort(nbrs.begin(), nbrs.end());
    params.bias.resize(dims[l + 1]);
    for (auto& b : params.bias) b = eng.uniform(-0.5, 0.5);
    net.layers.push_back(std::move(params));
    net.kinds.push_back(scnn::ConnectivityKind::Full);
    net.sc_blocks.push_back(0);
  }
  return net;
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            ("scnn_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace scnn_test
