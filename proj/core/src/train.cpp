#include "scnn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "scnn/errors.hpp"
#include "scnn/text.hpp"

namespace scnn {

void sgd_step(Network& net, const Gradients& grads, const TrainConfig& cfg) {
  if (grads.layers.size() != net.depth()) {
    throw std::invalid_argument("sgd_step: gradient layer count mismatch");
  }
  const double lr = cfg.learning_rate;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    LayerParams& layer = net.layers[l];
    const Gradients::Layer& g = grads.layers[l];
    if (g.weights.size() != layer.weights.nnz() ||
        g.bias.size() != layer.bias.size()) {
      throw std::invalid_argument("sgd_step: gradients misaligned at transition " +
                                  std::to_string(l));
    }
    const double l1 = l == 0 ? cfg.l1_coeff_input : cfg.l1_coeff_other;
    auto values = layer.weights.values_mut();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double w = values[k];
      const double sign = w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
      values[k] = w - lr * (g.weights[k] + 2.0 * cfg.l2_coeff * w + l1 * sign);
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      layer.bias[i] -= lr * g.bias[i];
    }
  }
}

namespace {

DenseMatrix gather_rows(const DenseMatrix& src,
                        std::span<const std::size_t> idx) {
  DenseMatrix out(idx.size(), src.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto row = src.row(idx[i]);
    std::copy(row.begin(), row.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace

TrainHistory train_model(Network& net, const Dataset& train,
                         const Dataset& test, const TrainConfig& cfg) {
  if (train.size() == 0) throw std::invalid_argument("train_model: empty training set");
  if (train.features.cols() != net.input_dim()) {
    throw std::invalid_argument("train_model: dataset width " +
                                std::to_string(train.features.cols()) +
                                " does not match input dim " +
                                std::to_string(net.input_dim()));
  }
  if (cfg.batch_size == 0 || cfg.batch_size > train.size()) {
    throw std::invalid_argument("train_model: batch_size must be in [1, training-set size]");
  }

  TrainHistory history;
  const std::size_t n = train.size();
  std::vector<std::size_t> order(n);
  std::uint64_t global_step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 shuffler(
        derive_stream(cfg.shuffle_seed, rng_domain::kShuffle, epoch));
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(shuffler.below(n - i));
      std::swap(order[i], order[j]);
    }

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, n);
      const std::span<const std::size_t> idx(order.data() + begin, end - begin);
      const DenseMatrix batch = gather_rows(train.features, idx);
      std::vector<int> labels(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        labels[i] = train.labels[idx[i]];
      }

      ForwardResult fwd = forward(
          net, batch, Mode::Train,
          derive_stream(cfg.shuffle_seed, rng_domain::kDropout, global_step));
      LossResult loss = softmax_cross_entropy(fwd.logits, labels);
      if (!std::isfinite(loss.loss)) {
        throw NumericError("train_model: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(begin / cfg.batch_size));
      }
      loss_sum += loss.loss * static_cast<double>(idx.size());
      const Gradients grads = backward(net, fwd.cache, loss.dlogits);
      sgd_step(net, grads, cfg);
      ++global_step;
    }

    TrainHistory::Epoch record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(n);
    record.train_acc = evaluate(net, train);
    record.test_acc = evaluate(net, test);
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    history.epochs.push_back(record);
  }
  return history;
}

double evaluate(const Network& net, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  constexpr std::size_t kEvalBatch = 256;
  std::size_t correct = 0;
  std::vector<std::size_t> idx(kEvalBatch);
  for (std::size_t begin = 0; begin < data.size(); begin += kEvalBatch) {
    const std::size_t end = std::min(begin + kEvalBatch, data.size());
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const DenseMatrix batch = gather_rows(data.features, idx);
    const ForwardResult fwd = forward(net, batch, Mode::Eval, RngSeed{});
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto row = fwd.logits.row(i);
      std::size_t arg = 0;
      for (std::size_t c = 1; c < row.size(); ++c) {
        if (row[c] > row[arg]) arg = c;  // ties keep the lowest class
      }
      if (static_cast<int>(arg) == data.labels[begin + i]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

Network prune_blocks(const Network& net, std::size_t keep_blocks) {
  if (net.depth() < 2) {
    throw std::invalid_argument("prune_blocks: network has no hidden layers");
  }
  std::size_t blocks = 0;
  for (std::size_t l = 0; l + 1 < net.depth(); ++l) {
    if (net.kinds[l] != ConnectivityKind::Sc || net.sc_blocks[l] == 0) {
      throw std::invalid_argument(
          "prune_blocks: hidden transition " + std::to_string(l) +
          " is not spatially coupled");
    }
    if (l == 0) {
      blocks = net.sc_blocks[l];
    } else if (net.sc_blocks[l] != blocks) {
      throw std::invalid_argument("prune_blocks: block counts differ across layers");
    }
  }
  if (keep_blocks == 0 || keep_blocks > blocks) {
    throw std::invalid_argument("prune_blocks: keep_blocks must be in [1, " +
                                std::to_string(blocks) + "]");
  }

  Network pruned;
  pruned.dropout_keep_prob = net.dropout_keep_prob;
  pruned.kinds = net.kinds;
  pruned.layer_dims = net.layer_dims;
  pruned.sc_blocks.assign(net.depth(), 0);
  // Hidden layers shrink to their first keep_blocks blocks; blocks are
  // contiguous index ranges, so pruning truncates neuron indices.
  for (std::size_t layer = 1; layer + 1 < net.layer_dims.size(); ++layer) {
    const std::size_t block_size = net.layer_dims[layer] / blocks;
    pruned.layer_dims[layer] = block_size * keep_blocks;
  }
  for (std::size_t l = 0; l + 1 < net.depth(); ++l) {
    pruned.sc_blocks[l] = keep_blocks;
  }

  for (std::size_t l = 0; l < net.depth(); ++l) {
    const std::size_t new_src = pruned.layer_dims[l];
    const std::size_t new_dst = pruned.layer_dims[l + 1];
    std::vector<Edge> kept;
    net.layers[l].weights.for_each_edge(
        [&](std::size_t r, std::size_t c, double v) {
          if (r < new_dst && c < new_src) kept.push_back(Edge{r, c, v});
        });
    LayerParams params;
    params.weights = csr_from_edges(new_dst, new_src, kept);
    params.mask.n_left = new_src;
    params.mask.n_right = new_dst;
    params.mask.adjacency.resize(new_src);
    for (const Edge& e : kept) {
      params.mask.adjacency[e.col].push_back(static_cast<std::uint32_t>(e.row));
    }
    for (auto& nbrs : params.mask.adjacency) std::sort(nbrs.begin(), nbrs.end());
    params.bias.assign(net.layers[l].bias.begin(),
                       net.layers[l].bias.begin() + new_dst);
    pruned.layers.push_back(std::move(params));
  }
  return pruned;
}

std::vector<std::pair<std::size_t, std::size_t>> edge_decay_profile(
    const Network& net, double threshold) {
  const std::size_t inputs = net.input_dim();
  std::vector<std::size_t> counts(inputs, 0);
  net.layers.front().weights.for_each_edge(
      [&](std::size_t, std::size_t c, double v) {
        if (std::abs(v) > threshold) counts[c]++;
      });
  std::vector<std::pair<std::size_t, std::size_t>> profile(inputs);
  for (std::size_t i = 0; i < inputs; ++i) profile[i] = {i, counts[i]};
  return profile;
}

LayerImportanceProfile layer_importance_profile(const Network& net,
                                                const Dataset& data) {
  if (data.size() == 0) {
    throw std::invalid_argument("layer_importance_profile: empty dataset");
  }
  const std::size_t hidden_layers = net.depth() - 1;
  std::vector<std::vector<double>> sums(hidden_layers);
  std::vector<std::vector<double>> sq_sums(hidden_layers);
  for (std::size_t h = 0; h < hidden_layers; ++h) {
    sums[h].assign(net.layer_dims[h + 1], 0.0);
    sq_sums[h].assign(net.layer_dims[h + 1], 0.0);
  }

  constexpr std::size_t kBatch = 256;
  std::vector<std::size_t> idx(kBatch);
  for (std::size_t begin = 0; begin < data.size(); begin += kBatch) {
    const std::size_t end = std::min(begin + kBatch, data.size());
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const DenseMatrix batch = gather_rows(data.features, idx);
    const ForwardResult fwd = forward(net, batch, Mode::Eval, RngSeed{});
    for (std::size_t h = 0; h < hidden_layers; ++h) {
      const DenseMatrix& act = fwd.cache.activations[h + 1];
      for (std::size_t neuron = 0; neuron < act.rows(); ++neuron) {
        const auto row = act.row(neuron);
        for (double v : row) {
          sums[h][neuron] += v;
          sq_sums[h][neuron] += v * v;
        }
      }
    }
  }

  LayerImportanceProfile profile;
  profile.neuron_scores.resize(hidden_layers);
  profile.block_means.resize(hidden_layers);
  const double n = static_cast<double>(data.size());
  for (std::size_t h = 0; h < hidden_layers; ++h) {
    auto& scores = profile.neuron_scores[h];
    scores.resize(sums[h].size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double m = sums[h][i] / n;
      scores[i] = std::max(0.0, sq_sums[h][i] / n - m * m);
    }
    const std::size_t blocks = net.sc_blocks[h];
    if (blocks > 0) {
      const std::size_t block_size = scores.size() / blocks;
      auto& means = profile.block_means[h];
      means.resize(blocks, 0.0);
      for (std::size_t b = 0; b < blocks; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < block_size; ++i) {
          s += scores[b * block_size + i];
        }
        means[b] = s / static_cast<double>(block_size);
      }
    }
  }
  return profile;
}

void write_history_csv(const TrainHistory& history, std::ostream& os) {
  os << "epoch,train_loss,train_acc,test_acc,seconds\n";
  for (const auto& e : history.epochs) {
    os << e.epoch << ',' << fmt(e.train_loss) << ',' << fmt(e.train_acc) << ','
       << fmt(e.test_acc) << ',' << fmt(e.seconds) << '\n';
  }
}

void write_edge_decay_csv(
    const std::vector<std::pair<std::size_t, std::size_t>>& profile,
    std::ostream& os) {
  os << "input_index,count\n";
  for (const auto& [input, count] : profile) {
    os << input << ',' << count << '\n';
  }
}

void write_layer_importance_csv(const LayerImportanceProfile& profile,
                                std::ostream& os) {
  os << "layer,neuron,score\n";
  for (std::size_t h = 0; h < profile.neuron_scores.size(); ++h) {
    for (std::size_t i = 0; i < profile.neuron_scores[h].size(); ++i) {
      os << (h + 1) << ',' << i << ',' << fmt(profile.neuron_scores[h][i])
         << '\n';
    }
  }
}

}  // namespace scnn
