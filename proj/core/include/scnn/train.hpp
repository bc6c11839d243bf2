#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "scnn/dataset.hpp"
#include "scnn/network.hpp"
#include "scnn/rng.hpp"

namespace scnn {

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t batch_size = 128;
  std::size_t epochs = 50;
  double l2_coeff = 0.0;
  double l1_coeff_input = 0.0;  // transition 0 weights
  double l1_coeff_other = 0.0;  // every other transition
  RngSeed shuffle_seed;         // also seeds the per-step dropout streams
};

struct TrainHistory {
  struct Epoch {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double test_acc = 0.0;
    double seconds = 0.0;
  };
  std::vector<Epoch> epochs;
};

/// One SGD update: w <- w - lr * (g + 2*l2*w + l1*sign(w)) on present weights
/// (l1 picked per transition, subgradient at 0 is 0); biases update without
/// regularization. The weight support never changes.
void sgd_step(Network& net, const Gradients& grads, const TrainConfig& cfg);

/// Shuffled mini-batch SGD for cfg.epochs passes; deterministic given the
/// seeds. train_loss is the sample-weighted mean of mini-batch losses;
/// accuracies are measured at each epoch end. Throws NumericError naming the
/// epoch and batch if the loss goes non-finite.
TrainHistory train_model(Network& net, const Dataset& train,
                         const Dataset& test, const TrainConfig& cfg);

/// Fraction of samples whose argmax logit equals the label; ties resolve to
/// the lowest class index.
double evaluate(const Network& net, const Dataset& data);

/// Drops the trailing num_blocks - keep_blocks blocks of every hidden layer
/// together with all incident edges; head columns of removed last-hidden
/// neurons are dropped too. Requires every hidden transition to be SC with
/// one common block count.
Network prune_blocks(const Network& net, std::size_t keep_blocks);

/// Per input neuron, the number of first-transition weights with
/// |w| > threshold, in input order.
std::vector<std::pair<std::size_t, std::size_t>> edge_decay_profile(
    const Network& net, double threshold);

struct LayerImportanceProfile {
  // One entry per hidden layer: population variance of each neuron's
  // Eval-mode activation over the dataset.
  std::vector<std::vector<double>> neuron_scores;
  // Per-block means of the layer's neuron scores; empty when the layer is
  // not the target of an SC transition.
  std::vector<std::vector<double>> block_means;
};

LayerImportanceProfile layer_importance_profile(const Network& net,
                                                const Dataset& data);

void write_history_csv(const TrainHistory& history, std::ostream& os);
void write_edge_decay_csv(
    const std::vector<std::pair<std::size_t, std::size_t>>& profile,
    std::ostream& os);
void write_layer_importance_csv(const LayerImportanceProfile& profile,
                                std::ostream& os);

}  // namespace scnn
