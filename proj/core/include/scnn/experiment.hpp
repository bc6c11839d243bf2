#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "scnn/dataset.hpp"
#include "scnn/importance.hpp"
#include "scnn/network.hpp"

namespace scnn {

enum class ImportanceMethod { None, Pca, Rf };
enum class ConstructionKind { Fc, Rsp, Sc };
enum class DatasetKind { FashionMnist, Blobs };

/// One experiment, fully pinned: dataset, feature-importance method, input
/// ordering, network construction, training hyperparameters and seeds. The
/// flat key = value config format and the CLI flags bind to these fields
/// one-to-one.
struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::FashionMnist;
  std::string data_dir = "data";
  std::string out_dir = "out";
  ImportanceMethod importance = ImportanceMethod::Pca;
  Direction ordering = Direction::Descending;
  ConstructionKind construction = ConstructionKind::Sc;

  std::size_t hidden_layers = 5;
  std::size_t hidden_width = 784;

  std::size_t rsp_degree = 53;
  std::size_t num_blocks = 8;
  std::size_t receptive_field = 2;
  std::vector<std::size_t> block_degrees = {98, 130, 98, 49, 20, 10, 10, 10};

  double keep_prob = 1.0;
  double l2 = 5e-5;
  double l1_input = 0.0;
  double l1_other = 0.0;
  double lr = 0.1;
  std::size_t batch = 128;
  std::size_t epochs = 50;
  std::uint64_t seed = 1;
  int threads = 1;

  std::size_t rf_trees = 50;
  std::size_t rf_max_depth = 12;
  std::size_t rf_min_leaf = 5;
  std::size_t rf_features_per_split = 0;  // 0 = ceil(sqrt(features))
  double rf_subsample = 0.8;

  int blob_classes = 2;
  std::size_t blob_per_class = 200;
  std::size_t blob_dim = 2;
  double blob_spread = 0.1;

  double edge_decay_threshold = 0.1;
  bool edge_decay_control = true;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses flat "key = value" lines ('#' starts a comment) onto defaults.
/// Unknown keys and malformed values raise ConfigError.
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config_file(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

/// Applies a single key/value pair; shared by the file parser and the CLI
/// flag override path.
void apply_config_entry(ExperimentConfig& cfg, std::string_view key,
                        std::string_view value);

/// Internal-consistency checks that need no dataset (block degree count vs
/// num_blocks, ranges, achievability of the SC spec on hidden transitions).
void validate_config(const ExperimentConfig& cfg);

/// Loaded and feature-prepared data: importance scores computed, columns
/// transformed (PCA) and reordered per the configured direction.
struct PreparedData {
  Dataset train;
  Dataset test;
  ImportanceOrdering ordering;
};

PreparedData prepare_data(const ExperimentConfig& cfg);

/// Layer dims + connectivity per the config; the output head is always fully
/// connected.
NetworkSpec build_network_spec(const ExperimentConfig& cfg,
                               std::size_t input_dim, std::size_t num_classes);

struct TrainOutcome {
  double final_test_accuracy = 0.0;
  ParamCount params;
};

/// importance -> ordering -> mask build -> init -> train -> evaluate.
/// Writes model.scnn, history.csv and summary.txt under cfg.out_dir.
TrainOutcome cmd_train(const ExperimentConfig& cfg);

/// Runs the 12 configurations {PCA, RF} x {Descending, Ascending} x
/// {SC, RSP, FC} and writes table1.csv (measured accuracy next to the
/// published reference). FC rows run with dropout 0.5 and no l2; sparse rows
/// with l2 and no dropout.
void cmd_reproduce_table1(const ExperimentConfig& cfg);

struct EdgeDecayOutcome {
  double spearman_l1 = 0.0;
  double spearman_control = 0.0;
  bool control_ran = false;
};

/// Trains FC with l1 of 1e-4 on input-layer weights and 1e-5 elsewhere under
/// PCA-descending ordering, then writes edge_decay.csv (plus the l1 = 0
/// control when enabled) and the Spearman correlations between importance
/// rank and contributing-edge count.
EdgeDecayOutcome cmd_edge_decay(const ExperimentConfig& cfg);

/// Sweeps keep_blocks from the model's block count down to keep_blocks,
/// writing prune_report.csv (params and reduction are weight counts vs the
/// unpruned architecture's FC reference) and the pruned model.
void cmd_prune(const ExperimentConfig& cfg, const std::string& model_path,
               std::size_t keep_blocks);

/// Builds the configured masks without training and writes per-transition
/// edge CSVs, sidecar spec files, degree histograms and mask_stats.csv.
void cmd_mask_stats(const ExperimentConfig& cfg);

/// Computes the configured importance scores and writes importance.csv.
void cmd_importance_export(const ExperimentConfig& cfg);

std::string to_string(ImportanceMethod m);
std::string to_string(ConstructionKind c);
std::string to_string(Direction d);
std::string to_string(DatasetKind d);

}  // namespace scnn
