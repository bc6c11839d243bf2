// Command line front end. Subcommands: train, reproduce-table1, edge-decay,
// prune, mask-stats, importance-export. Options mirror the config file keys
// with a -- prefix; --config loads a file first and explicit flags override
// its values. Exit codes: 0 success, 2 config error, 3 data error, 4 numeric
// failure.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include "scnn/errors.hpp"
#include "scnn/experiment.hpp"

namespace {

const std::vector<std::string> kConfigKeys = {
    "dataset",        "data_dir",        "out_dir",
    "importance",     "ordering",        "construction",
    "hidden_layers",  "hidden_width",    "rsp_degree",
    "num_blocks",     "receptive_field", "block_degrees",
    "keep_prob",      "l2",              "l1_input",
    "l1_other",       "lr",              "batch",
    "epochs",         "seed",            "threads",
    "rf_trees",       "rf_max_depth",    "rf_min_leaf",
    "rf_features_per_split", "rf_subsample", "blob_classes",
    "blob_per_class", "blob_dim",        "blob_spread",
    "edge_decay_threshold", "edge_decay_control",
};

struct CommandState {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

void add_config_options(CLI::App* cmd, CommandState& state) {
  cmd->add_option("--config", state.config_path,
                  "flat key = value config file; flags override its values");
  for (const std::string& key : kConfigKeys) {
    std::string names = "--" + key;
    std::string dashed = key;
    for (char& c : dashed) {
      if (c == '_') c = '-';
    }
    if (dashed != key) names += ",--" + dashed;
    cmd->add_option_function<std::string>(
        names,
        [&state, key](const std::string& value) {
          state.overrides[key] = value;
        },
        "config key " + key);
  }
}

scnn::ExperimentConfig resolve_config(const CommandState& state) {
  scnn::ExperimentConfig cfg;
  if (!state.config_path.empty()) {
    cfg = scnn::load_config_file(state.config_path);
  }
  for (const auto& [key, value] : state.overrides) {
    scnn::apply_config_entry(cfg, key, value);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatially-coupled sparse neural network experiments"};
  app.require_subcommand(1);

  CommandState train_state, table_state, decay_state, prune_state,
      stats_state, importance_state;

  CLI::App* train = app.add_subcommand(
      "train", "train one configuration and write model + history + summary");
  add_config_options(train, train_state);

  CLI::App* table = app.add_subcommand(
      "reproduce-table1",
      "run the 12 importance/ordering/construction configurations");
  add_config_options(table, table_state);

  CLI::App* decay = app.add_subcommand(
      "edge-decay",
      "FC run with l1 regularization; counts contributing edges per input");
  add_config_options(decay, decay_state);

  CLI::App* prune = app.add_subcommand(
      "prune", "sweep keep_blocks on a trained SC model and re-evaluate");
  add_config_options(prune, prune_state);
  std::string model_path;
  std::size_t keep_blocks = 1;
  prune->add_option("--model", model_path, "trained SC model file")->required();
  prune->add_option("--keep-blocks", keep_blocks,
                    "lowest block count to sweep down to")
      ->required();

  CLI::App* stats = app.add_subcommand(
      "mask-stats", "build the configured masks and export edges + stats");
  add_config_options(stats, stats_state);

  CLI::App* importance = app.add_subcommand(
      "importance-export", "compute importance scores and write the CSV");
  add_config_options(importance, importance_state);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit 0; anything else is a config error.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) {
      const scnn::TrainOutcome outcome =
          scnn::cmd_train(resolve_config(train_state));
      std::printf("final_test_accuracy = %.6f\n", outcome.final_test_accuracy);
      std::printf("weights = %zu, reduction_ratio = %.6f\n",
                  outcome.params.weights, outcome.params.reduction_ratio);
    } else if (table->parsed()) {
      scnn::cmd_reproduce_table1(resolve_config(table_state));
    } else if (decay->parsed()) {
      const scnn::EdgeDecayOutcome outcome =
          scnn::cmd_edge_decay(resolve_config(decay_state));
      std::printf("spearman_l1 = %.4f\n", outcome.spearman_l1);
      if (outcome.control_ran) {
        std::printf("spearman_control = %.4f\n", outcome.spearman_control);
      }
    } else if (prune->parsed()) {
      scnn::cmd_prune(resolve_config(prune_state), model_path, keep_blocks);
    } else if (stats->parsed()) {
      scnn::cmd_mask_stats(resolve_config(stats_state));
    } else if (importance->parsed()) {
      scnn::cmd_importance_export(resolve_config(importance_state));
    }
  } catch (const scnn::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const scnn::DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const scnn::NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
