#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "scnn/errors.hpp"
#include "scnn/experiment.hpp"
#include "scnn/serialize.hpp"
#include "scnn/train.hpp"

using namespace scnn;
using namespace scnn_test;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file ", path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// history.csv minus its seconds column (the only timing field).
std::string strip_seconds(const std::string& csv) {
  std::stringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    const auto last_comma = line.rfind(',');
    out += line.substr(0, last_comma);
    out += '\n';
  }
  return out;
}

ExperimentConfig blob_config(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.dataset = DatasetKind::Blobs;
  cfg.out_dir = out_dir;
  cfg.importance = ImportanceMethod::Pca;
  cfg.ordering = Direction::Descending;
  cfg.construction = ConstructionKind::Fc;
  cfg.hidden_layers = 2;
  cfg.hidden_width = 16;
  cfg.keep_prob = 1.0;
  cfg.l2 = 0.0;
  cfg.lr = 0.5;
  cfg.batch = 32;
  cfg.epochs = 40;
  cfg.seed = 7;
  return cfg;
}

ExperimentConfig blob_sc_config(const std::string& out_dir) {
  ExperimentConfig cfg = blob_config(out_dir);
  cfg.construction = ConstructionKind::Sc;
  cfg.blob_dim = 4;
  cfg.blob_classes = 2;
  cfg.hidden_width = 8;
  cfg.num_blocks = 2;
  cfg.receptive_field = 1;
  cfg.block_degrees = {3, 2};
  cfg.epochs = 5;
  return cfg;
}

}  // namespace

TEST_CASE("config round-trips through serialize and parse") {
  ExperimentConfig cfg;
  cfg.dataset = DatasetKind::Blobs;
  cfg.data_dir = "/tmp/somewhere";
  cfg.out_dir = "runs/x";
  cfg.importance = ImportanceMethod::Rf;
  cfg.ordering = Direction::Ascending;
  cfg.construction = ConstructionKind::Rsp;
  cfg.hidden_layers = 3;
  cfg.hidden_width = 32;
  cfg.rsp_degree = 5;
  cfg.num_blocks = 4;
  cfg.receptive_field = 3;
  cfg.block_degrees = {9, 8, 7, 6};
  cfg.keep_prob = 0.5;
  cfg.l2 = 1.25e-5;
  cfg.l1_input = 1e-4;
  cfg.l1_other = 1e-5;
  cfg.lr = 0.05;
  cfg.batch = 64;
  cfg.epochs = 3;
  cfg.seed = 99;
  cfg.threads = 2;
  cfg.rf_trees = 10;
  cfg.rf_subsample = 0.65;
  cfg.blob_spread = 0.25;
  cfg.edge_decay_control = false;

  const ExperimentConfig back = parse_config_text(serialize_config(cfg));
  CHECK(back == cfg);
}

TEST_CASE("config parser handles comments, blanks and overrides") {
  const ExperimentConfig cfg = parse_config_text(
      "# experiment\n"
      "\n"
      "dataset = blobs   # synthetic\n"
      "epochs = 12\n"
      "block_degrees = 4, 3 ,2,1\n"
      "lr=0.25\n");
  CHECK(cfg.dataset == DatasetKind::Blobs);
  CHECK(cfg.epochs == 12);
  CHECK(cfg.block_degrees == std::vector<std::size_t>{4, 3, 2, 1});
  CHECK(cfg.lr == 0.25);

  ExperimentConfig base = cfg;
  apply_config_entry(base, "epochs", "50");
  CHECK(base.epochs == 50);
}

TEST_CASE("config parser rejects junk") {
  CHECK_THROWS_AS(parse_config_text("no_such_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("epochs = banana\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("this line has no equals\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("dataset = cifar\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("edge_decay_control = maybe\n"),
                  ConfigError);
}

TEST_CASE("validate_config rejects a block-degree count mismatch upfront") {
  ExperimentConfig cfg;
  cfg.construction = ConstructionKind::Sc;
  cfg.num_blocks = 8;
  cfg.block_degrees = {98, 130, 98, 49, 20, 10, 10};  // 7 entries
  CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("8 block"),
                       ConfigError);

  cfg.block_degrees = {98, 130, 98, 49, 20, 10, 10, 10};
  cfg.receptive_field = 9;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  cfg.receptive_field = 2;
  cfg.hidden_width = 783;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("cmd_train on the blob smoke config") {
  TempDir dir("cmd_train_blobs");
  const ExperimentConfig cfg = blob_config(dir.str() + "/run");
  const TrainOutcome outcome = cmd_train(cfg);
  CHECK(outcome.final_test_accuracy >= 0.98);

  CHECK(fs::exists(fs::path(cfg.out_dir) / "model.scnn"));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "history.csv"));
  const std::string summary = slurp(fs::path(cfg.out_dir) / "summary.txt");
  CHECK(summary.find("final_test_accuracy = ") != std::string::npos);
  CHECK(summary.find("reduction_ratio = ") != std::string::npos);

  const std::string history = slurp(fs::path(cfg.out_dir) / "history.csv");
  CHECK(history.rfind("epoch,train_loss,train_acc,test_acc,seconds\n", 0) == 0);
}

TEST_CASE("cmd_train is idempotent on outputs modulo timing") {
  TempDir dir("cmd_train_idem");
  ExperimentConfig cfg = blob_config(dir.str() + "/a");
  cfg.epochs = 4;
  cmd_train(cfg);
  ExperimentConfig cfg2 = cfg;
  cfg2.out_dir = dir.str() + "/b";
  cmd_train(cfg2);

  CHECK(slurp(dir.path() / "a/model.scnn") == slurp(dir.path() / "b/model.scnn"));
  CHECK(slurp(dir.path() / "a/summary.txt") == slurp(dir.path() / "b/summary.txt"));
  CHECK(strip_seconds(slurp(dir.path() / "a/history.csv")) ==
        strip_seconds(slurp(dir.path() / "b/history.csv")));
}

TEST_CASE("model round-trips through save and load with identical evaluation") {
  TempDir dir("serialize");
  const Network net = random_masked_network({5, 9, 3}, 0.5, 13);
  const Dataset data = synth_blobs(3, 25, 5, 0.4, RngSeed{3, 0});
  const double before = evaluate(net, data);

  const std::string path = dir.str() + "/model.scnn";
  save_model(net, path);
  const Network loaded = load_model(path);
  CHECK(evaluate(loaded, data) == before);
  CHECK(loaded.layer_dims == net.layer_dims);
  for (std::size_t l = 0; l < net.depth(); ++l) {
    CHECK(std::equal(net.layers[l].weights.values().begin(),
                     net.layers[l].weights.values().end(),
                     loaded.layers[l].weights.values().begin()));
    CHECK(net.layers[l].bias == loaded.layers[l].bias);
  }
}

namespace {

/// Independent CRC-32 (reflected 0xEDB88320 polynomial), bit by bit.
std::uint32_t crc32_oracle(const std::string& bytes) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (unsigned char b : bytes) {
    crc ^= b;
    for (int k = 0; k < 8; ++k) {
      crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
    }
  }
  return ~crc;
}

}  // namespace

TEST_CASE("model container byte layout is exactly as documented") {
  // One full 1x1 transition: weight 1.5, bias 0.25.
  Network net;
  net.layer_dims = {1, 1};
  net.kinds = {ConnectivityKind::Full};
  net.sc_blocks = {0};
  LayerParams params;
  params.weights = csr_from_edges(1, 1, {{{0, 0, 1.5}}});
  params.bias = {0.25};
  params.mask.n_left = 1;
  params.mask.n_right = 1;
  params.mask.adjacency = {{0}};
  net.layers.push_back(std::move(params));

  TempDir dir("wire_format");
  const std::string path = dir.str() + "/one.scnn";
  save_model(net, path);
  const std::string bytes = slurp(path);

  std::string want;
  want += "SCNN";
  const auto u32le = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) want += static_cast<char>(v >> (8 * i));
  };
  const auto u64le = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) want += static_cast<char>(v >> (8 * i));
  };
  u32le(1);               // version
  u32le(1);               // layer count
  want += '\0';           // connectivity tag: full
  u32le(1);               // rows
  u32le(1);               // cols
  u64le(0);               // row_ptr[0]
  u64le(1);               // row_ptr[1]
  u32le(0);               // col_idx[0]
  u64le(0x3FF8000000000000ull);  // 1.5
  u64le(0x3FD0000000000000ull);  // 0.25
  REQUIRE(bytes.size() == want.size() + 4);
  CHECK(bytes.substr(0, want.size()) == want);
  u32le(crc32_oracle(want));
  CHECK(bytes == want);
}

TEST_CASE("model loader rejects corruption") {
  TempDir dir("serialize_bad");
  const Network net = random_masked_network({4, 4, 2}, 0.6, 3);
  const std::string path = dir.str() + "/model.scnn";
  save_model(net, path);

  auto bytes = slurp(path);
  bytes[10] ^= 0x5A;
  std::ofstream(path, std::ios::binary) << bytes;
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("CRC"), DataError);

  std::ofstream(path, std::ios::binary) << "NOTAMODEL";
  CHECK_THROWS_AS(load_model(path), DataError);
  CHECK_THROWS_AS(load_model(dir.str() + "/missing.scnn"), DataError);
}

TEST_CASE("cmd_mask_stats writes the full-scale mask exports") {
  TempDir dir("mask_stats");
  ExperimentConfig cfg;
  cfg.out_dir = dir.str() + "/sc";
  cfg.construction = ConstructionKind::Sc;
  cfg.epochs = 0;
  cmd_mask_stats(cfg);

  const std::string stats = slurp(fs::path(cfg.out_dir) / "mask_stats.csv");
  CHECK(stats.rfind("transition,n_left,n_right,edges,density\n", 0) == 0);
  // 5 SC transitions of 41650 edges, then the 7840-edge FC head.
  for (int l = 0; l < 5; ++l) {
    const std::string row = std::to_string(l) + ",784,784,41650,";
    CHECK(stats.find(row) != std::string::npos);
    CHECK(fs::exists(fs::path(cfg.out_dir) /
                     ("mask_l" + std::to_string(l) + ".csv")));
    CHECK(fs::exists(fs::path(cfg.out_dir) /
                     ("mask_l" + std::to_string(l) + ".spec.txt")));
    CHECK(fs::exists(fs::path(cfg.out_dir) /
                     ("mask_l" + std::to_string(l) + "_degrees.csv")));
  }
  CHECK(stats.find("5,784,10,7840,1") != std::string::npos);

  // Edge CSV header and first data row of the degenerate block-1 window.
  const std::string edges = slurp(fs::path(cfg.out_dir) / "mask_l0.csv");
  CHECK(edges.rfind("left,right\n0,0\n", 0) == 0);

  ExperimentConfig rsp = cfg;
  rsp.out_dir = dir.str() + "/rsp";
  rsp.construction = ConstructionKind::Rsp;
  cmd_mask_stats(rsp);
  CHECK(slurp(fs::path(rsp.out_dir) / "mask_stats.csv")
            .find("0,784,784,41552,") != std::string::npos);

  ExperimentConfig fc = cfg;
  fc.out_dir = dir.str() + "/fc";
  fc.construction = ConstructionKind::Fc;
  cmd_mask_stats(fc);
  const std::string fc_stats = slurp(fs::path(fc.out_dir) / "mask_stats.csv");
  CHECK(fc_stats.find("0,784,784,614656,1") != std::string::npos);

  // Byte-identical on a second run.
  ExperimentConfig again = cfg;
  again.out_dir = dir.str() + "/sc2";
  cmd_mask_stats(again);
  CHECK(slurp(fs::path(cfg.out_dir) / "mask_l0.csv") ==
        slurp(fs::path(again.out_dir) / "mask_l0.csv"));
  CHECK(slurp(fs::path(cfg.out_dir) / "mask_stats.csv") ==
        slurp(fs::path(again.out_dir) / "mask_stats.csv"));
}

TEST_CASE("cmd_importance_export writes one row per feature") {
  TempDir dir("importance_export");
  ExperimentConfig cfg = blob_config(dir.str() + "/imp");
  cfg.blob_dim = 3;
  cmd_importance_export(cfg);
  const std::string csv = slurp(fs::path(cfg.out_dir) / "importance.csv");
  CHECK(csv.rfind("feature_index,score,rank\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 features
}

TEST_CASE("cmd_edge_decay runs on blobs and writes both profiles") {
  TempDir dir("edge_decay");
  ExperimentConfig cfg = blob_config(dir.str() + "/ed");
  cfg.blob_dim = 4;
  cfg.epochs = 5;
  const EdgeDecayOutcome outcome = cmd_edge_decay(cfg);
  CHECK(outcome.control_ran);
  CHECK(fs::exists(fs::path(cfg.out_dir) / "edge_decay.csv"));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "edge_decay_control.csv"));
  const std::string summary =
      slurp(fs::path(cfg.out_dir) / "edge_decay_summary.txt");
  CHECK(summary.find("spearman_l1 = ") != std::string::npos);
  CHECK(summary.find("spearman_control = ") != std::string::npos);

  const std::string csv = slurp(fs::path(cfg.out_dir) / "edge_decay.csv");
  CHECK(csv.rfind("input_index,count\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 inputs
}

TEST_CASE("cmd_prune sweeps keep_blocks and keeps the top row exact") {
  TempDir dir("prune");
  ExperimentConfig cfg = blob_sc_config(dir.str() + "/train");
  const TrainOutcome trained = cmd_train(cfg);

  ExperimentConfig prune_cfg = cfg;
  prune_cfg.out_dir = dir.str() + "/prune";
  cmd_prune(prune_cfg, cfg.out_dir + "/model.scnn", 1);

  const std::string report =
      slurp(fs::path(prune_cfg.out_dir) / "prune_report.csv");
  CHECK(report.rfind("keep_blocks,params,reduction_vs_fc,accuracy\n", 0) == 0);

  std::stringstream in(report);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  REQUIRE(rows.size() == 2);  // keep 2 (all) and keep 1
  CHECK(rows[0][0] == "2");
  CHECK(rows[1][0] == "1");
  // keep = B row reproduces the unpruned accuracy exactly.
  CHECK(std::stod(rows[0][3]) == trained.final_test_accuracy);
  // Params strictly decrease as blocks are removed.
  CHECK(std::stoull(rows[1][1]) < std::stoull(rows[0][1]));
  CHECK(fs::exists(fs::path(prune_cfg.out_dir) / "pruned_model.scnn"));
}

TEST_CASE("cmd_train writes the layer importance profiles") {
  TempDir dir("layer_importance");
  ExperimentConfig cfg = blob_sc_config(dir.str() + "/run");
  cmd_train(cfg);
  const std::string csv = slurp(fs::path(cfg.out_dir) / "layer_importance.csv");
  CHECK(csv.rfind("layer,neuron,score\n", 0) == 0);
  // 2 hidden layers x 8 neurons, plus the header.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);
  const std::string blocks =
      slurp(fs::path(cfg.out_dir) / "layer_importance_blocks.csv");
  CHECK(blocks.rfind("layer,block,mean_score\n", 0) == 0);
  CHECK(std::count(blocks.begin(), blocks.end(), '\n') == 5);  // 2 layers x 2 blocks
}

TEST_CASE("cmd_train runs against an IDX directory in the standard layout") {
  TempDir dir("mini_fashion");
  const std::string data = dir.str() + "/data";
  fs::create_directories(data);
  // 12 train and 4 test images of 2x2, labels cycling over 10 classes.
  SplitMix64 eng(RngSeed{1, 2});
  auto make_images = [&](std::uint32_t n) {
    IdxTensor t{{n, 2, 2}, {}};
    t.bytes.resize(static_cast<std::size_t>(n) * 4);
    for (auto& b : t.bytes) b = static_cast<std::uint8_t>(eng.below(256));
    return t;
  };
  auto make_labels = [&](std::uint32_t n) {
    IdxTensor t{{n}, {}};
    t.bytes.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      t.bytes[i] = static_cast<std::uint8_t>(i % 10);
    }
    return t;
  };
  write_idx(make_images(12), data + "/train-images-idx3-ubyte");
  write_idx(make_labels(12), data + "/train-labels-idx1-ubyte");
  write_idx(make_images(4), data + "/t10k-images-idx3-ubyte");
  write_idx(make_labels(4), data + "/t10k-labels-idx1-ubyte");

  ExperimentConfig cfg;
  cfg.dataset = DatasetKind::FashionMnist;
  cfg.data_dir = data;
  cfg.out_dir = dir.str() + "/run";
  cfg.construction = ConstructionKind::Fc;
  cfg.importance = ImportanceMethod::Rf;
  cfg.rf_trees = 3;
  cfg.rf_min_leaf = 2;
  cfg.hidden_layers = 1;
  cfg.hidden_width = 8;
  cfg.batch = 4;
  cfg.epochs = 2;
  const TrainOutcome outcome = cmd_train(cfg);
  CHECK(outcome.params.weights == 4 * 8 + 8 * 10);
  CHECK(fs::exists(fs::path(cfg.out_dir) / "model.scnn"));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "history.csv"));
}

TEST_CASE("cmd_train surfaces data problems as DataError") {
  TempDir dir("missing_data");
  ExperimentConfig cfg;
  cfg.dataset = DatasetKind::FashionMnist;
  cfg.data_dir = dir.str() + "/nowhere";
  cfg.out_dir = dir.str() + "/out";
  cfg.epochs = 1;
  CHECK_THROWS_AS(cmd_train(cfg), DataError);
}
