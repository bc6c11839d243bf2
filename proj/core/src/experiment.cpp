#include "scnn/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "scnn/errors.hpp"
#include "scnn/forest.hpp"
#include "scnn/serialize.hpp"
#include "scnn/stats.hpp"
#include "scnn/text.hpp"
#include "scnn/threading.hpp"
#include "scnn/train.hpp"

namespace scnn {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  try {
    std::size_t pos = 0;
    const std::string v(value);
    const std::uint64_t out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + std::string(key) +
                      "' expects an unsigned integer, got '" +
                      std::string(value) + "'");
  }
}

double parse_double(std::string_view key, std::string_view value) {
  try {
    std::size_t pos = 0;
    const std::string v(value);
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + std::string(key) +
                      "' expects a number, got '" + std::string(value) + "'");
  }
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("config: key '" + std::string(key) +
                    "' expects true or false, got '" + std::string(value) +
                    "'");
}

std::vector<std::size_t> parse_size_list(std::string_view key,
                                         std::string_view value) {
  std::vector<std::size_t> out;
  std::string item;
  std::stringstream ss{std::string(value)};
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_u64(key, trim(item)));
  }
  if (out.empty()) {
    throw ConfigError("config: key '" + std::string(key) +
                      "' expects a comma-separated list");
  }
  return out;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

TrainConfig train_config_from(const ExperimentConfig& cfg) {
  TrainConfig tc;
  tc.learning_rate = cfg.lr;
  tc.batch_size = cfg.batch;
  tc.epochs = cfg.epochs;
  tc.l2_coeff = cfg.l2;
  tc.l1_coeff_input = cfg.l1_input;
  tc.l1_coeff_other = cfg.l1_other;
  tc.shuffle_seed = RngSeed{cfg.seed, 0};
  return tc;
}

RfConfig rf_config_from(const ExperimentConfig& cfg) {
  RfConfig rf;
  rf.num_trees = cfg.rf_trees;
  rf.max_depth = cfg.rf_max_depth;
  rf.min_samples_leaf = cfg.rf_min_leaf;
  rf.features_per_split = cfg.rf_features_per_split;
  rf.subsample_fraction = cfg.rf_subsample;
  rf.seed = RngSeed{cfg.seed, 0};
  return rf;
}

std::string summary_text(const ExperimentConfig& cfg, double accuracy,
                         const ParamCount& pc) {
  std::ostringstream os;
  os << "dataset = " << to_string(cfg.dataset) << '\n'
     << "construction = " << to_string(cfg.construction) << '\n'
     << "importance = " << to_string(cfg.importance) << '\n'
     << "ordering = " << to_string(cfg.ordering) << '\n'
     << "final_test_accuracy = " << fmt(accuracy) << '\n'
     << "weights = " << pc.weights << '\n'
     << "biases = " << pc.biases << '\n'
     << "total = " << pc.total << '\n'
     << "fc_equivalent_weights = " << pc.fc_equivalent_weights << '\n'
     << "fc_equivalent_total = " << pc.fc_equivalent_total << '\n'
     << "reduction_ratio = " << fmt(pc.reduction_ratio) << '\n';
  return os.str();
}

/// Core of cmd_train once the data is prepared; shared with the table-1 and
/// edge-decay sweeps.
struct RunResult {
  Network net;
  TrainHistory history;
  double final_test_accuracy = 0.0;
};

RunResult run_experiment(const ExperimentConfig& cfg,
                         const PreparedData& data) {
  NetworkSpec spec = build_network_spec(cfg, data.train.features.cols(),
                                        data.train.num_classes);
  RunResult result;
  result.net = init_network(spec);
  result.history =
      train_model(result.net, data.train, data.test, train_config_from(cfg));
  result.final_test_accuracy = evaluate(result.net, data.test);
  return result;
}

void write_run_outputs(const ExperimentConfig& cfg, const RunResult& run) {
  fs::create_directories(cfg.out_dir);
  save_model(run.net, (fs::path(cfg.out_dir) / "model.scnn").string());
  {
    std::ofstream os(fs::path(cfg.out_dir) / "history.csv");
    write_history_csv(run.history, os);
  }
  write_text_file(fs::path(cfg.out_dir) / "summary.txt",
                  summary_text(cfg, run.final_test_accuracy,
                               param_count(run.net)));
}

void write_layer_importance(const ExperimentConfig& cfg, const Network& net,
                            const Dataset& test) {
  const LayerImportanceProfile profile = layer_importance_profile(net, test);
  std::ofstream os(fs::path(cfg.out_dir) / "layer_importance.csv");
  write_layer_importance_csv(profile, os);
  if (std::any_of(profile.block_means.begin(), profile.block_means.end(),
                  [](const auto& m) { return !m.empty(); })) {
    std::ostringstream blocks;
    blocks << "layer,block,mean_score\n";
    for (std::size_t h = 0; h < profile.block_means.size(); ++h) {
      for (std::size_t b = 0; b < profile.block_means[h].size(); ++b) {
        blocks << (h + 1) << ',' << (b + 1) << ','
               << fmt(profile.block_means[h][b]) << '\n';
      }
    }
    write_text_file(fs::path(cfg.out_dir) / "layer_importance_blocks.csv",
                    blocks.str());
  }
}

}  // namespace

std::string to_string(ImportanceMethod m) {
  switch (m) {
    case ImportanceMethod::None: return "none";
    case ImportanceMethod::Pca: return "pca";
    case ImportanceMethod::Rf: return "rf";
  }
  return "?";
}

std::string to_string(ConstructionKind c) {
  switch (c) {
    case ConstructionKind::Fc: return "fc";
    case ConstructionKind::Rsp: return "rsp";
    case ConstructionKind::Sc: return "sc";
  }
  return "?";
}

std::string to_string(Direction d) {
  return d == Direction::Descending ? "descending" : "ascending";
}

std::string to_string(DatasetKind d) {
  return d == DatasetKind::FashionMnist ? "fashion-mnist" : "blobs";
}

void apply_config_entry(ExperimentConfig& cfg, std::string_view key,
                        std::string_view value) {
  if (key == "dataset") {
    if (value == "fashion-mnist") cfg.dataset = DatasetKind::FashionMnist;
    else if (value == "blobs") cfg.dataset = DatasetKind::Blobs;
    else throw ConfigError("config: dataset must be fashion-mnist or blobs");
  } else if (key == "data_dir") {
    cfg.data_dir = std::string(value);
  } else if (key == "out_dir") {
    cfg.out_dir = std::string(value);
  } else if (key == "importance") {
    if (value == "none") cfg.importance = ImportanceMethod::None;
    else if (value == "pca") cfg.importance = ImportanceMethod::Pca;
    else if (value == "rf") cfg.importance = ImportanceMethod::Rf;
    else throw ConfigError("config: importance must be none, pca or rf");
  } else if (key == "ordering") {
    if (value == "descending") cfg.ordering = Direction::Descending;
    else if (value == "ascending") cfg.ordering = Direction::Ascending;
    else throw ConfigError("config: ordering must be descending or ascending");
  } else if (key == "construction") {
    if (value == "fc") cfg.construction = ConstructionKind::Fc;
    else if (value == "rsp") cfg.construction = ConstructionKind::Rsp;
    else if (value == "sc") cfg.construction = ConstructionKind::Sc;
    else throw ConfigError("config: construction must be fc, rsp or sc");
  } else if (key == "hidden_layers") {
    cfg.hidden_layers = parse_u64(key, value);
  } else if (key == "hidden_width") {
    cfg.hidden_width = parse_u64(key, value);
  } else if (key == "rsp_degree") {
    cfg.rsp_degree = parse_u64(key, value);
  } else if (key == "num_blocks") {
    cfg.num_blocks = parse_u64(key, value);
  } else if (key == "receptive_field") {
    cfg.receptive_field = parse_u64(key, value);
  } else if (key == "block_degrees") {
    cfg.block_degrees = parse_size_list(key, value);
  } else if (key == "keep_prob") {
    cfg.keep_prob = parse_double(key, value);
  } else if (key == "l2") {
    cfg.l2 = parse_double(key, value);
  } else if (key == "l1_input") {
    cfg.l1_input = parse_double(key, value);
  } else if (key == "l1_other") {
    cfg.l1_other = parse_double(key, value);
  } else if (key == "lr") {
    cfg.lr = parse_double(key, value);
  } else if (key == "batch") {
    cfg.batch = parse_u64(key, value);
  } else if (key == "epochs") {
    cfg.epochs = parse_u64(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_u64(key, value);
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(parse_u64(key, value));
  } else if (key == "rf_trees") {
    cfg.rf_trees = parse_u64(key, value);
  } else if (key == "rf_max_depth") {
    cfg.rf_max_depth = parse_u64(key, value);
  } else if (key == "rf_min_leaf") {
    cfg.rf_min_leaf = parse_u64(key, value);
  } else if (key == "rf_features_per_split") {
    cfg.rf_features_per_split = parse_u64(key, value);
  } else if (key == "rf_subsample") {
    cfg.rf_subsample = parse_double(key, value);
  } else if (key == "blob_classes") {
    cfg.blob_classes = static_cast<int>(parse_u64(key, value));
  } else if (key == "blob_per_class") {
    cfg.blob_per_class = parse_u64(key, value);
  } else if (key == "blob_dim") {
    cfg.blob_dim = parse_u64(key, value);
  } else if (key == "blob_spread") {
    cfg.blob_spread = parse_double(key, value);
  } else if (key == "edge_decay_threshold") {
    cfg.edge_decay_threshold = parse_double(key, value);
  } else if (key == "edge_decay_control") {
    cfg.edge_decay_control = parse_bool(key, value);
  } else {
    throw ConfigError("config: unknown key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config_text(std::string_view text) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                      : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(line_no) +
                        " is not a key = value pair");
    }
    apply_config_entry(cfg, trim(std::string_view(stripped).substr(0, eq)),
                       trim(std::string_view(stripped).substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "dataset = " << to_string(cfg.dataset) << '\n'
     << "data_dir = " << cfg.data_dir << '\n'
     << "out_dir = " << cfg.out_dir << '\n'
     << "importance = " << to_string(cfg.importance) << '\n'
     << "ordering = " << to_string(cfg.ordering) << '\n'
     << "construction = " << to_string(cfg.construction) << '\n'
     << "hidden_layers = " << cfg.hidden_layers << '\n'
     << "hidden_width = " << cfg.hidden_width << '\n'
     << "rsp_degree = " << cfg.rsp_degree << '\n'
     << "num_blocks = " << cfg.num_blocks << '\n'
     << "receptive_field = " << cfg.receptive_field << '\n';
  os << "block_degrees = ";
  for (std::size_t i = 0; i < cfg.block_degrees.size(); ++i) {
    if (i > 0) os << ',';
    os << cfg.block_degrees[i];
  }
  os << '\n'
     << "keep_prob = " << fmt(cfg.keep_prob) << '\n'
     << "l2 = " << fmt(cfg.l2) << '\n'
     << "l1_input = " << fmt(cfg.l1_input) << '\n'
     << "l1_other = " << fmt(cfg.l1_other) << '\n'
     << "lr = " << fmt(cfg.lr) << '\n'
     << "batch = " << cfg.batch << '\n'
     << "epochs = " << cfg.epochs << '\n'
     << "seed = " << cfg.seed << '\n'
     << "threads = " << cfg.threads << '\n'
     << "rf_trees = " << cfg.rf_trees << '\n'
     << "rf_max_depth = " << cfg.rf_max_depth << '\n'
     << "rf_min_leaf = " << cfg.rf_min_leaf << '\n'
     << "rf_features_per_split = " << cfg.rf_features_per_split << '\n'
     << "rf_subsample = " << fmt(cfg.rf_subsample) << '\n'
     << "blob_classes = " << cfg.blob_classes << '\n'
     << "blob_per_class = " << cfg.blob_per_class << '\n'
     << "blob_dim = " << cfg.blob_dim << '\n'
     << "blob_spread = " << fmt(cfg.blob_spread) << '\n'
     << "edge_decay_threshold = " << fmt(cfg.edge_decay_threshold) << '\n'
     << "edge_decay_control = "
     << (cfg.edge_decay_control ? "true" : "false") << '\n';
  return os.str();
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.hidden_layers == 0 || cfg.hidden_width == 0) {
    throw ConfigError("config: hidden_layers and hidden_width must be positive");
  }
  if (cfg.lr <= 0.0) throw ConfigError("config: lr must be positive");
  if (cfg.batch == 0) throw ConfigError("config: batch must be positive");
  if (cfg.keep_prob <= 0.0 || cfg.keep_prob > 1.0) {
    throw ConfigError("config: keep_prob must be in (0, 1]");
  }
  if (cfg.l2 < 0.0 || cfg.l1_input < 0.0 || cfg.l1_other < 0.0) {
    throw ConfigError("config: regularization coefficients must be non-negative");
  }
  if (cfg.threads < 1) throw ConfigError("config: threads must be at least 1");
  if (cfg.rf_subsample <= 0.0 || cfg.rf_subsample > 1.0) {
    throw ConfigError("config: rf_subsample must be in (0, 1]");
  }
  if (cfg.rf_trees == 0 || cfg.rf_max_depth == 0 || cfg.rf_min_leaf == 0) {
    throw ConfigError("config: rf_trees, rf_max_depth, rf_min_leaf must be positive");
  }
  if (cfg.blob_classes <= 0 || cfg.blob_per_class == 0 || cfg.blob_dim == 0 ||
      cfg.blob_spread < 0.0) {
    throw ConfigError("config: blob parameters must be positive");
  }
  if (cfg.construction == ConstructionKind::Rsp) {
    if (cfg.rsp_degree == 0 || cfg.rsp_degree > cfg.hidden_width) {
      throw ConfigError("config: rsp_degree must be in [1, hidden_width]");
    }
  }
  if (cfg.construction == ConstructionKind::Sc) {
    if (cfg.block_degrees.size() != cfg.num_blocks) {
      throw ConfigError("config: expected " + std::to_string(cfg.num_blocks) +
                        " block degrees, got " +
                        std::to_string(cfg.block_degrees.size()));
    }
    if (cfg.receptive_field == 0 || cfg.receptive_field > cfg.num_blocks) {
      throw ConfigError("config: receptive_field must be in [1, num_blocks]");
    }
    if (cfg.hidden_width % cfg.num_blocks != 0) {
      throw ConfigError("config: num_blocks must divide hidden_width");
    }
    ScLayerSpec hidden;
    hidden.n_left = cfg.hidden_width;
    hidden.n_right = cfg.hidden_width;
    hidden.num_blocks = cfg.num_blocks;
    hidden.receptive_field = cfg.receptive_field;
    hidden.block_degrees = cfg.block_degrees;
    try {
      hidden.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  PreparedData out;
  if (cfg.dataset == DatasetKind::FashionMnist) {
    auto [train, test] = load_fashion_mnist(cfg.data_dir);
    out.train = std::move(train);
    out.test = std::move(test);
  } else {
    out.train = synth_blobs(cfg.blob_classes, cfg.blob_per_class, cfg.blob_dim,
                            cfg.blob_spread, RngSeed{cfg.seed, 0});
    out.test = synth_blobs(cfg.blob_classes,
                           std::max<std::size_t>(1, cfg.blob_per_class / 2),
                           cfg.blob_dim, cfg.blob_spread, RngSeed{cfg.seed, 1});
  }

  switch (cfg.importance) {
    case ImportanceMethod::Pca: {
      const PcaModel model = pca_fit(out.train.features);
      out.train.features = pca_transform(model, out.train.features);
      out.test.features = pca_transform(model, out.test.features);
      out.ordering = make_ordering(model.eigenvalues, cfg.ordering);
      out.train.features = apply_ordering(out.train.features, out.ordering);
      out.test.features = apply_ordering(out.test.features, out.ordering);
      break;
    }
    case ImportanceMethod::Rf: {
      const RfImportance imp =
          rf_importance(out.train.features, out.train.labels,
                        rf_config_from(cfg));
      out.ordering = make_ordering(imp.scores, cfg.ordering);
      out.train.features = apply_ordering(out.train.features, out.ordering);
      out.test.features = apply_ordering(out.test.features, out.ordering);
      break;
    }
    case ImportanceMethod::None: {
      out.ordering = make_ordering(
          std::vector<double>(out.train.features.cols(), 0.0), cfg.ordering);
      break;
    }
  }
  return out;
}

NetworkSpec build_network_spec(const ExperimentConfig& cfg,
                               std::size_t input_dim,
                               std::size_t num_classes) {
  NetworkSpec spec;
  spec.layer_dims.push_back(input_dim);
  for (std::size_t l = 0; l < cfg.hidden_layers; ++l) {
    spec.layer_dims.push_back(cfg.hidden_width);
  }
  spec.layer_dims.push_back(num_classes);
  spec.dropout_keep_prob = cfg.keep_prob;
  spec.init_seed = RngSeed{cfg.seed, 0};

  for (std::size_t l = 0; l < cfg.hidden_layers; ++l) {
    const std::size_t n_src = spec.layer_dims[l];
    const std::size_t n_dst = spec.layer_dims[l + 1];
    switch (cfg.construction) {
      case ConstructionKind::Fc:
        spec.connectivity.push_back(Connectivity::full());
        break;
      case ConstructionKind::Rsp:
        spec.connectivity.push_back(Connectivity::rsp(
            DegreeDistribution::left_regular(cfg.rsp_degree)));
        break;
      case ConstructionKind::Sc: {
        ScLayerSpec sc;
        sc.n_left = n_src;
        sc.n_right = n_dst;
        sc.num_blocks = cfg.num_blocks;
        sc.receptive_field = cfg.receptive_field;
        sc.block_degrees = cfg.block_degrees;
        spec.connectivity.push_back(Connectivity::spatially_coupled(sc));
        break;
      }
    }
  }
  // Output head is fully connected for every construction.
  spec.connectivity.push_back(Connectivity::full());
  return spec;
}

TrainOutcome cmd_train(const ExperimentConfig& cfg) {
  validate_config(cfg);
  set_num_threads(cfg.threads);
  const PreparedData data = prepare_data(cfg);
  const RunResult run = run_experiment(cfg, data);
  write_run_outputs(cfg, run);
  write_layer_importance(cfg, run.net, data.test);
  return TrainOutcome{run.final_test_accuracy, param_count(run.net)};
}

void cmd_reproduce_table1(const ExperimentConfig& cfg) {
  validate_config(cfg);
  set_num_threads(cfg.threads);
  fs::create_directories(cfg.out_dir);

  struct Row {
    ImportanceMethod method;
    Direction direction;
    ConstructionKind construction;
    double reference_accuracy;
  };
  const std::vector<Row> rows = {
      {ImportanceMethod::Pca, Direction::Descending, ConstructionKind::Sc, 87.18},
      {ImportanceMethod::Pca, Direction::Descending, ConstructionKind::Rsp, 84.33},
      {ImportanceMethod::Pca, Direction::Descending, ConstructionKind::Fc, 86.78},
      {ImportanceMethod::Pca, Direction::Ascending, ConstructionKind::Sc, 10.00},
      {ImportanceMethod::Pca, Direction::Ascending, ConstructionKind::Rsp, 84.33},
      {ImportanceMethod::Pca, Direction::Ascending, ConstructionKind::Fc, 86.78},
      {ImportanceMethod::Rf, Direction::Descending, ConstructionKind::Sc, 86.40},
      {ImportanceMethod::Rf, Direction::Descending, ConstructionKind::Rsp, 84.54},
      {ImportanceMethod::Rf, Direction::Descending, ConstructionKind::Fc, 86.06},
      {ImportanceMethod::Rf, Direction::Ascending, ConstructionKind::Sc, 85.26},
      {ImportanceMethod::Rf, Direction::Ascending, ConstructionKind::Rsp, 84.54},
      {ImportanceMethod::Rf, Direction::Ascending, ConstructionKind::Fc, 86.06},
  };

  std::ostringstream csv;
  csv << "feature_importance,input_ordering,construction,accuracy_percent,"
         "reference_accuracy_percent\n";

  ImportanceMethod cached_method{};
  Direction cached_direction{};
  PreparedData data;
  bool have_data = false;

  for (const Row& row : rows) {
    ExperimentConfig run_cfg = cfg;
    run_cfg.importance = row.method;
    run_cfg.ordering = row.direction;
    run_cfg.construction = row.construction;
    if (row.construction == ConstructionKind::Fc) {
      // FC baseline trains with dropout instead of l2.
      run_cfg.keep_prob = 0.5;
      run_cfg.l2 = 0.0;
    } else {
      run_cfg.keep_prob = 1.0;
    }
    run_cfg.out_dir = cfg.out_dir + "/table1/" + to_string(row.method) + "_" +
                      to_string(row.direction) + "_" +
                      to_string(row.construction);

    if (!have_data || cached_method != row.method ||
        cached_direction != row.direction) {
      data = prepare_data(run_cfg);
      cached_method = row.method;
      cached_direction = row.direction;
      have_data = true;
    }

    const RunResult run = run_experiment(run_cfg, data);
    write_run_outputs(run_cfg, run);
    csv << to_string(row.method) << ',' << to_string(row.direction) << ','
        << to_string(row.construction) << ','
        << fmt(run.final_test_accuracy * 100.0) << ','
        << fmt(row.reference_accuracy) << '\n';
  }
  write_text_file(fs::path(cfg.out_dir) / "table1.csv", csv.str());
}

EdgeDecayOutcome cmd_edge_decay(const ExperimentConfig& cfg) {
  validate_config(cfg);
  set_num_threads(cfg.threads);
  fs::create_directories(cfg.out_dir);

  ExperimentConfig run_cfg = cfg;
  run_cfg.construction = ConstructionKind::Fc;
  run_cfg.importance = ImportanceMethod::Pca;
  run_cfg.ordering = Direction::Descending;
  run_cfg.keep_prob = 1.0;
  run_cfg.l2 = 0.0;
  if (run_cfg.l1_input == 0.0) run_cfg.l1_input = 1e-4;
  if (run_cfg.l1_other == 0.0) run_cfg.l1_other = 1e-5;

  const PreparedData data = prepare_data(run_cfg);

  auto run_and_profile = [&](const ExperimentConfig& c,
                             const std::string& csv_name) {
    const RunResult run = run_experiment(c, data);
    const auto profile = edge_decay_profile(run.net, c.edge_decay_threshold);
    std::ofstream os(fs::path(cfg.out_dir) / csv_name);
    write_edge_decay_csv(profile, os);
    std::vector<double> positions(profile.size());
    std::vector<double> counts(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i) {
      positions[i] = static_cast<double>(profile[i].first);
      counts[i] = static_cast<double>(profile[i].second);
    }
    return spearman(positions, counts);
  };

  EdgeDecayOutcome outcome;
  outcome.spearman_l1 = run_and_profile(run_cfg, "edge_decay.csv");

  if (cfg.edge_decay_control) {
    ExperimentConfig control_cfg = run_cfg;
    control_cfg.l1_input = 0.0;
    control_cfg.l1_other = 0.0;
    outcome.spearman_control =
        run_and_profile(control_cfg, "edge_decay_control.csv");
    outcome.control_ran = true;
  }

  std::ostringstream summary;
  summary << "spearman_l1 = " << fmt(outcome.spearman_l1) << '\n';
  if (outcome.control_ran) {
    summary << "spearman_control = " << fmt(outcome.spearman_control) << '\n';
  }
  write_text_file(fs::path(cfg.out_dir) / "edge_decay_summary.txt",
                  summary.str());
  return outcome;
}

void cmd_prune(const ExperimentConfig& cfg, const std::string& model_path,
               std::size_t keep_blocks) {
  validate_config(cfg);
  set_num_threads(cfg.threads);
  fs::create_directories(cfg.out_dir);

  const Network net = load_model(model_path, cfg.num_blocks);
  for (std::size_t l = 0; l + 1 < net.depth(); ++l) {
    if (net.kinds[l] != ConnectivityKind::Sc) {
      throw ConfigError("prune: model transition " + std::to_string(l) +
                        " is not spatially coupled");
    }
  }
  const std::size_t blocks = net.sc_blocks.front();
  if (keep_blocks == 0 || keep_blocks > blocks) {
    throw ConfigError("prune: keep_blocks must be in [1, " +
                      std::to_string(blocks) + "]");
  }

  const PreparedData data = prepare_data(cfg);
  const double fc_weights =
      static_cast<double>(param_count(net).fc_equivalent_weights);

  std::ostringstream csv;
  csv << "keep_blocks,params,reduction_vs_fc,accuracy\n";
  Network last;
  for (std::size_t k = blocks; k >= keep_blocks; --k) {
    Network pruned = prune_blocks(net, k);
    const ParamCount pc = param_count(pruned);
    const double acc = evaluate(pruned, data.test);
    csv << k << ',' << pc.weights << ','
        << fmt(1.0 - static_cast<double>(pc.weights) / fc_weights) << ','
        << fmt(acc) << '\n';
    last = std::move(pruned);
  }
  write_text_file(fs::path(cfg.out_dir) / "prune_report.csv", csv.str());
  save_model(last, (fs::path(cfg.out_dir) / "pruned_model.scnn").string());
}

void cmd_mask_stats(const ExperimentConfig& cfg) {
  validate_config(cfg);
  fs::create_directories(cfg.out_dir);

  const std::size_t input_dim =
      cfg.dataset == DatasetKind::Blobs ? cfg.blob_dim : 784;
  const std::size_t num_classes =
      cfg.dataset == DatasetKind::Blobs ? cfg.blob_classes : 10;
  const NetworkSpec spec = build_network_spec(cfg, input_dim, num_classes);

  std::ostringstream stats_csv;
  stats_csv << "transition,n_left,n_right,edges,density\n";
  for (std::size_t l = 0; l < spec.connectivity.size(); ++l) {
    const std::size_t n_src = spec.layer_dims[l];
    const std::size_t n_dst = spec.layer_dims[l + 1];
    const BipartiteMask mask = build_connectivity_mask(
        spec.connectivity[l], n_src, n_dst, spec.init_seed, l);
    const MaskStats stats = mask_stats(mask);

    const std::string base = "mask_l" + std::to_string(l);
    {
      std::ofstream os(fs::path(cfg.out_dir) / (base + ".csv"));
      write_mask_csv(mask, os);
    }
    {
      std::ostringstream side;
      side << "transition = " << l << '\n'
           << "construction = "
           << (spec.connectivity[l].kind == ConnectivityKind::Full ? "fc"
               : spec.connectivity[l].kind == ConnectivityKind::Rsp ? "rsp"
                                                                    : "sc")
           << '\n'
           << "n_left = " << n_src << '\n'
           << "n_right = " << n_dst << '\n'
           << "seed = " << cfg.seed << '\n';
      if (spec.connectivity[l].kind == ConnectivityKind::Rsp) {
        side << "rsp_degree = " << cfg.rsp_degree << '\n';
      } else if (spec.connectivity[l].kind == ConnectivityKind::Sc) {
        side << "num_blocks = " << cfg.num_blocks << '\n'
             << "receptive_field = " << cfg.receptive_field << '\n';
        side << "block_degrees = ";
        for (std::size_t i = 0; i < cfg.block_degrees.size(); ++i) {
          if (i > 0) side << ',';
          side << cfg.block_degrees[i];
        }
        side << '\n';
      }
      write_text_file(fs::path(cfg.out_dir) / (base + ".spec.txt"), side.str());
    }
    {
      std::ostringstream hist;
      hist << "kind,degree,count\n";
      for (std::size_t d = 0; d < stats.out_degree_histogram.size(); ++d) {
        if (stats.out_degree_histogram[d] > 0) {
          hist << "out," << d << ',' << stats.out_degree_histogram[d] << '\n';
        }
      }
      for (std::size_t d = 0; d < stats.in_degree_histogram.size(); ++d) {
        if (stats.in_degree_histogram[d] > 0) {
          hist << "in," << d << ',' << stats.in_degree_histogram[d] << '\n';
        }
      }
      write_text_file(fs::path(cfg.out_dir) / (base + "_degrees.csv"),
                      hist.str());
    }
    stats_csv << l << ',' << n_src << ',' << n_dst << ',' << stats.edge_count
              << ',' << fmt(stats.density) << '\n';
  }
  write_text_file(fs::path(cfg.out_dir) / "mask_stats.csv", stats_csv.str());
}

void cmd_importance_export(const ExperimentConfig& cfg) {
  validate_config(cfg);
  set_num_threads(cfg.threads);
  fs::create_directories(cfg.out_dir);
  const PreparedData data = prepare_data(cfg);
  std::ofstream os(fs::path(cfg.out_dir) / "importance.csv");
  write_importance_csv(data.ordering, os);
}

}  // namespace scnn
