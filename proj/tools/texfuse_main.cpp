// texfuse: texture classification experiments with a GLCM+SVM / CNN pair and
// a confusion-matrix fusion layer. Stages communicate through files in the
// output directory so every step is resumable and independently testable.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "texfuse/cnn.hpp"
#include "texfuse/dataset.hpp"
#include "texfuse/eval.hpp"
#include "texfuse/fusion.hpp"
#include "texfuse/glcm.hpp"
#include "texfuse/svm.hpp"
#include "texfuse/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace texfuse;

namespace {

// Effective configuration: defaults, then the --config file, then explicit
// flags. The FNV-1a hash of its canonical dump (plus the command name) is
// embedded in every artifact the command writes.
struct RunConfig {
  json j = json::object();

  template <typename T>
  T get(const std::string& section, const std::string& key, T fallback) const {
    if (j.contains(section) && j[section].contains(key)) return j[section][key].get<T>();
    return fallback;
  }
  template <typename T>
  void set(const std::string& section, const std::string& key, T value) {
    j[section][key] = value;
  }

  std::string hash(const std::string& command) const { return hex64(fnv1a64(command + ":" + j.dump())); }
};

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  if (!path.empty()) {
    if (!fs::exists(path)) throw std::runtime_error("missing-dependency: config file not found at " + path);
    cfg.j = json::parse(read_file(path));
  }
  return cfg;
}

int resolve_threads(const RunConfig& cfg, int flag_threads, bool flag_set) {
  if (flag_set) return flag_threads;
  if (const char* env = std::getenv("TEXFUSE_THREADS")) return std::max(1, std::atoi(env));
  return cfg.get<int>("run", "threads", 1);
}

void require_artifact(const std::string& kind, const fs::path& path, const std::string& producer) {
  if (!fs::exists(path))
    throw std::runtime_error("missing-dependency: " + kind + " not found at " + path.string() + " (run '" +
                             producer + "' first)");
}

SvmHyperparams svm_params(const RunConfig& cfg) {
  SvmHyperparams hp;
  hp.C = cfg.get<double>("svm", "C", hp.C);
  hp.gamma = cfg.get<double>("svm", "gamma", hp.gamma);
  hp.tolerance = cfg.get<double>("svm", "tolerance", hp.tolerance);
  hp.max_passes = cfg.get<int>("svm", "max_passes", hp.max_passes);
  hp.seed = cfg.get<uint64_t>("svm", "seed", hp.seed);
  return hp;
}

TrainConfig cnn_params(const RunConfig& cfg) {
  TrainConfig tc;
  tc.epochs = cfg.get<int>("cnn", "epochs", tc.epochs);
  tc.batch_size = cfg.get<int>("cnn", "batch_size", tc.batch_size);
  tc.learning_rate = cfg.get<double>("cnn", "learning_rate", tc.learning_rate);
  tc.momentum = cfg.get<double>("cnn", "momentum", tc.momentum);
  tc.seed = cfg.get<uint64_t>("cnn", "seed", tc.seed);
  return tc;
}

std::vector<LayerSpec> stack_params(const RunConfig& cfg) {
  if (cfg.j.contains("cnn") && cfg.j["cnn"].contains("stack"))
    return parse_layer_stack(cfg.j["cnn"]["stack"].dump());
  return default_layer_stack();
}

std::array<double, 4> parse_fractions(const std::string& text) {
  std::array<double, 4> f{};
  size_t pos = 0;
  for (int k = 0; k < 4; ++k) {
    const size_t comma = text.find(',', pos);
    const std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    f[k] = std::stod(tok);
    if (k < 3) {
      if (comma == std::string::npos) throw std::runtime_error("fractions need 4 comma-separated values");
      pos = comma + 1;
    }
  }
  return f;
}

std::vector<double> parse_grid(const std::string& text) {
  // "10:70:10" -> percent grid
  double lo, hi, step;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0)
    throw std::runtime_error("grid must be lo:hi:step in percent, e.g. 10:70:10");
  std::vector<double> grid;
  for (double v = lo; v <= hi + 1e-9; v += step) grid.push_back(v / 100.0);
  return grid;
}

struct SplitArtifacts {
  DatasetManifest manifest;
  SplitSpec spec;
  SplitAssignment assignment;
  fs::path dir;
};

SplitArtifacts load_splits(const fs::path& path) {
  require_artifact("split manifest", path, "split");
  SplitArtifacts a;
  a.manifest = manifest_from_json(read_file(path), &a.spec, &a.assignment);
  a.dir = path.parent_path();
  return a;
}

std::vector<uint64_t> run_seeds(uint64_t base, int n) {
  std::vector<uint64_t> seeds(n);
  for (int i = 0; i < n; ++i) seeds[i] = base + static_cast<uint64_t>(i);
  return seeds;
}

// ---- commands --------------------------------------------------------------

int cmd_synth(const RunConfig& cfg, const fs::path& out_dir) {
  const int classes = cfg.get<int>("synthetic", "classes", 8);
  const int per_class = cfg.get<int>("synthetic", "per_class", 64);
  const int size = cfg.get<int>("synthetic", "size", 64);
  const uint64_t seed = cfg.get<uint64_t>("synthetic", "seed", 7);

  DatasetManifest m = generate_synthetic(classes, per_class, size, seed, out_dir / "images");
  m.image_root = "images";
  atomic_write_file(out_dir / "manifest.json", manifest_to_json(m, nullptr, nullptr, cfg.hash("synth")));
  std::cout << "wrote " << m.samples.size() << " images and " << (out_dir / "manifest.json").string() << "\n";
  return 0;
}

int cmd_ingest(const RunConfig& cfg, const std::string& root, const fs::path& out_dir) {
  DatasetManifest m = ingest_directory(root);
  m.image_root = fs::absolute(root).generic_string();
  atomic_write_file(out_dir / "manifest.json", manifest_to_json(m, nullptr, nullptr, cfg.hash("ingest")));
  std::cout << "ingested " << m.samples.size() << " samples in " << m.classes.size() << " classes\n";
  return 0;
}

int cmd_split(const RunConfig& cfg, const fs::path& manifest_path, const fs::path& out_path) {
  require_artifact("manifest", manifest_path, "synth or ingest");
  DatasetManifest m = manifest_from_json(read_file(manifest_path), nullptr, nullptr);

  SplitSpec spec;
  auto fr = cfg.get<std::vector<double>>("split", "fractions", {0.6, 0.1, 0.2, 0.1});
  if (fr.size() != 4) throw std::runtime_error("split.fractions needs 4 entries");
  std::copy(fr.begin(), fr.end(), spec.fractions.begin());
  spec.seed = cfg.get<uint64_t>("split", "seed", 1);

  const SplitAssignment assignment = split(m, spec);
  atomic_write_file(out_path, manifest_to_json(m, &spec, &assignment, cfg.hash("split")));
  std::cout << "wrote " << out_path.string() << "\n";
  return 0;
}

int cmd_features(const RunConfig& cfg, const fs::path& splits_path, const fs::path& out_path) {
  const SplitArtifacts a = load_splits(splits_path);
  const int input_size = cfg.get<int>("dataset", "input_size", 64);
  const bool mean_only = cfg.get<bool>("features", "mean_only", false);

  const LoadedDataset data = load_dataset(a.manifest, a.dir, input_size);
  FeatureCache cache;
  cache.dim = mean_only ? kFeatureDimMeanOnly : kFeatureDim;
  cache.labels = data.labels;
  for (const auto& img : data.images) cache.features.push_back(extract_features(img, mean_only));
  save_feature_cache(cache, out_path);

  json meta{{"dim", cache.dim}, {"mean_only", mean_only}, {"config_hash", cfg.hash("features")}};
  atomic_write_file(out_path.string() + ".meta.json", meta.dump(2) + "\n");
  std::cout << "wrote " << cache.labels.size() << " feature vectors (dim " << cache.dim << ")\n";
  return 0;
}

int cmd_train_svm(const RunConfig& cfg, const fs::path& splits_path, const fs::path& features_path,
                  const fs::path& out_path) {
  const SplitArtifacts a = load_splits(splits_path);
  require_artifact("feature cache", features_path, "features");
  const FeatureCache cache = load_feature_cache(features_path);
  if (cache.labels.size() != a.manifest.samples.size())
    throw std::runtime_error("feature cache does not match the split manifest");

  FeatureMatrix train;
  std::vector<int> labels;
  for (size_t i : a.assignment.indices_of(Split::train)) {
    train.push_back(cache.features[i]);
    labels.push_back(cache.labels[i]);
  }
  SvmHyperparams hp = svm_params(cfg);
  const SvmModel model = train_svm(train, labels, static_cast<int>(a.manifest.classes.size()), hp);
  atomic_write_file(out_path, svm_to_json(model, cfg.hash("train-svm")));

  int correct = 0;
  for (size_t k = 0; k < train.size(); ++k)
    if (svm_predict(model, train[k]).class_index == labels[k]) ++correct;
  std::cout << "trained " << model.machines.size() << " binary machines; train accuracy "
            << format_percent(static_cast<double>(correct) / train.size()) << "\n";
  return 0;
}

int cmd_train_cnn(const RunConfig& cfg, const fs::path& splits_path, const fs::path& out_path, int threads) {
  const SplitArtifacts a = load_splits(splits_path);
  const int input_size = cfg.get<int>("dataset", "input_size", 64);
  const LoadedDataset data = load_dataset(a.manifest, a.dir, input_size);

  std::vector<GrayImage> train_x, val_x;
  std::vector<int> train_y, val_y;
  for (size_t i : a.assignment.indices_of(Split::train)) {
    train_x.push_back(data.images[i]);
    train_y.push_back(data.labels[i]);
  }
  for (size_t i : a.assignment.indices_of(Split::validation)) {
    val_x.push_back(data.images[i]);
    val_y.push_back(data.labels[i]);
  }

  TrainConfig tc = cnn_params(cfg);
  tc.threads = threads;
  CnnModel model = build_cnn(stack_params(cfg), input_size, data.num_classes, tc.seed);
  const TrainHistory history = train_cnn(model, train_x, train_y, val_x, val_y, tc);
  save_cnn(model, out_path);
  atomic_write_file(out_path.string() + ".history.json", history_to_json(history, tc, cfg.hash("train-cnn")));
  std::cout << "trained " << tc.epochs << " epochs; best validation accuracy "
            << format_percent(history.best_val_accuracy) << " at epoch " << history.best_epoch + 1 << "\n";
  return 0;
}

struct LoadedModels {
  SvmModel svm;
  CnnModel cnn;
};

LoadedModels load_models(const fs::path& svm_path, const fs::path& cnn_path) {
  require_artifact("svm model", svm_path, "train-svm");
  require_artifact("cnn model", cnn_path, "train-cnn");
  return {svm_from_json(read_file(svm_path)), load_cnn(cnn_path)};
}

void predict_split(const SplitArtifacts& a, const FeatureCache& cache, LoadedModels& models, Split which,
                   int input_size, std::vector<int>& cnn_out, std::vector<int>& svm_out,
                   std::vector<int>& truths) {
  const fs::path base = a.dir / a.manifest.image_root;
  for (size_t i : a.assignment.indices_of(which)) {
    const GrayImage img = resize_to(load_image(base / a.manifest.samples[i].path), input_size);
    cnn_out.push_back(models.cnn.predict(img).class_index);
    svm_out.push_back(svm_predict(models.svm, cache.features[i]).class_index);
    truths.push_back(a.manifest.samples[i].class_index);
  }
}

int cmd_fuse(const RunConfig& cfg, const fs::path& splits_path, const fs::path& features_path,
             const fs::path& svm_path, const fs::path& cnn_path, const fs::path& out_path) {
  const SplitArtifacts a = load_splits(splits_path);
  require_artifact("feature cache", features_path, "features");
  const FeatureCache cache = load_feature_cache(features_path);
  LoadedModels models = load_models(svm_path, cnn_path);
  const int input_size = cfg.get<int>("dataset", "input_size", 64);
  const int reps = cfg.get<int>("fusion", "repetitions", 1);

  std::vector<int> cnn_preds, svm_preds, truths;
  predict_split(a, cache, models, Split::fusion_map, input_size, cnn_preds, svm_preds, truths);
  const FusionModel fm = build_map(cnn_preds, svm_preds, truths, static_cast<int>(a.manifest.classes.size()), reps,
                                   a.spec.seed);

  const std::string split_id = "seed=" + std::to_string(a.spec.seed);
  atomic_write_file(out_path, fusion_to_json(fm, split_id, cfg.hash("fuse")));
  int cnn_owned = 0;
  for (Expert e : fm.map.owner) cnn_owned += e == Expert::cnn ? 1 : 0;
  std::cout << "binary map: " << cnn_owned << " classes -> CNN, " << (fm.map.owner.size() - cnn_owned)
            << " -> SVM\n";
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const fs::path& splits_path, const fs::path& features_path,
                 const fs::path& svm_path, const fs::path& cnn_path, const fs::path& fusion_path,
                 const fs::path& out_path, const std::string& md_path, const std::string& csv_path) {
  const SplitArtifacts a = load_splits(splits_path);
  require_artifact("feature cache", features_path, "features");
  require_artifact("fusion model", fusion_path, "fuse");
  const FeatureCache cache = load_feature_cache(features_path);
  LoadedModels models = load_models(svm_path, cnn_path);
  const FusionModel fm = fusion_from_json(read_file(fusion_path));
  const int input_size = cfg.get<int>("dataset", "input_size", 64);
  const int k = static_cast<int>(a.manifest.classes.size());

  std::vector<int> cnn_preds, svm_preds, truths;
  predict_split(a, cache, models, Split::test, input_size, cnn_preds, svm_preds, truths);

  ExperimentResult r;
  r.seed = a.spec.seed;
  r.fusion = fm;
  std::vector<int> fused;
  for (size_t i = 0; i < truths.size(); ++i) {
    const FusedDecision d = fused_predict(fm, cnn_preds[i], svm_preds[i]);
    fused.push_back(d.class_index);
    ++r.provenance_counts[static_cast<size_t>(d.provenance)];
  }
  r.cnn_report = evaluate(cnn_preds, truths, k);
  r.svm_report = evaluate(svm_preds, truths, k);
  r.fused_report = evaluate(fused, truths, k);
  r.cnn_accuracy = r.cnn_report.accuracy;
  r.svm_accuracy = r.svm_report.accuracy;
  r.fused_accuracy = r.fused_report.accuracy;

  const std::string hash = cfg.hash("evaluate");
  atomic_write_file(out_path, report_to_json(r, a.manifest.classes, hash));
  if (!md_path.empty()) atomic_write_file(md_path, report_to_markdown(r, a.manifest.classes, hash));
  if (!csv_path.empty()) {
    std::string csv = "# config_hash: " + hash + "\nclassifier,accuracy\n";
    csv += "CNN," + std::to_string(r.cnn_accuracy) + "\nSVM," + std::to_string(r.svm_accuracy) + "\nFusion," +
           std::to_string(r.fused_accuracy) + "\n";
    atomic_write_file(csv_path, csv);
  }
  std::cout << "test accuracy: CNN " << format_percent(r.cnn_accuracy) << ", SVM " << format_percent(r.svm_accuracy)
            << ", Fusion " << format_percent(r.fused_accuracy) << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const fs::path& manifest_path, const std::string& param,
              const std::string& grid_text, const fs::path& out_csv, const std::string& md_path, int threads) {
  require_artifact("manifest", manifest_path, "synth or ingest");
  const DatasetManifest m = manifest_from_json(read_file(manifest_path), nullptr, nullptr);
  const int input_size = cfg.get<int>("dataset", "input_size", 64);
  const LoadedDataset data = load_dataset(m, manifest_path.parent_path(), input_size);

  PipelineConfig pc;
  pc.svm = svm_params(cfg);
  pc.cnn = cnn_params(cfg);
  pc.cnn.threads = threads;
  pc.stack = stack_params(cfg);
  pc.input_size = input_size;
  pc.fusion_repetitions = cfg.get<int>("fusion", "repetitions", 1);
  pc.mean_only_features = cfg.get<bool>("features", "mean_only", false);

  const int runs = cfg.get<int>("eval", "runs", 3);
  const uint64_t base_seed = cfg.get<uint64_t>("eval", "seed", 1);
  const std::vector<double> grid = grid_text.empty() ? default_sweep_grid() : parse_grid(grid_text);

  SweepResult sr;
  if (param == "train")
    sr = sweep_train_fraction(data, grid, run_seeds(base_seed, runs), pc);
  else if (param == "map")
    sr = sweep_map_fraction(data, grid, run_seeds(base_seed, runs), pc);
  else
    throw std::runtime_error("sweep --param must be 'train' or 'map'");

  const std::string hash = cfg.hash("sweep");
  atomic_write_file(out_csv, sweep_to_csv(sr, hash));
  if (!md_path.empty()) atomic_write_file(md_path, sweep_to_markdown(sr, hash));
  std::cout << sweep_to_markdown(sr, "");
  return 0;
}

int cmd_report(const fs::path& report_path, const std::string& md_path, const std::string& csv_path) {
  require_artifact("report", report_path, "evaluate");
  const json j = json::parse(read_file(report_path));
  const std::string hash = j.value("config_hash", "");

  ExperimentResult r;
  r.cnn_accuracy = j.at("cnn").at("accuracy").get<double>();
  r.svm_accuracy = j.at("svm").at("accuracy").get<double>();
  r.fused_accuracy = j.at("fused").at("accuracy").get<double>();
  const auto classes = j.at("classes").get<std::vector<std::string>>();
  r.fused_report.per_class_recall = j.at("fused").at("per_class_recall").get<std::vector<double>>();
  r.fused_report.per_class_precision = j.at("fused").at("per_class_precision").get<std::vector<double>>();
  for (const auto& e : j.at("binary_map"))
    r.fusion.map.owner.push_back(e.get<std::string>() == "CNN" ? Expert::cnn : Expert::svm);
  const auto& pc = j.at("provenance_counts");
  r.provenance_counts = {pc.at("CNN").get<int64_t>(), pc.at("SVM").get<int64_t>(),
                         pc.at("conflict-CNN").get<int64_t>(), pc.at("conflict-SVM").get<int64_t>()};

  if (!md_path.empty()) atomic_write_file(md_path, report_to_markdown(r, classes, hash));
  if (!csv_path.empty()) {
    std::string csv = "# config_hash: " + hash + "\nclassifier,accuracy\n";
    csv += "CNN," + std::to_string(r.cnn_accuracy) + "\nSVM," + std::to_string(r.svm_accuracy) + "\nFusion," +
           std::to_string(r.fused_accuracy) + "\n";
    atomic_write_file(csv_path, csv);
  }
  if (md_path.empty() && csv_path.empty()) std::cout << report_to_markdown(r, classes, hash);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"texture classification with GLCM+SVM, a small CNN, and confusion-matrix fusion"};
  app.require_subcommand(1);

  std::string config_path;
  int threads = 1;
  app.add_option("--config", config_path, "JSON config file; explicit flags override it");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (1 = fully deterministic)");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic texture dataset");
  std::string out_dir = "out";
  int classes = -1, per_class = -1, size = -1;
  int64_t synth_seed = -1;
  synth->add_option("--out", out_dir, "output directory");
  auto* o_classes = synth->add_option("--classes", classes);
  auto* o_pc = synth->add_option("--per-class", per_class);
  auto* o_size = synth->add_option("--size", size);
  auto* o_sseed = synth->add_option("--seed", synth_seed);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "scan root/<class>/*.pgm|*.png into a manifest");
  std::string ingest_root;
  ingest->add_option("--root", ingest_root)->required();
  ingest->add_option("--out", out_dir, "output directory");

  // split
  auto* split_cmd = app.add_subcommand("split", "stratified train/validation/fusion-map/test split");
  std::string manifest_path = "out/manifest.json", splits_out = "out/splits.json";
  std::string fractions_text;
  int64_t split_seed = -1;
  split_cmd->add_option("--manifest", manifest_path);
  split_cmd->add_option("--out", splits_out);
  auto* o_fr = split_cmd->add_option("--fractions", fractions_text, "train,validation,fusion-map,test");
  auto* o_seed = split_cmd->add_option("--seed", split_seed);

  // features
  auto* features_cmd = app.add_subcommand("features", "GLCM/Haralick features for every sample");
  std::string splits_path = "out/splits.json", features_out = "out/features.bin";
  bool mean_only = false;
  features_cmd->add_option("--splits", splits_path);
  features_cmd->add_option("--out", features_out);
  auto* o_mean_only = features_cmd->add_flag("--mean-only", mean_only, "keep only the 39 directional-mean features");

  // train-svm
  auto* tsvm = app.add_subcommand("train-svm", "train the one-vs-one RBF SVM on the train split");
  std::string features_path = "out/features.bin", svm_out = "out/svm.json";
  double C = -1, gamma = -1;
  tsvm->add_option("--splits", splits_path);
  tsvm->add_option("--features", features_path);
  tsvm->add_option("--out", svm_out);
  auto* o_C = tsvm->add_option("--C", C);
  auto* o_gamma = tsvm->add_option("--gamma", gamma);

  // train-cnn
  auto* tcnn = app.add_subcommand("train-cnn", "train the CNN on the train split");
  std::string cnn_out = "out/cnn.bin";
  int epochs = -1, batch_size = -1;
  double lr = -1, momentum = -1;
  int64_t cnn_seed = -1;
  tcnn->add_option("--splits", splits_path);
  tcnn->add_option("--out", cnn_out);
  auto* o_epochs = tcnn->add_option("--epochs", epochs);
  auto* o_batch = tcnn->add_option("--batch-size", batch_size);
  auto* o_lr = tcnn->add_option("--learning-rate", lr);
  auto* o_mom = tcnn->add_option("--momentum", momentum);
  auto* o_cseed = tcnn->add_option("--seed", cnn_seed);

  // fuse
  auto* fuse = app.add_subcommand("fuse", "build the per-class binary map on the fusion-map split");
  std::string svm_path = "out/svm.json", cnn_path = "out/cnn.bin", fusion_out = "out/fusion.json";
  int repetitions = -1;
  fuse->add_option("--splits", splits_path);
  fuse->add_option("--features", features_path);
  fuse->add_option("--svm", svm_path);
  fuse->add_option("--cnn", cnn_path);
  fuse->add_option("--out", fusion_out);
  auto* o_reps = fuse->add_option("--repetitions", repetitions);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score CNN, SVM and the fused system on the test split");
  std::string fusion_path = "out/fusion.json", report_out = "out/report.json", report_md, report_csv;
  eval_cmd->add_option("--splits", splits_path);
  eval_cmd->add_option("--features", features_path);
  eval_cmd->add_option("--svm", svm_path);
  eval_cmd->add_option("--cnn", cnn_path);
  eval_cmd->add_option("--fusion", fusion_path);
  eval_cmd->add_option("--out", report_out);
  eval_cmd->add_option("--md", report_md);
  eval_cmd->add_option("--csv", report_csv);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "split-fraction sweeps over full pipeline runs");
  std::string sweep_param = "train", grid_text, sweep_csv = "out/sweep.csv", sweep_md;
  int runs = -1;
  int64_t eval_seed = -1;
  sweep->add_option("--manifest", manifest_path);
  sweep->add_option("--param", sweep_param, "train or map");
  sweep->add_option("--grid", grid_text, "lo:hi:step in percent (default 10:70:10)");
  sweep->add_option("--out", sweep_csv);
  sweep->add_option("--md", sweep_md);
  auto* o_runs = sweep->add_option("--runs", runs);
  auto* o_eseed = sweep->add_option("--seed", eval_seed);
  auto* o_sw_epochs = sweep->add_option("--epochs", epochs, "CNN epochs per sweep run");

  // report
  auto* report = app.add_subcommand("report", "re-render an evaluation report");
  std::string report_in = "out/report.json";
  report->add_option("--report", report_in);
  report->add_option("--md", report_md);
  report->add_option("--csv", report_csv);

  try {
    app.parse(argc, argv);

    RunConfig cfg = load_config(config_path);
    if (*o_classes) cfg.set("synthetic", "classes", classes);
    if (*o_pc) cfg.set("synthetic", "per_class", per_class);
    if (*o_size) cfg.set("synthetic", "size", size);
    if (*o_sseed) cfg.set("synthetic", "seed", static_cast<uint64_t>(synth_seed));
    if (*o_fr) cfg.set("split", "fractions", parse_fractions(fractions_text));
    if (*o_seed) cfg.set("split", "seed", static_cast<uint64_t>(split_seed));
    if (*o_mean_only) cfg.set("features", "mean_only", true);
    if (*o_C) cfg.set("svm", "C", C);
    if (*o_gamma) cfg.set("svm", "gamma", gamma);
    if (*o_epochs || *o_sw_epochs) cfg.set("cnn", "epochs", epochs);
    if (*o_batch) cfg.set("cnn", "batch_size", batch_size);
    if (*o_lr) cfg.set("cnn", "learning_rate", lr);
    if (*o_mom) cfg.set("cnn", "momentum", momentum);
    if (*o_cseed) cfg.set("cnn", "seed", static_cast<uint64_t>(cnn_seed));
    if (*o_reps) cfg.set("fusion", "repetitions", repetitions);
    if (*o_runs) cfg.set("eval", "runs", runs);
    if (*o_eseed) cfg.set("eval", "seed", static_cast<uint64_t>(eval_seed));
    const int eff_threads = resolve_threads(cfg, threads, static_cast<bool>(*threads_opt));
    cfg.set("run", "threads", eff_threads);

    if (*synth) return cmd_synth(cfg, out_dir);
    if (*ingest) return cmd_ingest(cfg, ingest_root, out_dir);
    if (*split_cmd) return cmd_split(cfg, manifest_path, splits_out);
    if (*features_cmd) return cmd_features(cfg, splits_path, features_out);
    if (*tsvm) return cmd_train_svm(cfg, splits_path, features_path, svm_out);
    if (*tcnn) return cmd_train_cnn(cfg, splits_path, cnn_out, eff_threads);
    if (*fuse) return cmd_fuse(cfg, splits_path, features_path, svm_path, cnn_path, fusion_out);
    if (*eval_cmd)
      return cmd_evaluate(cfg, splits_path, features_path, svm_path, cnn_path, fusion_path, report_out, report_md,
                          report_csv);
    if (*sweep) return cmd_sweep(cfg, manifest_path, sweep_param, grid_text, sweep_csv, sweep_md, eff_threads);
    if (*report) return cmd_report(report_in, report_md, report_csv);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
