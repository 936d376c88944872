#include "texfuse/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "texfuse/util.hpp"

namespace texfuse {

EvaluationReport evaluate(const std::vector<int>& predictions, const std::vector<int>& truths, int num_classes) {
  if (predictions.empty() || predictions.size() != truths.size())
    throw std::runtime_error("evaluate: aligned non-empty sequences required");
  EvaluationReport r;
  r.confusion = ConfusionMatrix::from(predictions, truths, num_classes);
  r.accuracy = r.confusion.accuracy();
  r.per_class_recall.resize(num_classes);
  r.per_class_precision.resize(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    r.per_class_recall[c] = r.confusion.recall(c);
    const int64_t p = r.confusion.col_total(c);
    r.per_class_precision[c] = p > 0 ? static_cast<double>(r.confusion.at(c, c)) / static_cast<double>(p) : 0.0;
  }
  return r;
}

namespace {

template <typename T>
std::vector<T> take(const std::vector<T>& v, const std::vector<size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (size_t i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace

ExperimentResult run_experiment(const LoadedDataset& data, const std::array<double, 4>& fractions, uint64_t seed,
                                const PipelineConfig& cfg, const FeatureMatrix* features) {
  ExperimentResult result;
  result.seed = seed;

  SplitSpec spec;
  spec.fractions = fractions;
  spec.seed = seed;
  const SplitAssignment assignment = split_labels(data.labels, data.num_classes, spec);

  const auto train_idx = assignment.indices_of(Split::train);
  const auto val_idx = assignment.indices_of(Split::validation);
  const auto map_idx = assignment.indices_of(Split::fusion_map);
  const auto test_idx = assignment.indices_of(Split::test);

  FeatureMatrix all_features;
  if (!features) {
    all_features.reserve(data.images.size());
    for (const auto& img : data.images) all_features.push_back(extract_features(img, cfg.mean_only_features));
    features = &all_features;
  }

  // SVM on the training split
  SvmHyperparams hp = cfg.svm;
  hp.seed = mix_seed(seed, 0x5174);
  SvmModel svm = train_svm(take(*features, train_idx), take(data.labels, train_idx), data.num_classes, hp);

  // CNN on the training split, snapshot picked on the validation split
  TrainConfig tc = cfg.cnn;
  tc.seed = mix_seed(seed, 0xc44);
  CnnModel cnn = build_cnn(cfg.stack, cfg.input_size, data.num_classes, mix_seed(seed, 0x1417));
  result.cnn_history = train_cnn(cnn, take(data.images, train_idx), take(data.labels, train_idx),
                                 take(data.images, val_idx), take(data.labels, val_idx), tc);

  auto predict_both = [&](const std::vector<size_t>& idx, std::vector<int>& cnn_out, std::vector<int>& svm_out) {
    cnn_out.clear();
    svm_out.clear();
    for (size_t i : idx) {
      cnn_out.push_back(cnn.predict(data.images[i]).class_index);
      svm_out.push_back(svm_predict(svm, (*features)[i]).class_index);
    }
  };

  // fusion map from the fusion-map split only
  std::vector<int> map_cnn, map_svm;
  predict_both(map_idx, map_cnn, map_svm);
  result.fusion = build_map(map_cnn, map_svm, take(data.labels, map_idx), data.num_classes, cfg.fusion_repetitions,
                            mix_seed(seed, 0xf00d));

  // untouched test split scores all three
  std::vector<int> test_cnn, test_svm;
  predict_both(test_idx, test_cnn, test_svm);
  const std::vector<int> test_truths = take(data.labels, test_idx);

  std::vector<int> fused;
  fused.reserve(test_cnn.size());
  for (size_t i = 0; i < test_cnn.size(); ++i) {
    const FusedDecision d = fused_predict(result.fusion, test_cnn[i], test_svm[i]);
    fused.push_back(d.class_index);
    ++result.provenance_counts[static_cast<size_t>(d.provenance)];
  }

  result.cnn_report = evaluate(test_cnn, test_truths, data.num_classes);
  result.svm_report = evaluate(test_svm, test_truths, data.num_classes);
  result.fused_report = evaluate(fused, test_truths, data.num_classes);
  result.cnn_accuracy = result.cnn_report.accuracy;
  result.svm_accuracy = result.svm_report.accuracy;
  result.fused_accuracy = result.fused_report.accuracy;
  return result;
}

RepeatResult repeat_shuffled(const LoadedDataset& data, const std::array<double, 4>& fractions,
                             const std::vector<uint64_t>& seeds, const PipelineConfig& cfg,
                             const FeatureMatrix* features) {
  if (seeds.empty()) throw std::runtime_error("repeat_shuffled: need at least one seed");
  RepeatResult rr;
  for (uint64_t s : seeds) {
    rr.runs.push_back(run_experiment(data, fractions, s, cfg, features));
    rr.mean_cnn += rr.runs.back().cnn_accuracy;
    rr.mean_svm += rr.runs.back().svm_accuracy;
    rr.mean_fused += rr.runs.back().fused_accuracy;
  }
  rr.mean_cnn /= static_cast<double>(rr.runs.size());
  rr.mean_svm /= static_cast<double>(rr.runs.size());
  rr.mean_fused /= static_cast<double>(rr.runs.size());
  return rr;
}

std::vector<double> default_sweep_grid() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}; }

namespace {

SweepResult run_sweep(const LoadedDataset& data, const std::vector<double>& grid,
                      const std::vector<uint64_t>& seeds, const PipelineConfig& cfg, bool train_param) {
  SweepResult sr;
  sr.param = train_param ? "train-fraction" : "map-fraction";

  // features depend only on the images; compute once for all settings
  FeatureMatrix features;
  features.reserve(data.images.size());
  for (const auto& img : data.images) features.push_back(extract_features(img, cfg.mean_only_features));

  for (double f : grid) {
    if (f <= 0.0 || f >= 1.0) throw std::runtime_error("sweep: fractions must lie in (0, 1)");
    const double rest = 1.0 - f;
    // train sweep: remainder 1-1-2 across validation/map/test
    // map sweep:   remainder 2-1-1 across train/validation/test
    const std::array<double, 4> fractions =
        train_param ? std::array<double, 4>{f, rest * 0.25, rest * 0.25, rest * 0.5}
                    : std::array<double, 4>{rest * 0.5, rest * 0.25, f, rest * 0.25};
    SweepSetting setting;
    setting.fraction = f;
    setting.result = repeat_shuffled(data, fractions, seeds, cfg, &features);
    sr.settings.push_back(std::move(setting));
  }
  std::sort(sr.settings.begin(), sr.settings.end(),
            [](const SweepSetting& a, const SweepSetting& b) { return a.fraction < b.fraction; });
  return sr;
}

}  // namespace

SweepResult sweep_train_fraction(const LoadedDataset& data, const std::vector<double>& grid,
                                 const std::vector<uint64_t>& seeds, const PipelineConfig& cfg) {
  return run_sweep(data, grid, seeds, cfg, true);
}

SweepResult sweep_map_fraction(const LoadedDataset& data, const std::vector<double>& grid,
                               const std::vector<uint64_t>& seeds, const PipelineConfig& cfg) {
  return run_sweep(data, grid, seeds, cfg, false);
}

// ---- rendering -------------------------------------------------------------

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", fraction * 100.0);
  return buf;
}

namespace {

nlohmann::json report_json(const EvaluationReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (int t = 0; t < r.confusion.k; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (int p = 0; p < r.confusion.k; ++p) row.push_back(r.confusion.at(t, p));
    rows.push_back(row);
  }
  return {{"accuracy", r.accuracy},
          {"per_class_recall", r.per_class_recall},
          {"per_class_precision", r.per_class_precision},
          {"confusion", rows}};
}

}  // namespace

std::string report_to_json(const ExperimentResult& r, const std::vector<std::string>& class_names,
                           const std::string& config_hash) {
  nlohmann::json j;
  j["seed"] = r.seed;
  j["classes"] = class_names;
  j["cnn"] = report_json(r.cnn_report);
  j["svm"] = report_json(r.svm_report);
  j["fused"] = report_json(r.fused_report);
  j["provenance_counts"] = {{"CNN", r.provenance_counts[0]},
                            {"SVM", r.provenance_counts[1]},
                            {"conflict-CNN", r.provenance_counts[2]},
                            {"conflict-SVM", r.provenance_counts[3]}};
  auto& owners = j["binary_map"] = nlohmann::json::array();
  for (Expert e : r.fusion.map.owner) owners.push_back(expert_name(e));
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  return j.dump(2) + "\n";
}

std::string report_to_markdown(const ExperimentResult& r, const std::vector<std::string>& class_names,
                               const std::string& config_hash) {
  std::ostringstream out;
  if (!config_hash.empty()) out << "<!-- config_hash: " << config_hash << " -->\n";
  out << "| Classifier | Accuracy |\n|---|---|\n";
  out << "| CNN | " << format_percent(r.cnn_accuracy) << " |\n";
  out << "| SVM | " << format_percent(r.svm_accuracy) << " |\n";
  out << "| Fusion | " << format_percent(r.fused_accuracy) << " |\n\n";
  out << "| Class | Owner | Recall (fused) | Precision (fused) |\n|---|---|---|---|\n";
  for (size_t c = 0; c < class_names.size(); ++c)
    out << "| " << class_names[c] << " | " << expert_name(r.fusion.map.owner[c]) << " | "
        << format_percent(r.fused_report.per_class_recall[c]) << " | "
        << format_percent(r.fused_report.per_class_precision[c]) << " |\n";
  out << "\nDecision provenance: CNN " << r.provenance_counts[0] << ", SVM " << r.provenance_counts[1]
      << ", conflict-CNN " << r.provenance_counts[2] << ", conflict-SVM " << r.provenance_counts[3] << "\n";
  return out.str();
}

std::string repeat_to_csv(const RepeatResult& r, const std::string& config_hash) {
  std::ostringstream out;
  if (!config_hash.empty()) out << "# config_hash: " << config_hash << "\n";
  out << "run,seed,cnn_accuracy,svm_accuracy,fused_accuracy\n";
  char buf[128];
  for (size_t i = 0; i < r.runs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%llu,%.4f,%.4f,%.4f\n", i + 1,
                  static_cast<unsigned long long>(r.runs[i].seed), r.runs[i].cnn_accuracy, r.runs[i].svm_accuracy,
                  r.runs[i].fused_accuracy);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "mean,,%.4f,%.4f,%.4f\n", r.mean_cnn, r.mean_svm, r.mean_fused);
  out << buf;
  return out.str();
}

std::string repeat_to_markdown(const RepeatResult& r, const std::string& config_hash) {
  std::ostringstream out;
  if (!config_hash.empty()) out << "<!-- config_hash: " << config_hash << " -->\n";
  out << "| |";
  for (size_t i = 0; i < r.runs.size(); ++i) out << " Exp. " << i + 1 << " |";
  out << " Average |\n|---|";
  for (size_t i = 0; i <= r.runs.size(); ++i) out << "---|";
  out << "\n";
  auto row = [&](const char* name, auto get, double mean) {
    out << "| " << name << " |";
    for (const auto& run : r.runs) out << " " << format_percent(get(run)) << " |";
    out << " " << format_percent(mean) << " |\n";
  };
  row("CNN", [](const ExperimentResult& e) { return e.cnn_accuracy; }, r.mean_cnn);
  row("SVM", [](const ExperimentResult& e) { return e.svm_accuracy; }, r.mean_svm);
  row("Fusion", [](const ExperimentResult& e) { return e.fused_accuracy; }, r.mean_fused);
  return out.str();
}

std::string sweep_to_csv(const SweepResult& s, const std::string& config_hash) {
  std::ostringstream out;
  if (!config_hash.empty()) out << "# config_hash: " << config_hash << "\n";
  out << "param,fraction,run,seed,cnn_accuracy,svm_accuracy,fused_accuracy\n";
  char buf[160];
  for (const auto& setting : s.settings) {
    for (size_t i = 0; i < setting.result.runs.size(); ++i) {
      const auto& run = setting.result.runs[i];
      std::snprintf(buf, sizeof buf, "%s,%.2f,%zu,%llu,%.4f,%.4f,%.4f\n", s.param.c_str(), setting.fraction, i + 1,
                    static_cast<unsigned long long>(run.seed), run.cnn_accuracy, run.svm_accuracy,
                    run.fused_accuracy);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%s,%.2f,mean,,%.4f,%.4f,%.4f\n", s.param.c_str(), setting.fraction,
                  setting.result.mean_cnn, setting.result.mean_svm, setting.result.mean_fused);
    out << buf;
  }
  return out.str();
}

std::string sweep_to_markdown(const SweepResult& s, const std::string& config_hash) {
  std::ostringstream out;
  if (!config_hash.empty()) out << "<!-- config_hash: " << config_hash << " -->\n";
  const char* label = s.param == "train-fraction" ? "Training Percentage" : "Mapping Percentage";
  out << "| " << label << " | CNN | SVM | Fusion |\n|---|---|---|---|\n";
  char frac[16];
  for (const auto& setting : s.settings) {
    std::snprintf(frac, sizeof frac, "%.0f%%", setting.fraction * 100.0);
    out << "| " << frac << " | " << format_percent(setting.result.mean_cnn) << " | "
        << format_percent(setting.result.mean_svm) << " | " << format_percent(setting.result.mean_fused) << " |\n";
  }
  return out.str();
}

}  // namespace texfuse
