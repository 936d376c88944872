#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "texfuse/cnn.hpp"
#include "texfuse/dataset.hpp"
#include "texfuse/fusion.hpp"
#include "texfuse/glcm.hpp"
#include "texfuse/svm.hpp"

namespace texfuse {

struct EvaluationReport {
  double accuracy = 0.0;  // trace(confusion) / total
  ConfusionMatrix confusion;
  std::vector<double> per_class_recall;
  std::vector<double> per_class_precision;
};

EvaluationReport evaluate(const std::vector<int>& predictions, const std::vector<int>& truths, int num_classes);

/// Everything below drives the full pipeline: split -> features -> SVM ->
/// CNN -> fusion map -> test-set scoring.

struct PipelineConfig {
  SvmHyperparams svm;
  TrainConfig cnn;
  std::vector<LayerSpec> stack = default_layer_stack();
  int input_size = 64;
  int fusion_repetitions = 1;
  bool mean_only_features = false;
};

struct ExperimentResult {
  uint64_t seed = 0;
  double cnn_accuracy = 0.0;
  double svm_accuracy = 0.0;
  double fused_accuracy = 0.0;
  EvaluationReport cnn_report;
  EvaluationReport svm_report;
  EvaluationReport fused_report;
  std::array<int64_t, 4> provenance_counts{};  // CNN, SVM, conflict-CNN, conflict-SVM
  TrainHistory cnn_history;
  FusionModel fusion;
};

/// Runs one full experiment. The split seed is `seed`; CNN and SMO seeds are
/// derived from it. `features` may carry precomputed per-image vectors
/// (sweeps reuse them across settings); pass nullptr to compute here.
ExperimentResult run_experiment(const LoadedDataset& data, const std::array<double, 4>& fractions, uint64_t seed,
                                const PipelineConfig& cfg, const FeatureMatrix* features = nullptr);

struct RepeatResult {
  std::vector<ExperimentResult> runs;
  double mean_cnn = 0.0;
  double mean_svm = 0.0;
  double mean_fused = 0.0;
};

/// Reruns the experiment with n distinct seeds (full reshuffle each time).
RepeatResult repeat_shuffled(const LoadedDataset& data, const std::array<double, 4>& fractions,
                             const std::vector<uint64_t>& seeds, const PipelineConfig& cfg,
                             const FeatureMatrix* features = nullptr);

struct SweepSetting {
  double fraction = 0.0;
  RepeatResult result;
};

struct SweepResult {
  std::string param;  // "train-fraction" or "map-fraction"
  std::vector<SweepSetting> settings;
};

/// Varies the train fraction; the remainder goes 1-1-2 to
/// validation / fusion-map / test.
SweepResult sweep_train_fraction(const LoadedDataset& data, const std::vector<double>& grid,
                                 const std::vector<uint64_t>& seeds, const PipelineConfig& cfg);

/// Varies the fusion-map fraction; the remainder goes 2-1-1 to
/// train / validation / test.
SweepResult sweep_map_fraction(const LoadedDataset& data, const std::vector<double>& grid,
                               const std::vector<uint64_t>& seeds, const PipelineConfig& cfg);

std::vector<double> default_sweep_grid();  // 0.1 .. 0.7 step 0.1

// ---- rendering -------------------------------------------------------------
// Percentages are printed with 2 decimals. CSV carries one row per
// setting/run plus a mean row; the first line is a '#' comment with the
// config hash.

std::string report_to_json(const ExperimentResult& r, const std::vector<std::string>& class_names,
                           const std::string& config_hash);
std::string report_to_markdown(const ExperimentResult& r, const std::vector<std::string>& class_names,
                               const std::string& config_hash);
std::string repeat_to_csv(const RepeatResult& r, const std::string& config_hash);
std::string repeat_to_markdown(const RepeatResult& r, const std::string& config_hash);
std::string sweep_to_csv(const SweepResult& s, const std::string& config_hash);
std::string sweep_to_markdown(const SweepResult& s, const std::string& config_hash);

std::string format_percent(double fraction);  // 0.9921 -> "99.21%"

}  // namespace texfuse
