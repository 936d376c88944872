#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace texfuse {

struct ConfusionMatrix {
  int k = 0;
  std::vector<int64_t> counts;  // (true, predicted), row-major

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int k_) : k(k_), counts(static_cast<size_t>(k_) * k_, 0) {}
  static ConfusionMatrix from(const std::vector<int>& predictions, const std::vector<int>& truths, int k);

  int64_t& at(int t, int p) { return counts[static_cast<size_t>(t) * k + p]; }
  int64_t at(int t, int p) const { return counts[static_cast<size_t>(t) * k + p]; }
  int64_t total() const;
  int64_t row_total(int t) const;
  int64_t col_total(int p) const;
  double accuracy() const;  // trace / total
  double recall(int c) const;
};

/// Per predicted class A: AccuracyRate(A) = correct-as-A / predicted-as-A,
/// MisclassificationRate(A) = 1 - AccuracyRate(A). A class the classifier
/// never predicts gets AccuracyRate 0 and MisclassificationRate 1.
struct ClassifierStats {
  std::vector<double> accuracy_rate;
  std::vector<double> misclassification_rate;

  static ClassifierStats from(const ConfusionMatrix& cm);
};

enum class Expert : uint8_t { cnn = 0, svm = 1 };
const char* expert_name(Expert e);

struct BinaryMap {
  std::vector<Expert> owner;  // one entry per class
};

struct FusionModel {
  BinaryMap map;
  ConfusionMatrix cnn_confusion;
  ConfusionMatrix svm_confusion;
  ClassifierStats cnn_stats;
  ClassifierStats svm_stats;
};

/// Assigns each class to the classifier with the higher per-class recall on
/// the fusion-map split (ties go to the SVM) and derives both classifiers'
/// confusion statistics. `repetitions` > 1 averages rates/recalls over that
/// many seeded bootstrap resamples of the split. Errors if a class is absent
/// from `truths`.
FusionModel build_map(const std::vector<int>& cnn_predictions, const std::vector<int>& svm_predictions,
                      const std::vector<int>& truths, int num_classes, int repetitions = 1, uint64_t seed = 0);

/// AccuracyRate_self(c) + MisclassificationRate_other(c): own precision for
/// the predicted class plus the other classifier's failure rate there.
double confidence_score(const ClassifierStats& self, const ClassifierStats& other, int predicted_class);

enum class Provenance : uint8_t { cnn = 0, svm = 1, conflict_cnn = 2, conflict_svm = 3 };
const char* provenance_name(Provenance p);

struct FusedDecision {
  int class_index = 0;
  Provenance provenance = Provenance::svm;
};

/// Agreement passes through. On disagreement, when exactly one prediction
/// falls in its own classifier's specialization (map[cnn_pred] == CNN or
/// map[svm_pred] == SVM) that side wins; with zero or two claims the
/// confidence scores decide (ties go to the SVM).
FusedDecision fused_predict(const FusionModel& fm, int cnn_prediction, int svm_prediction);

std::string fusion_to_json(const FusionModel& fm, const std::string& split_id, const std::string& config_hash);
FusionModel fusion_from_json(const std::string& text);

}  // namespace texfuse
