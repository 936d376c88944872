#include "texfuse/fusion.hpp"

#include <random>
#include <stdexcept>

#include <json.hpp>

#include "texfuse/util.hpp"

namespace texfuse {

ConfusionMatrix ConfusionMatrix::from(const std::vector<int>& predictions, const std::vector<int>& truths, int k) {
  if (predictions.size() != truths.size()) throw std::runtime_error("confusion: length mismatch");
  ConfusionMatrix cm(k);
  for (size_t i = 0; i < truths.size(); ++i) {
    if (truths[i] < 0 || truths[i] >= k || predictions[i] < 0 || predictions[i] >= k)
      throw std::runtime_error("confusion: class index out of range");
    ++cm.at(truths[i], predictions[i]);
  }
  return cm;
}

int64_t ConfusionMatrix::total() const {
  int64_t t = 0;
  for (int64_t c : counts) t += c;
  return t;
}

int64_t ConfusionMatrix::row_total(int t) const {
  int64_t s = 0;
  for (int p = 0; p < k; ++p) s += at(t, p);
  return s;
}

int64_t ConfusionMatrix::col_total(int p) const {
  int64_t s = 0;
  for (int t = 0; t < k; ++t) s += at(t, p);
  return s;
}

double ConfusionMatrix::accuracy() const {
  const int64_t n = total();
  if (n == 0) return 0.0;
  int64_t diag = 0;
  for (int c = 0; c < k; ++c) diag += at(c, c);
  return static_cast<double>(diag) / static_cast<double>(n);
}

double ConfusionMatrix::recall(int c) const {
  const int64_t n = row_total(c);
  return n > 0 ? static_cast<double>(at(c, c)) / static_cast<double>(n) : 0.0;
}

ClassifierStats ClassifierStats::from(const ConfusionMatrix& cm) {
  ClassifierStats s;
  s.accuracy_rate.resize(cm.k);
  s.misclassification_rate.resize(cm.k);
  for (int p = 0; p < cm.k; ++p) {
    const int64_t predicted_as = cm.col_total(p);
    // never-predicted class: no evidence of competence, minimal confidence
    s.accuracy_rate[p] = predicted_as > 0 ? static_cast<double>(cm.at(p, p)) / static_cast<double>(predicted_as) : 0.0;
    s.misclassification_rate[p] = 1.0 - s.accuracy_rate[p];
  }
  return s;
}

const char* expert_name(Expert e) { return e == Expert::cnn ? "CNN" : "SVM"; }

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::cnn: return "CNN";
    case Provenance::svm: return "SVM";
    case Provenance::conflict_cnn: return "conflict-CNN";
    case Provenance::conflict_svm: return "conflict-SVM";
  }
  return "?";
}

FusionModel build_map(const std::vector<int>& cnn_predictions, const std::vector<int>& svm_predictions,
                      const std::vector<int>& truths, int num_classes, int repetitions, uint64_t seed) {
  if (truths.empty() || cnn_predictions.size() != truths.size() || svm_predictions.size() != truths.size())
    throw std::runtime_error("build_map: prediction/truth sequences must be aligned and non-empty");
  if (repetitions < 1) throw std::runtime_error("build_map: repetitions must be >= 1");

  std::vector<int64_t> class_counts(num_classes, 0);
  for (int t : truths) ++class_counts[t];
  for (int c = 0; c < num_classes; ++c)
    if (class_counts[c] == 0)
      throw std::runtime_error("build_map: class " + std::to_string(c) + " absent from the fusion-map split");

  FusionModel fm;
  fm.cnn_confusion = ConfusionMatrix::from(cnn_predictions, truths, num_classes);
  fm.svm_confusion = ConfusionMatrix::from(svm_predictions, truths, num_classes);

  std::vector<double> cnn_recall(num_classes, 0.0), svm_recall(num_classes, 0.0);
  if (repetitions == 1) {
    fm.cnn_stats = ClassifierStats::from(fm.cnn_confusion);
    fm.svm_stats = ClassifierStats::from(fm.svm_confusion);
    for (int c = 0; c < num_classes; ++c) {
      cnn_recall[c] = fm.cnn_confusion.recall(c);
      svm_recall[c] = fm.svm_confusion.recall(c);
    }
  } else {
    // averaged statistics over seeded bootstrap resamples of the split
    fm.cnn_stats.accuracy_rate.assign(num_classes, 0.0);
    fm.cnn_stats.misclassification_rate.assign(num_classes, 0.0);
    fm.svm_stats = fm.cnn_stats;
    std::mt19937_64 gen(mix_seed(seed, 0xfa57));
    const size_t n = truths.size();
    for (int r = 0; r < repetitions; ++r) {
      std::vector<int> ct(n), cp(n), sp(n);
      for (size_t i = 0; i < n; ++i) {
        const size_t j = gen() % n;
        ct[i] = truths[j];
        cp[i] = cnn_predictions[j];
        sp[i] = svm_predictions[j];
      }
      const auto ccm = ConfusionMatrix::from(cp, ct, num_classes);
      const auto scm = ConfusionMatrix::from(sp, ct, num_classes);
      const auto cs = ClassifierStats::from(ccm);
      const auto ss = ClassifierStats::from(scm);
      for (int c = 0; c < num_classes; ++c) {
        fm.cnn_stats.accuracy_rate[c] += cs.accuracy_rate[c];
        fm.svm_stats.accuracy_rate[c] += ss.accuracy_rate[c];
        cnn_recall[c] += ccm.recall(c);
        svm_recall[c] += scm.recall(c);
      }
    }
    for (int c = 0; c < num_classes; ++c) {
      fm.cnn_stats.accuracy_rate[c] /= repetitions;
      fm.svm_stats.accuracy_rate[c] /= repetitions;
      fm.cnn_stats.misclassification_rate[c] = 1.0 - fm.cnn_stats.accuracy_rate[c];
      fm.svm_stats.misclassification_rate[c] = 1.0 - fm.svm_stats.accuracy_rate[c];
      cnn_recall[c] /= repetitions;
      svm_recall[c] /= repetitions;
    }
  }

  fm.map.owner.resize(num_classes);
  for (int c = 0; c < num_classes; ++c)
    fm.map.owner[c] = cnn_recall[c] > svm_recall[c] ? Expert::cnn : Expert::svm;  // tie -> SVM
  return fm;
}

double confidence_score(const ClassifierStats& self, const ClassifierStats& other, int predicted_class) {
  return self.accuracy_rate[predicted_class] + other.misclassification_rate[predicted_class];
}

FusedDecision fused_predict(const FusionModel& fm, int cnn_prediction, int svm_prediction) {
  if (cnn_prediction == svm_prediction) {
    const Provenance p = fm.map.owner[cnn_prediction] == Expert::cnn ? Provenance::cnn : Provenance::svm;
    return {cnn_prediction, p};
  }
  const bool cnn_claims = fm.map.owner[cnn_prediction] == Expert::cnn;
  const bool svm_claims = fm.map.owner[svm_prediction] == Expert::svm;
  if (cnn_claims && !svm_claims) return {cnn_prediction, Provenance::cnn};
  if (svm_claims && !cnn_claims) return {svm_prediction, Provenance::svm};

  // zero or two specialization claims: confusion statistics break the tie
  const double score_cnn = confidence_score(fm.cnn_stats, fm.svm_stats, cnn_prediction);
  const double score_svm = confidence_score(fm.svm_stats, fm.cnn_stats, svm_prediction);
  if (score_cnn > score_svm) return {cnn_prediction, Provenance::conflict_cnn};
  return {svm_prediction, Provenance::conflict_svm};  // tie -> SVM
}

namespace {

nlohmann::json confusion_to_json(const ConfusionMatrix& cm) {
  nlohmann::json rows = nlohmann::json::array();
  for (int t = 0; t < cm.k; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (int p = 0; p < cm.k; ++p) row.push_back(cm.at(t, p));
    rows.push_back(row);
  }
  return rows;
}

ConfusionMatrix confusion_from_json(const nlohmann::json& rows) {
  ConfusionMatrix cm(static_cast<int>(rows.size()));
  for (int t = 0; t < cm.k; ++t)
    for (int p = 0; p < cm.k; ++p) cm.at(t, p) = rows[t][p].get<int64_t>();
  return cm;
}

}  // namespace

std::string fusion_to_json(const FusionModel& fm, const std::string& split_id, const std::string& config_hash) {
  nlohmann::json j;
  auto& owners = j["binary_map"] = nlohmann::json::array();
  for (Expert e : fm.map.owner) owners.push_back(expert_name(e));
  j["cnn_confusion"] = confusion_to_json(fm.cnn_confusion);
  j["svm_confusion"] = confusion_to_json(fm.svm_confusion);
  j["cnn_accuracy_rate"] = fm.cnn_stats.accuracy_rate;
  j["cnn_misclassification_rate"] = fm.cnn_stats.misclassification_rate;
  j["svm_accuracy_rate"] = fm.svm_stats.accuracy_rate;
  j["svm_misclassification_rate"] = fm.svm_stats.misclassification_rate;
  j["tie_break"] = "svm";
  j["split"] = split_id;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  return j.dump(2) + "\n";
}

FusionModel fusion_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  FusionModel fm;
  for (const auto& e : j.at("binary_map"))
    fm.map.owner.push_back(e.get<std::string>() == "CNN" ? Expert::cnn : Expert::svm);
  fm.cnn_confusion = confusion_from_json(j.at("cnn_confusion"));
  fm.svm_confusion = confusion_from_json(j.at("svm_confusion"));
  fm.cnn_stats.accuracy_rate = j.at("cnn_accuracy_rate").get<std::vector<double>>();
  fm.cnn_stats.misclassification_rate = j.at("cnn_misclassification_rate").get<std::vector<double>>();
  fm.svm_stats.accuracy_rate = j.at("svm_accuracy_rate").get<std::vector<double>>();
  fm.svm_stats.misclassification_rate = j.at("svm_misclassification_rate").get<std::vector<double>>();
  return fm;
}

}  // namespace texfuse
