#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace texfuse {

using FeatureMatrix = std::vector<std::vector<double>>;

/// Per-dimension training min/max; apply maps affinely onto [0, 1]
/// (no clamping), constant dimensions map to 0.
struct ScalerParams {
  std::vector<double> min;
  std::vector<double> max;
};

ScalerParams fit_scaler(const FeatureMatrix& train);
std::vector<double> apply_scaler(const ScalerParams& s, const std::vector<double>& x);

struct SvmHyperparams {
  double C = 2048.0;
  double gamma = 0.0313;
  double tolerance = 1e-3;
  int max_passes = 100;  // consecutive stalled sweeps before giving up
  uint64_t seed = 0;     // working-pair second-choice randomization
};

double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y, double gamma);

/// One soft-margin machine for a class pair; class_pos is labeled +1.
struct BinarySvm {
  int class_pos = 0;
  int class_neg = 1;
  FeatureMatrix support_vectors;
  std::vector<double> dual_coef;  // alpha_i * y_i, all nonzero
  double bias = 0.0;

  double decision(const std::vector<double>& x, double gamma) const;
};

/// Per-sweep diagnostics recorded during SMO; the dual objective must be
/// nondecreasing and sum(alpha_i * y_i) must stay 0.
struct SmoTrace {
  std::vector<double> objective_per_sweep;
  std::vector<double> alpha_y_sum_per_sweep;
  std::vector<double> final_alphas;
  std::vector<double> final_margins;  // y_i * f(x_i) per training point
  int sweeps = 0;
  bool converged = false;
};

struct SmoNonConvergence : std::runtime_error {
  SmoNonConvergence(std::string msg, BinarySvm best, SmoTrace trace)
      : std::runtime_error(std::move(msg)), best_iterate(std::move(best)), trace(std::move(trace)) {}
  BinarySvm best_iterate;
  SmoTrace trace;
};

/// Sequential minimal optimization on the dual problem for one class pair.
/// Converges when a full sweep changes nothing and every point satisfies the
/// KKT conditions within hp.tolerance; throws SmoNonConvergence (carrying the
/// best iterate) when hp.max_passes consecutive sweeps stall short of that.
BinarySvm smo_train_binary(const FeatureMatrix& pos, const FeatureMatrix& neg, const SvmHyperparams& hp,
                           SmoTrace* trace = nullptr);

/// One-vs-one ensemble over scaled features.
struct SvmModel {
  ScalerParams scaler;
  SvmHyperparams hp;
  int num_classes = 0;
  std::vector<BinarySvm> machines;  // one per unordered pair, K*(K-1)/2
};

SvmModel train_svm(const FeatureMatrix& features, const std::vector<int>& labels, int num_classes,
                   const SvmHyperparams& hp);

struct SvmPrediction {
  int class_index = 0;
  std::vector<int> votes;
};

/// Majority vote over all machines; ties go to the smallest class index.
SvmPrediction svm_predict(const SvmModel& model, const std::vector<double>& x);

std::string svm_to_json(const SvmModel& model, const std::string& config_hash);
SvmModel svm_from_json(const std::string& text);

}  // namespace texfuse
