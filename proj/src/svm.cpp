#include "texfuse/svm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

namespace texfuse {

ScalerParams fit_scaler(const FeatureMatrix& train) {
  if (train.empty()) throw std::runtime_error("fit_scaler: empty training matrix");
  const size_t dim = train.front().size();
  ScalerParams s;
  s.min.assign(dim, std::numeric_limits<double>::infinity());
  s.max.assign(dim, -std::numeric_limits<double>::infinity());
  for (const auto& row : train) {
    if (row.size() != dim) throw std::runtime_error("fit_scaler: ragged matrix");
    for (size_t k = 0; k < dim; ++k) {
      s.min[k] = std::min(s.min[k], row[k]);
      s.max[k] = std::max(s.max[k], row[k]);
    }
  }
  return s;
}

std::vector<double> apply_scaler(const ScalerParams& s, const std::vector<double>& x) {
  if (x.size() != s.min.size()) throw std::runtime_error("apply_scaler: dimension mismatch");
  std::vector<double> out(x.size());
  for (size_t k = 0; k < x.size(); ++k) {
    const double range = s.max[k] - s.min[k];
    out[k] = range > 0.0 ? (x[k] - s.min[k]) / range : 0.0;
  }
  return out;
}

double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y, double gamma) {
  if (x.size() != y.size()) throw std::runtime_error("rbf_kernel: dimension mismatch");
  double d2 = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

double BinarySvm::decision(const std::vector<double>& x, double gamma) const {
  double f = bias;
  for (size_t k = 0; k < support_vectors.size(); ++k)
    f += dual_coef[k] * rbf_kernel(support_vectors[k], x, gamma);
  return f;
}

namespace {

struct SmoState {
  const FeatureMatrix& X;
  const std::vector<int>& y;
  const SvmHyperparams& hp;
  std::vector<double> K;      // full Gram, n x n
  std::vector<double> alpha;
  std::vector<double> F;      // f(x_i) = sum_j alpha_j y_j K_ij + b
  double b = 0.0;
  int n = 0;

  double k(int i, int j) const { return K[static_cast<size_t>(i) * n + j]; }

  // W(alpha) = sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij,
  // computed from the maintained F values.
  double objective() const {
    double w = 0.0;
    for (int i = 0; i < n; ++i) w += alpha[i] - 0.5 * alpha[i] * y[i] * (F[i] - b);
    return w;
  }

  double alpha_y_sum() const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += alpha[i] * y[i];
    return s;
  }

  bool take_step(int i, int j) {
    if (i == j) return false;
    const double C = hp.C;
    const double Ei = F[i] - y[i], Ej = F[j] - y[j];
    double L, H;
    if (y[i] != y[j]) {
      L = std::max(0.0, alpha[j] - alpha[i]);
      H = std::min(C, C + alpha[j] - alpha[i]);
    } else {
      L = std::max(0.0, alpha[i] + alpha[j] - C);
      H = std::min(C, alpha[i] + alpha[j]);
    }
    if (L >= H) return false;
    const double eta = k(i, i) + k(j, j) - 2.0 * k(i, j);
    if (eta <= 0.0) return false;

    double aj = alpha[j] + y[j] * (Ei - Ej) / eta;
    aj = std::clamp(aj, L, H);
    // snap to the box so bound alphas are exactly 0 or C, not fp residue
    constexpr double snap = 1e-11;
    if (aj < snap) aj = 0.0;
    else if (aj > C - snap) aj = C;
    const double dj = aj - alpha[j];
    if (std::abs(dj) < 1e-10) return false;
    double ai = alpha[i] - y[i] * y[j] * dj;
    if (ai < snap) ai = 0.0;
    else if (ai > C - snap) ai = C;
    const double di = ai - alpha[i];

    const double b1 = b - Ei - y[i] * di * k(i, i) - y[j] * dj * k(i, j);
    const double b2 = b - Ej - y[i] * di * k(i, j) - y[j] * dj * k(j, j);
    double b_new;
    if (ai > 0.0 && ai < C)
      b_new = b1;
    else if (aj > 0.0 && aj < C)
      b_new = b2;
    else
      b_new = (b1 + b2) / 2.0;

    const double db = b_new - b;
    for (int t = 0; t < n; ++t) F[t] += y[i] * di * k(i, t) + y[j] * dj * k(j, t) + db;
    alpha[i] = ai;
    alpha[j] = aj;
    b = b_new;
    return true;
  }

  // KKT violation at tolerance tol: margins below/above 1 with room to move.
  bool violates_kkt(int i) const {
    const double m = y[i] * F[i];  // y_i * f(x_i)
    return (m < 1.0 - hp.tolerance && alpha[i] < hp.C) || (m > 1.0 + hp.tolerance && alpha[i] > 0.0);
  }
};

BinarySvm extract_model(const SmoState& s, int class_pos, int class_neg) {
  BinarySvm m;
  m.class_pos = class_pos;
  m.class_neg = class_neg;
  m.bias = s.b;
  for (int i = 0; i < s.n; ++i)
    if (s.alpha[i] > 0.0) {
      m.support_vectors.push_back(s.X[i]);
      m.dual_coef.push_back(s.alpha[i] * s.y[i]);
    }
  return m;
}

}  // namespace

BinarySvm smo_train_binary(const FeatureMatrix& pos, const FeatureMatrix& neg, const SvmHyperparams& hp,
                           SmoTrace* trace) {
  if (pos.empty() || neg.empty()) throw std::runtime_error("smo_train_binary: both classes must be non-empty");
  if (hp.C <= 0.0 || hp.gamma <= 0.0) throw std::runtime_error("smo_train_binary: C and gamma must be positive");

  FeatureMatrix X = pos;
  X.insert(X.end(), neg.begin(), neg.end());
  std::vector<int> y(X.size());
  std::fill(y.begin(), y.begin() + static_cast<long>(pos.size()), 1);
  std::fill(y.begin() + static_cast<long>(pos.size()), y.end(), -1);
  const int n = static_cast<int>(X.size());

  SmoState s{X, y, hp, {}, {}, {}, 0.0, n};
  s.K.resize(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = rbf_kernel(X[i], X[j], hp.gamma);
      s.K[static_cast<size_t>(i) * n + j] = v;
      s.K[static_cast<size_t>(j) * n + i] = v;
    }
  s.alpha.assign(n, 0.0);
  s.F.assign(n, 0.0);

  std::mt19937_64 gen(hp.seed);
  SmoTrace local_trace;
  SmoTrace& tr = trace ? *trace : local_trace;
  tr = SmoTrace{};

  const int hard_cap = std::max(1000, 100 * hp.max_passes);
  int stalled = 0;
  for (;;) {
    int num_changed = 0;
    int num_violations = 0;
    for (int i = 0; i < n; ++i) {
      if (!s.violates_kkt(i)) continue;
      ++num_violations;
      // randomized second choice, scanning on from there when the step fails
      int j = static_cast<int>(gen() % static_cast<uint64_t>(n - 1));
      if (j >= i) ++j;
      bool stepped = s.take_step(i, j);
      for (int probe = 0; !stepped && probe < n; ++probe) {
        j = (j + 1) % n;
        stepped = s.take_step(i, j);
      }
      if (stepped) ++num_changed;
    }
    ++tr.sweeps;
    tr.objective_per_sweep.push_back(s.objective());
    tr.alpha_y_sum_per_sweep.push_back(s.alpha_y_sum());

    if (num_violations == 0) {
      tr.converged = true;
      break;
    }
    stalled = (num_changed == 0) ? stalled + 1 : 0;
    if (stalled >= hp.max_passes || tr.sweeps >= hard_cap) {
      tr.final_alphas = s.alpha;
      tr.final_margins.resize(n);
      for (int i = 0; i < n; ++i) tr.final_margins[i] = y[i] * s.F[i];
      throw SmoNonConvergence("smo did not converge after " + std::to_string(tr.sweeps) + " sweeps",
                              extract_model(s, 0, 1), tr);
    }
  }

  tr.final_alphas = s.alpha;
  tr.final_margins.resize(n);
  for (int i = 0; i < n; ++i) tr.final_margins[i] = y[i] * s.F[i];
  return extract_model(s, 0, 1);
}

SvmModel train_svm(const FeatureMatrix& features, const std::vector<int>& labels, int num_classes,
                   const SvmHyperparams& hp) {
  if (features.size() != labels.size() || features.empty())
    throw std::runtime_error("train_svm: features/labels mismatch or empty");

  SvmModel model;
  model.hp = hp;
  model.num_classes = num_classes;
  model.scaler = fit_scaler(features);

  std::vector<FeatureMatrix> by_class(num_classes);
  for (size_t i = 0; i < features.size(); ++i) by_class[labels[i]].push_back(apply_scaler(model.scaler, features[i]));
  for (int c = 0; c < num_classes; ++c)
    if (by_class[c].empty()) throw std::runtime_error("train_svm: class " + std::to_string(c) + " has no samples");

  for (int a = 0; a < num_classes; ++a)
    for (int b = a + 1; b < num_classes; ++b) {
      SvmHyperparams pair_hp = hp;
      pair_hp.seed = hp.seed + static_cast<uint64_t>(a) * 7919 + b;
      BinarySvm m = smo_train_binary(by_class[a], by_class[b], pair_hp);
      m.class_pos = a;
      m.class_neg = b;
      model.machines.push_back(std::move(m));
    }
  return model;
}

SvmPrediction svm_predict(const SvmModel& model, const std::vector<double>& x) {
  const std::vector<double> xs = apply_scaler(model.scaler, x);
  SvmPrediction pred;
  pred.votes.assign(model.num_classes, 0);
  for (const auto& m : model.machines) {
    const double f = m.decision(xs, model.hp.gamma);
    ++pred.votes[f >= 0.0 ? m.class_pos : m.class_neg];
  }
  pred.class_index = 0;
  for (int c = 1; c < model.num_classes; ++c)
    if (pred.votes[c] > pred.votes[pred.class_index]) pred.class_index = c;  // tie keeps the lower index
  return pred;
}

std::string svm_to_json(const SvmModel& model, const std::string& config_hash) {
  nlohmann::json j;
  j["scaler"] = {{"min", model.scaler.min}, {"max", model.scaler.max}};
  j["hyperparams"] = {{"C", model.hp.C},
                      {"gamma", model.hp.gamma},
                      {"tolerance", model.hp.tolerance},
                      {"max_passes", model.hp.max_passes},
                      {"seed", model.hp.seed}};
  j["num_classes"] = model.num_classes;
  auto& machines = j["machines"] = nlohmann::json::array();
  for (const auto& m : model.machines)
    machines.push_back({{"class_pos", m.class_pos},
                        {"class_neg", m.class_neg},
                        {"support_vectors", m.support_vectors},
                        {"dual_coef", m.dual_coef},
                        {"bias", m.bias}});
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  return j.dump(2) + "\n";
}

SvmModel svm_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SvmModel model;
  model.scaler.min = j.at("scaler").at("min").get<std::vector<double>>();
  model.scaler.max = j.at("scaler").at("max").get<std::vector<double>>();
  const auto& hp = j.at("hyperparams");
  model.hp.C = hp.at("C").get<double>();
  model.hp.gamma = hp.at("gamma").get<double>();
  model.hp.tolerance = hp.at("tolerance").get<double>();
  model.hp.max_passes = hp.at("max_passes").get<int>();
  model.hp.seed = hp.at("seed").get<uint64_t>();
  model.num_classes = j.at("num_classes").get<int>();
  for (const auto& mj : j.at("machines")) {
    BinarySvm m;
    m.class_pos = mj.at("class_pos").get<int>();
    m.class_neg = mj.at("class_neg").get<int>();
    m.support_vectors = mj.at("support_vectors").get<FeatureMatrix>();
    m.dual_coef = mj.at("dual_coef").get<std::vector<double>>();
    m.bias = mj.at("bias").get<double>();
    model.machines.push_back(std::move(m));
  }
  return model;
}

}  // namespace texfuse
