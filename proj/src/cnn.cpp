#include "texfuse/cnn.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <thread>

#include <json.hpp>

#include "texfuse/util.hpp"

namespace texfuse {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

// ---- layer specs -----------------------------------------------------------

std::vector<LayerSpec> default_layer_stack() {
  using K = LayerSpec::Kind;
  return {
      {K::conv, 64, 5, 0}, {K::relu}, {K::maxpool}, {K::conv, 16, 3, 0}, {K::relu}, {K::maxpool},
      {K::fc, 0, 0, 128},  {K::relu}, {K::fc, 0, 0, 0}, {K::softmax},
  };
}

namespace {

const char* kind_name(LayerSpec::Kind k) {
  switch (k) {
    case LayerSpec::Kind::conv: return "conv";
    case LayerSpec::Kind::relu: return "relu";
    case LayerSpec::Kind::maxpool: return "maxpool";
    case LayerSpec::Kind::fc: return "fc";
    case LayerSpec::Kind::softmax: return "softmax";
  }
  return "?";
}

LayerSpec::Kind kind_from_name(const std::string& s) {
  for (auto k : {LayerSpec::Kind::conv, LayerSpec::Kind::relu, LayerSpec::Kind::maxpool, LayerSpec::Kind::fc,
                 LayerSpec::Kind::softmax})
    if (s == kind_name(k)) return k;
  throw std::runtime_error("unknown layer kind: " + s);
}

}  // namespace

std::vector<LayerSpec> parse_layer_stack(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  std::vector<LayerSpec> specs;
  for (const auto& e : j) {
    LayerSpec s;
    s.kind = kind_from_name(e.at("kind").get<std::string>());
    if (s.kind == LayerSpec::Kind::conv) {
      s.filters = e.at("filters").get<int>();
      s.ksize = e.at("size").get<int>();
    } else if (s.kind == LayerSpec::Kind::fc) {
      s.units = e.at("units").get<int>();
    }
    specs.push_back(s);
  }
  return specs;
}

std::string layer_stack_to_json(const std::vector<LayerSpec>& specs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : specs) {
    nlohmann::json e{{"kind", kind_name(s.kind)}};
    if (s.kind == LayerSpec::Kind::conv) {
      e["filters"] = s.filters;
      e["size"] = s.ksize;
    } else if (s.kind == LayerSpec::Kind::fc) {
      e["units"] = s.units;
    }
    j.push_back(e);
  }
  return j.dump();
}

// ---- conv ------------------------------------------------------------------

Conv2d::Conv2d(int in_ch_, int out_ch_, int ksize_) : in_ch(in_ch_), out_ch(out_ch_), ksize(ksize_) {
  if (ksize % 2 == 0 || ksize < 1) throw std::runtime_error("conv kernel size must be odd");
  weight.assign(static_cast<size_t>(out_ch) * in_ch * ksize * ksize, 0.0);
  bias.assign(out_ch, 0.0);
  grad_weight.assign(weight.size(), 0.0);
  grad_bias.assign(bias.size(), 0.0);
}

Tensor Conv2d::forward(const Tensor& x, bool train) {
  if (x.c != in_ch) throw std::runtime_error("conv: channel mismatch");
  const int h = x.h, w = x.w, k = ksize, pad = ksize / 2;
  const int hw = h * w, kk = in_ch * k * k;

  cols_.assign(static_cast<size_t>(kk) * hw, 0.0);
  // im2col: row (c*k*k + ky*k + kx) holds the shifted image plane
  for (int c = 0; c < in_ch; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        double* row = cols_.data() + (static_cast<size_t>(c) * k * k + static_cast<size_t>(ky) * k + kx) * hw;
        const int dy = ky - pad, dx = kx - pad;
        const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
        const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
        for (int y = y0; y < y1; ++y)
          std::memcpy(row + static_cast<size_t>(y) * w + x0, &x.v[(static_cast<size_t>(c) * h + y + dy) * w + x0 + dx],
                      static_cast<size_t>(x1 - x0) * sizeof(double));
      }

  Tensor out(out_ch, h, w);
  EMap y(out.v.data(), out_ch, hw);
  y.noalias() = ECMap(weight.data(), out_ch, kk) * ECMap(cols_.data(), kk, hw);
  for (int f = 0; f < out_ch; ++f) y.row(f).array() += bias[f];

  if (train) input_ = x;
  return out;
}

Tensor Conv2d::backward(const Tensor& dy) {
  const int h = input_.h, w = input_.w, k = ksize, pad = ksize / 2;
  const int hw = h * w, kk = in_ch * k * k;
  if (dy.c != out_ch || dy.h != h || dy.w != w) throw std::runtime_error("conv backward: shape mismatch");

  ECMap dym(dy.v.data(), out_ch, hw);
  EMap(grad_weight.data(), out_ch, kk).noalias() += dym * ECMap(cols_.data(), kk, hw).transpose();
  for (int f = 0; f < out_ch; ++f) grad_bias[f] += dym.row(f).sum();

  std::vector<double> dcols(static_cast<size_t>(kk) * hw);
  EMap(dcols.data(), kk, hw).noalias() = ECMap(weight.data(), out_ch, kk).transpose() * dym;

  Tensor dx(in_ch, h, w);
  // col2im: scatter-add each shifted plane back
  for (int c = 0; c < in_ch; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const double* row = dcols.data() + (static_cast<size_t>(c) * k * k + static_cast<size_t>(ky) * k + kx) * hw;
        const int dyo = ky - pad, dxo = kx - pad;
        const int y0 = std::max(0, -dyo), y1 = std::min(h, h - dyo);
        const int x0 = std::max(0, -dxo), x1 = std::min(w, w - dxo);
        for (int y = y0; y < y1; ++y) {
          double* dst = &dx.v[(static_cast<size_t>(c) * h + y + dyo) * w + x0 + dxo];
          const double* src = row + static_cast<size_t>(y) * w + x0;
          for (int x = 0; x < x1 - x0; ++x) dst[x] += src[x];
        }
      }
  return dx;
}

// ---- relu ------------------------------------------------------------------

Tensor Relu::forward(const Tensor& x, bool train) {
  Tensor out = x;
  for (double& v : out.v) v = v > 0.0 ? v : 0.0;
  if (train) input_ = x;
  return out;
}

Tensor Relu::backward(const Tensor& dy) {
  Tensor dx = dy;
  for (size_t i = 0; i < dx.v.size(); ++i)
    if (input_.v[i] <= 0.0) dx.v[i] = 0.0;
  return dx;
}

// ---- maxpool ---------------------------------------------------------------

Tensor MaxPool2::forward(const Tensor& x, bool train) {
  const int oh = x.h / 2, ow = x.w / 2;
  Tensor out(x.c, oh, ow);
  if (train) {
    in_c = x.c;
    in_h = x.h;
    in_w = x.w;
    argmax_.assign(out.size(), 0);
  }
  for (int c = 0; c < x.c; ++c)
    for (int y = 0; y < oh; ++y)
      for (int xo = 0; xo < ow; ++xo) {
        int best = (static_cast<int>((static_cast<size_t>(c) * x.h + 2 * y) * x.w)) + 2 * xo;
        double bv = x.v[best];
        const int cand[3] = {best + 1, best + x.w, best + x.w + 1};
        for (int idx : cand)
          if (x.v[idx] > bv) {
            bv = x.v[idx];
            best = idx;
          }
        out.at(c, y, xo) = bv;
        if (train) argmax_[(static_cast<size_t>(c) * oh + y) * ow + xo] = best;
      }
  return out;
}

Tensor MaxPool2::backward(const Tensor& dy) {
  Tensor dx(in_c, in_h, in_w);
  const int oh = in_h / 2, ow = in_w / 2;
  if (dy.c != in_c || dy.h != oh || dy.w != ow) throw std::runtime_error("maxpool backward: shape mismatch");
  for (size_t i = 0; i < dy.v.size(); ++i) dx.v[argmax_[i]] += dy.v[i];
  return dx;
}

// ---- dense -----------------------------------------------------------------

Dense::Dense(int in_units_, int out_units_) : in_units(in_units_), out_units(out_units_) {
  weight.assign(static_cast<size_t>(out_units) * in_units, 0.0);
  bias.assign(out_units, 0.0);
  grad_weight.assign(weight.size(), 0.0);
  grad_bias.assign(bias.size(), 0.0);
}

Tensor Dense::forward(const Tensor& x, bool train) {
  if (static_cast<int>(x.size()) != in_units) throw std::runtime_error("fc: input size mismatch");
  Tensor out(out_units, 1, 1);
  ECMap W(weight.data(), out_units, in_units);
  Eigen::Map<Eigen::VectorXd>(out.v.data(), out_units).noalias() =
      W * Eigen::Map<const Eigen::VectorXd>(x.v.data(), in_units) + Eigen::Map<const Eigen::VectorXd>(bias.data(), out_units);
  if (train) {
    input_ = x.v;
    in_c_ = x.c;
    in_h_ = x.h;
    in_w_ = x.w;
  }
  return out;
}

Tensor Dense::backward(const Tensor& dy) {
  if (static_cast<int>(dy.size()) != out_units) throw std::runtime_error("fc backward: shape mismatch");
  EMap(grad_weight.data(), out_units, in_units).noalias() +=
      Eigen::Map<const Eigen::VectorXd>(dy.v.data(), out_units) *
      Eigen::Map<const Eigen::VectorXd>(input_.data(), in_units).transpose();
  for (int i = 0; i < out_units; ++i) grad_bias[i] += dy.v[i];

  Tensor dx(in_c_, in_h_, in_w_);  // gradient in the shape the input had
  Eigen::Map<Eigen::VectorXd>(dx.v.data(), in_units).noalias() =
      ECMap(weight.data(), out_units, in_units).transpose() * Eigen::Map<const Eigen::VectorXd>(dy.v.data(), out_units);
  return dx;
}

// ---- softmax ---------------------------------------------------------------

Tensor Softmax::forward(const Tensor& x, bool train) {
  Tensor out = x;
  const double m = *std::max_element(x.v.begin(), x.v.end());
  double sum = 0.0;
  for (double& v : out.v) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : out.v) v /= sum;
  if (train) probs_ = out.v;
  return out;
}

Tensor Softmax::backward(const Tensor& dy) {
  Tensor dx = dy;
  double dot = 0.0;
  for (size_t i = 0; i < dy.v.size(); ++i) dot += dy.v[i] * probs_[i];
  for (size_t i = 0; i < dy.v.size(); ++i) dx.v[i] = probs_[i] * (dy.v[i] - dot);
  return dx;
}

double softmax_cross_entropy(const std::vector<double>& logits, int label, std::vector<double>* dlogits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  std::vector<double> p(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  const double loss = -std::log(std::max(p[label], 1e-300));
  if (dlogits) {
    *dlogits = p;
    (*dlogits)[label] -= 1.0;
  }
  return loss;
}

// ---- model -----------------------------------------------------------------

Tensor preprocess(const GrayImage& img, const Tensor& mean) {
  if (mean.c != 1 || mean.h != img.height || mean.w != img.width)
    throw std::runtime_error("preprocess: mean image shape mismatch");
  Tensor t(1, img.height, img.width);
  for (size_t i = 0; i < t.v.size(); ++i) t.v[i] = img.pixels[i] / 255.0 - mean.v[i];
  return t;
}

Tensor compute_mean_image(const std::vector<GrayImage>& train_images) {
  if (train_images.empty()) throw std::runtime_error("mean image: empty training set");
  const int h = train_images.front().height, w = train_images.front().width;
  Tensor mean(1, h, w);
  for (const auto& img : train_images) {
    if (img.height != h || img.width != w) throw std::runtime_error("mean image: inconsistent shapes");
    for (size_t i = 0; i < mean.v.size(); ++i) mean.v[i] += img.pixels[i] / 255.0;
  }
  for (double& v : mean.v) v /= static_cast<double>(train_images.size());
  return mean;
}

namespace {

std::vector<std::unique_ptr<Layer>> build_layers(const std::vector<LayerSpec>& specs, int input_size,
                                                 int num_classes) {
  std::vector<std::unique_ptr<Layer>> layers;
  int c = 1, h = input_size, w = input_size;
  bool first_conv = true;
  for (const auto& s : specs) {
    switch (s.kind) {
      case LayerSpec::Kind::conv: {
        if (first_conv && (s.filters != 64 || s.ksize != 5 || c != 1))
          throw std::runtime_error("first conv layer must be 64 filters of 5x5 on depth 1");
        first_conv = false;
        layers.push_back(std::make_unique<Conv2d>(c, s.filters, s.ksize));
        c = s.filters;  // same padding keeps h, w
        break;
      }
      case LayerSpec::Kind::relu:
        layers.push_back(std::make_unique<Relu>());
        break;
      case LayerSpec::Kind::maxpool:
        layers.push_back(std::make_unique<MaxPool2>());
        h /= 2;
        w /= 2;
        if (h < 1 || w < 1) throw std::runtime_error("layer stack pools below 1x1");
        break;
      case LayerSpec::Kind::fc: {
        const int units = s.units == 0 ? num_classes : s.units;
        layers.push_back(std::make_unique<Dense>(c * h * w, units));
        c = units;
        h = w = 1;
        break;
      }
      case LayerSpec::Kind::softmax:
        layers.push_back(std::make_unique<Softmax>());
        break;
    }
  }
  if (specs.empty() || specs.back().kind != LayerSpec::Kind::softmax)
    throw std::runtime_error("layer stack must end with softmax");
  if (c != num_classes) throw std::runtime_error("layer stack must end with fc sized to the class count");
  return layers;
}

}  // namespace

CnnModel::CnnModel(const CnnModel& o)
    : specs(o.specs), mean_image(o.mean_image), num_classes(o.num_classes), input_size(o.input_size), seed(o.seed) {
  layers.reserve(o.layers.size());
  for (const auto& l : o.layers) layers.push_back(l->clone());
}

CnnModel& CnnModel::operator=(const CnnModel& o) {
  if (this != &o) *this = CnnModel(o);
  return *this;
}

std::vector<double> CnnModel::probabilities(const Tensor& preprocessed) {
  Tensor t = preprocessed;
  for (auto& l : layers) t = l->forward(t, false);
  return t.v;
}

CnnModel::Prediction CnnModel::predict(const GrayImage& img) {
  Prediction p;
  p.probabilities = probabilities(preprocess(img, mean_image));
  p.class_index = static_cast<int>(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                                   p.probabilities.begin());
  return p;
}

CnnModel build_cnn(const std::vector<LayerSpec>& specs, int input_size, int num_classes, uint64_t seed) {
  CnnModel m;
  m.specs = specs;
  m.num_classes = num_classes;
  m.input_size = input_size;
  m.seed = seed;
  m.layers = build_layers(specs, input_size, num_classes);
  m.mean_image = Tensor(1, input_size, input_size);

  // standard normal scaled by 0.01, zero biases
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& l : m.layers) {
    auto blocks = l->params();
    if (blocks.empty()) continue;
    for (double& v : *blocks[0].value) v = gauss(gen) * 0.01;  // weights
    std::fill(blocks[1].value->begin(), blocks[1].value->end(), 0.0);  // biases
  }
  return m;
}

// ---- training --------------------------------------------------------------

namespace {

void zero_grads(std::vector<std::unique_ptr<Layer>>& layers) {
  for (auto& l : layers)
    for (auto& b : l->params()) std::fill(b.grad->begin(), b.grad->end(), 0.0);
}

double sample_grad(std::vector<std::unique_ptr<Layer>>& layers, const Tensor& x, int label) {
  Tensor t = x;
  const size_t last = layers.size() - 1;  // softmax handled by the fused head
  for (size_t i = 0; i < last; ++i) t = layers[i]->forward(t, true);
  std::vector<double> dlogits;
  const double loss = softmax_cross_entropy(t.v, label, &dlogits);
  Tensor dt(static_cast<int>(dlogits.size()), 1, 1);
  dt.v = dlogits;
  for (size_t i = last; i-- > 0;) dt = layers[i]->backward(dt);
  return loss;
}

std::vector<std::vector<double>> snapshot_weights(const CnnModel& m) {
  std::vector<std::vector<double>> snap;
  for (const auto& l : const_cast<CnnModel&>(m).layers)
    for (auto& b : const_cast<Layer&>(*l).params()) snap.push_back(*b.value);
  return snap;
}

void restore_weights(CnnModel& m, const std::vector<std::vector<double>>& snap) {
  size_t i = 0;
  for (auto& l : m.layers)
    for (auto& b : l->params()) *b.value = snap[i++];
}

}  // namespace

TrainHistory train_cnn(CnnModel& model, const std::vector<GrayImage>& train_images,
                       const std::vector<int>& train_labels, const std::vector<GrayImage>& val_images,
                       const std::vector<int>& val_labels, const TrainConfig& cfg) {
  if (train_images.empty() || train_images.size() != train_labels.size())
    throw std::runtime_error("train_cnn: bad training set");
  if (val_images.size() != val_labels.size()) throw std::runtime_error("train_cnn: bad validation set");

  model.mean_image = compute_mean_image(train_images);
  std::vector<Tensor> train_x;
  train_x.reserve(train_images.size());
  for (const auto& img : train_images) train_x.push_back(preprocess(img, model.mean_image));
  std::vector<Tensor> val_x;
  val_x.reserve(val_images.size());
  for (const auto& img : val_images) val_x.push_back(preprocess(img, model.mean_image));

  // one velocity buffer per parameter block
  std::vector<std::vector<double>> velocity;
  for (auto& l : model.layers)
    for (auto& b : l->params()) velocity.emplace_back(b.value->size(), 0.0);

  std::mt19937_64 gen(mix_seed(cfg.seed, 0xba7c));
  std::vector<size_t> order(train_x.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainHistory history;
  std::vector<std::vector<double>> best_snapshot;
  const int threads = std::max(1, cfg.threads);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[gen() % i]);

    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t stop = std::min(order.size(), start + cfg.batch_size);
      const int bsize = static_cast<int>(stop - start);
      zero_grads(model.layers);

      double batch_loss = 0.0;
      if (threads == 1 || bsize < 2 * threads) {
        for (size_t i = start; i < stop; ++i)
          batch_loss += sample_grad(model.layers, train_x[order[i]], train_labels[order[i]]);
      } else {
        // contiguous chunks, reduced in chunk order, so a fixed thread count
        // reproduces bit-identical results
        const int T = threads;
        std::vector<std::vector<std::unique_ptr<Layer>>> clones(T);
        std::vector<double> losses(T, 0.0);
        std::vector<std::thread> pool;
        for (int t = 0; t < T; ++t) {
          for (const auto& l : model.layers) clones[t].push_back(l->clone());
          const size_t c0 = start + (stop - start) * t / T;
          const size_t c1 = start + (stop - start) * (t + 1) / T;
          pool.emplace_back([&, t, c0, c1] {
            zero_grads(clones[t]);
            for (size_t i = c0; i < c1; ++i)
              losses[t] += sample_grad(clones[t], train_x[order[i]], train_labels[order[i]]);
          });
        }
        for (auto& th : pool) th.join();
        for (int t = 0; t < T; ++t) {
          batch_loss += losses[t];
          size_t li = 0;
          for (auto& l : model.layers) {
            auto dst = l->params();
            auto src = clones[t][li++]->params();
            for (size_t b = 0; b < dst.size(); ++b)
              for (size_t k = 0; k < dst[b].grad->size(); ++k) (*dst[b].grad)[k] += (*src[b].grad)[k];
          }
        }
      }

      if (!std::isfinite(batch_loss)) throw TrainDiverged("training diverged: non-finite loss", history);
      epoch_loss += batch_loss;

      const double scale = 1.0 / bsize;
      size_t vi = 0;
      for (auto& l : model.layers)
        for (auto& b : l->params()) {
          auto& vel = velocity[vi++];
          for (size_t k = 0; k < vel.size(); ++k) {
            vel[k] = cfg.momentum * vel[k] - cfg.learning_rate * (*b.grad)[k] * scale;
            (*b.value)[k] += vel[k];
          }
        }
    }

    EpochStats stats;
    stats.train_loss = epoch_loss / static_cast<double>(train_x.size());
    int correct = 0;
    for (size_t i = 0; i < val_x.size(); ++i) {
      const auto probs = model.probabilities(val_x[i]);
      const int pred = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
      if (pred == val_labels[i]) ++correct;
    }
    stats.val_accuracy = val_x.empty() ? 0.0 : static_cast<double>(correct) / val_x.size();
    history.epochs.push_back(stats);

    if (!val_x.empty() && (history.best_epoch < 0 || stats.val_accuracy > history.best_val_accuracy)) {
      history.best_epoch = epoch;
      history.best_val_accuracy = stats.val_accuracy;
      best_snapshot = snapshot_weights(model);
    }
  }

  if (!best_snapshot.empty()) restore_weights(model, best_snapshot);
  return history;
}

// ---- serialization ---------------------------------------------------------

void save_cnn(const CnnModel& model, const std::filesystem::path& path) {
  std::string out = "TXC1";
  write_u32(out, static_cast<uint32_t>(model.specs.size()));
  for (const auto& s : model.specs) {
    out.push_back(static_cast<char>(s.kind));
    write_u32(out, static_cast<uint32_t>(s.filters));
    write_u32(out, static_cast<uint32_t>(s.ksize));
    write_u32(out, static_cast<uint32_t>(s.units));
  }
  write_u32(out, static_cast<uint32_t>(model.num_classes));
  write_u32(out, static_cast<uint32_t>(model.input_size));
  write_u64(out, model.seed);

  CnnModel& m = const_cast<CnnModel&>(model);
  for (auto& l : m.layers)
    for (auto& b : l->params()) {
      write_u64(out, b.value->size());
      for (double v : *b.value) write_f64(out, v);
    }
  write_u32(out, static_cast<uint32_t>(model.mean_image.h));
  write_u32(out, static_cast<uint32_t>(model.mean_image.w));
  for (double v : model.mean_image.v) write_f64(out, v);
  atomic_write_file(path, out);
}

CnnModel load_cnn(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "TXC1", 4) != 0)
    throw std::runtime_error("bad model magic in " + path.string());

  const uint32_t nspecs = read_u32(in);
  std::vector<LayerSpec> specs(nspecs);
  for (auto& s : specs) {
    char k;
    in.read(&k, 1);
    s.kind = static_cast<LayerSpec::Kind>(k);
    s.filters = static_cast<int>(read_u32(in));
    s.ksize = static_cast<int>(read_u32(in));
    s.units = static_cast<int>(read_u32(in));
  }
  const int num_classes = static_cast<int>(read_u32(in));
  const int input_size = static_cast<int>(read_u32(in));
  const uint64_t seed = read_u64(in);

  CnnModel m = build_cnn(specs, input_size, num_classes, seed);
  for (auto& l : m.layers)
    for (auto& b : l->params()) {
      const uint64_t n = read_u64(in);
      if (n != b.value->size()) throw std::runtime_error("model weight blob size mismatch");
      for (auto& v : *b.value) v = read_f64(in);
    }
  const int mh = static_cast<int>(read_u32(in));
  const int mw = static_cast<int>(read_u32(in));
  m.mean_image = Tensor(1, mh, mw);
  for (auto& v : m.mean_image.v) v = read_f64(in);
  return m;
}

std::string history_to_json(const TrainHistory& h, const TrainConfig& cfg, const std::string& config_hash) {
  nlohmann::json j;
  j["config"] = {{"epochs", cfg.epochs},     {"batch_size", cfg.batch_size}, {"learning_rate", cfg.learning_rate},
                 {"momentum", cfg.momentum}, {"seed", cfg.seed},             {"threads", cfg.threads}};
  auto& epochs = j["epochs"] = nlohmann::json::array();
  for (const auto& e : h.epochs) epochs.push_back({{"train_loss", e.train_loss}, {"val_accuracy", e.val_accuracy}});
  j["best_epoch"] = h.best_epoch;
  j["best_val_accuracy"] = h.best_val_accuracy;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  return j.dump(2) + "\n";
}

}  // namespace texfuse
