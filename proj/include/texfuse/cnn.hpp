#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "texfuse/image.hpp"
#include "texfuse/tensor.hpp"

namespace texfuse {

struct LayerSpec {
  enum class Kind : uint8_t { conv = 0, relu = 1, maxpool = 2, fc = 3, softmax = 4 };
  Kind kind = Kind::relu;
  int filters = 0;  // conv
  int ksize = 0;    // conv (odd; stride fixed at 1, same padding)
  int units = 0;    // fc; 0 means "number of classes", resolved at build
};

/// conv(64@5x5) -> relu -> maxpool -> conv(16@3x3) -> relu -> maxpool ->
/// fc(128) -> relu -> fc(K) -> softmax
std::vector<LayerSpec> default_layer_stack();

/// JSON array of {"kind": "conv"|"relu"|"maxpool"|"fc"|"softmax", ...}.
std::vector<LayerSpec> parse_layer_stack(const std::string& json_text);
std::string layer_stack_to_json(const std::vector<LayerSpec>& specs);

struct ParamBlock {
  std::vector<double>* value = nullptr;
  std::vector<double>* grad = nullptr;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, bool train) = 0;
  virtual Tensor backward(const Tensor& dy) = 0;  // accumulates parameter grads
  virtual std::vector<ParamBlock> params() { return {}; }
  virtual std::unique_ptr<Layer> clone() const = 0;
};

/// Stride-1 convolution with same padding (odd kernel); output spatial size
/// equals input spatial size.
class Conv2d final : public Layer {
 public:
  Conv2d(int in_ch, int out_ch, int ksize);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  std::vector<ParamBlock> params() override { return {{&weight, &grad_weight}, {&bias, &grad_bias}}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }

  int in_ch, out_ch, ksize;
  std::vector<double> weight;  // out_ch x (in_ch*k*k), row-major
  std::vector<double> bias;    // out_ch
  std::vector<double> grad_weight, grad_bias;

 private:
  Tensor input_;
  std::vector<double> cols_;  // im2col cache, (in_ch*k*k) x (h*w)
};

class Relu final : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }

 private:
  Tensor input_;
};

/// 2x2 window, stride 2, argmax recorded for the backward pass. Odd trailing
/// rows/columns are dropped.
class MaxPool2 final : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool2>(*this); }

 private:
  int in_c = 0, in_h = 0, in_w = 0;
  std::vector<int> argmax_;
};

class Dense final : public Layer {
 public:
  Dense(int in_units, int out_units);
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  std::vector<ParamBlock> params() override { return {{&weight, &grad_weight}, {&bias, &grad_bias}}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

  int in_units, out_units;
  std::vector<double> weight;  // out x in, row-major
  std::vector<double> bias;
  std::vector<double> grad_weight, grad_bias;

 private:
  std::vector<double> input_;
  int in_c_ = 0, in_h_ = 0, in_w_ = 0;
};

class Softmax final : public Layer {
 public:
  Tensor forward(const Tensor& x, bool train) override;
  Tensor backward(const Tensor& dy) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Softmax>(*this); }

 private:
  std::vector<double> probs_;
};

/// Numerically stable fused head used during training: loss plus gradient
/// with respect to the logits.
double softmax_cross_entropy(const std::vector<double>& logits, int label, std::vector<double>* dlogits);

/// pixel/255 minus the stored per-pixel training mean.
Tensor preprocess(const GrayImage& img, const Tensor& mean);
Tensor compute_mean_image(const std::vector<GrayImage>& train_images);

struct CnnModel {
  std::vector<LayerSpec> specs;
  std::vector<std::unique_ptr<Layer>> layers;
  Tensor mean_image;  // (1, input, input)
  int num_classes = 0;
  int input_size = 0;
  uint64_t seed = 0;

  CnnModel() = default;
  CnnModel(const CnnModel& o);
  CnnModel& operator=(const CnnModel& o);
  CnnModel(CnnModel&&) = default;
  CnnModel& operator=(CnnModel&&) = default;

  /// Full forward pass (ends at the softmax layer).
  std::vector<double> probabilities(const Tensor& preprocessed);
  struct Prediction {
    int class_index = 0;
    std::vector<double> probabilities;
  };
  Prediction predict(const GrayImage& img);
};

/// Builds the stack, checks shape consistency for input_size x input_size
/// inputs, and initializes weights from a standard normal scaled by 0.01
/// with zero biases (mt19937_64 seeded by `seed`). The first conv layer must
/// be 64 filters of 5x5 on depth 1.
CnnModel build_cnn(const std::vector<LayerSpec>& specs, int input_size, int num_classes, uint64_t seed);

struct TrainConfig {
  int epochs = 150;
  int batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
  uint64_t seed = 0;
  int threads = 1;
};

struct EpochStats {
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;  // 0-based; -1 when no validation set
  double best_val_accuracy = 0.0;
};

struct TrainDiverged : std::runtime_error {
  TrainDiverged(std::string msg, TrainHistory h) : std::runtime_error(std::move(msg)), history(std::move(h)) {}
  TrainHistory history;
};

/// Minibatch SGD with momentum. Computes and stores the training mean image,
/// tracks per-epoch train loss and validation accuracy, and restores the
/// weight snapshot with the best validation accuracy (ties: earliest epoch).
/// Deterministic for a fixed seed and threads=1; with threads>1 the batch is
/// split into contiguous chunks whose gradients are reduced in chunk order.
TrainHistory train_cnn(CnnModel& model, const std::vector<GrayImage>& train_images,
                       const std::vector<int>& train_labels, const std::vector<GrayImage>& val_images,
                       const std::vector<int>& val_labels, const TrainConfig& cfg);

// Binary model file: magic "TXC1", layer-spec table, weight blobs
// (little-endian f64), then the mean image.
void save_cnn(const CnnModel& model, const std::filesystem::path& path);
CnnModel load_cnn(const std::filesystem::path& path);

std::string history_to_json(const TrainHistory& h, const TrainConfig& cfg, const std::string& config_hash);

}  // namespace texfuse
