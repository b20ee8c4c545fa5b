#pragma once

// Compact adaptive 2-D CNN.
//
// Each hidden CNN neuron fuses convolution, activation and average-pooling:
//
//   x_k = b_k + sum_i valid_corr(w_ik, s_i)     (unpadded cross-correlation)
//   y_k = f(x_k)
//   s_k = subsample(y_k, ssx, ssy)
//
// The last CNN layer ignores its configured subsampling factors and pools its
// whole map to a scalar, so any number of CNN layers works with any window
// size. Its scalars feed a fully connected MLP whose final layer has one
// neuron per class. f is tanh on every layer.
//
// Map orientation: rows pair with (Kx, ssx), columns with (Ky, ssy).

#include "polsar/polsar_core.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace polsar::cnn {

/// Dense row-major real map.
struct Map {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Map() = default;
  Map(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  friend bool operator==(const Map&, const Map&) = default;
};

/// out(r, c) = sum_{u,v} kernel(u, v) * input(r + u, c + v). No kernel flip.
[[nodiscard]] Map valid_conv2d(const Map& kernel, const Map& input);

/// Average pooling over non-overlapping ssx x ssy blocks; incomplete trailing
/// rows/columns are dropped.
[[nodiscard]] Map subsample(const Map& map, int ssx, int ssy);

enum class Activation : std::uint8_t { tanh = 0, identity = 1 };

struct ConvLayerSpec {
  int neurons = 20;
  int kx = 3;
  int ky = 3;
  int ssx = 2;
  int ssy = 2;

  friend bool operator==(const ConvLayerSpec&, const ConvLayerSpec&) = default;
};

struct NetworkConfig {
  int input_channels = 3;
  int window = 7;
  std::vector<ConvLayerSpec> cnn_layers{ConvLayerSpec{}};
  std::vector<int> mlp_layers{10};  // hidden MLP layers; the class layer is implicit
  int num_classes = 2;
  Activation activation = Activation::tanh;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument if any layer would have a non-positive map.
  void validate() const;

  /// (rows, cols) of every CNN layer's convolution output.
  [[nodiscard]] std::vector<std::pair<int, int>> conv_output_dims() const;

  /// One CNN layer of 20 neurons (3x3 kernels, 2x2 subsampling), one hidden
  /// MLP layer of 10 neurons, tanh.
  static NetworkConfig compact_default(int channels, int window, int classes,
                                       std::uint64_t seed = 0);

  /// Width multiplier m scales every hidden layer's neuron count; depth
  /// multiplier n repeats the CNN layer stack n times.
  [[nodiscard]] NetworkConfig scaled(int width_mult, int depth_mult) const;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Channel-planar size x size x channels input window.
struct Patch {
  int channels = 0;
  int size = 0;
  std::vector<double> data;

  Patch() = default;
  Patch(int c, int n) : channels(c), size(n), data(static_cast<std::size_t>(c) * n * n, 0.0) {}

  [[nodiscard]] std::span<const double> channel(int c) const {
    const auto plane = static_cast<std::size_t>(size) * size;
    return {data.data() + static_cast<std::size_t>(c) * plane, plane};
  }
  [[nodiscard]] std::span<double> channel(int c) {
    const auto plane = static_cast<std::size_t>(size) * size;
    return {data.data() + static_cast<std::size_t>(c) * plane, plane};
  }

  friend bool operator==(const Patch&, const Patch&) = default;
};

/// Intermediate values of one forward pass, kept for back-propagation.
struct ForwardTrace {
  struct CnnLayer {
    std::vector<Map> x;  // pre-activation
    std::vector<Map> y;  // activation
    std::vector<Map> s;  // pooled output
    int pool_rows = 1;   // effective subsampling factors
    int pool_cols = 1;
  };
  struct MlpLayer {
    std::vector<double> x;
    std::vector<double> y;
  };
  Patch input;
  std::vector<CnnLayer> cnn;
  std::vector<MlpLayer> mlp;  // hidden layers then the class layer
  std::vector<double> mlp_input;
};

/// Network parameters live in one flat vector with a fixed order:
///   for each CNN layer, for each neuron k: kernels w_ik (i over the previous
///   layer's maps, each kx*ky row-major), then bias b_k;
///   for each MLP layer, for each neuron k: weights w_jk (j over inputs),
///   then bias b_k.
/// Gradients use the same layout.
class CompactCnn {
 public:
  CompactCnn(NetworkConfig config, std::vector<double> parameters);

  [[nodiscard]] const NetworkConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::span<const double> parameters() const noexcept { return params_; }
  [[nodiscard]] std::span<double> parameters() noexcept { return params_; }
  [[nodiscard]] std::size_t parameter_count() const noexcept { return params_.size(); }

  [[nodiscard]] std::span<const double> kernel(int layer, int neuron, int input) const;
  [[nodiscard]] std::span<double> kernel(int layer, int neuron, int input);
  [[nodiscard]] double& cnn_bias(int layer, int neuron);
  /// MLP layer index covers hidden layers then the class layer.
  [[nodiscard]] double& mlp_weight(int layer, int neuron, int input);
  [[nodiscard]] double& mlp_bias(int layer, int neuron);

  /// Offset of a CNN neuron's block (kernels then bias) in parameters().
  [[nodiscard]] std::size_t cnn_offset(int layer, int neuron) const;
  [[nodiscard]] std::size_t mlp_offset(int layer, int neuron) const;
  [[nodiscard]] int mlp_input_count(int layer) const;
  [[nodiscard]] int mlp_layer_count() const noexcept { return static_cast<int>(mlp_sizes_.size()); }

  /// Class scores; `trace` is overwritten with the per-layer intermediates.
  std::vector<double> forward(const Patch& patch, ForwardTrace& trace) const;
  [[nodiscard]] std::vector<double> forward(const Patch& patch) const;

  // Metadata of the training cube, carried for inference on other scenes.
  std::vector<std::string> channel_names;
  std::vector<ChannelScaling> scaling;

  friend bool operator==(const CompactCnn&, const CompactCnn&) = default;

 private:
  void check_patch(const Patch& patch) const;

  NetworkConfig config_;
  std::vector<double> params_;
  std::vector<std::vector<std::size_t>> cnn_offsets_;
  std::vector<std::vector<std::size_t>> mlp_offsets_;
  std::vector<int> mlp_sizes_;  // neuron counts, hidden + class layer
};

/// Total parameter count implied by a configuration.
[[nodiscard]] std::size_t parameter_count(const NetworkConfig& config);

/// Uniform [-0.1, 0.1] kernels and biases drawn from config.seed.
[[nodiscard]] CompactCnn init_weights(const NetworkConfig& config);

/// +1 at target_class, -1 elsewhere.
[[nodiscard]] std::vector<double> encode_target(int target_class, int num_classes);

/// sum_i (y_i - t_i)^2 with the +-1 target encoding.
[[nodiscard]] double mse_loss(std::span<const double> scores, int target_class);

/// Exact gradient of mse_loss w.r.t. every parameter (same layout as
/// CompactCnn::parameters()).
[[nodiscard]] std::vector<double> backward(const CompactCnn& net, const Patch& patch,
                                           int target_class);

/// Back-propagates from an existing forward trace into `gradient`
/// (overwritten). Returns the loss of that pass.
double backward(const CompactCnn& net, const ForwardTrace& trace, int target_class,
                std::span<double> gradient);

/// Index of the largest score; ties go to the lowest index.
[[nodiscard]] int argmax(std::span<const double> scores) noexcept;

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  int max_iterations = 400;
  double initial_lr = 0.05;
  double lr_up = 1.05;
  double lr_down = 0.70;
  std::uint64_t shuffle_seed = 0;

  void validate() const;
};

/// lr * up when the MSE decreased, lr * down otherwise (including ties).
[[nodiscard]] double adapt_learning_rate(double lr, double prev_mse, double new_mse,
                                         double up = 1.05, double down = 0.70);

struct Sample {
  Patch patch;
  int label = 0;  // 0-based class index
};

struct EpochRecord {
  int epoch = 0;                 // 1-based
  double train_mse = 0.0;        // mean per-sample loss after the epoch
  double learning_rate = 0.0;    // rate used during the epoch
  double next_learning_rate = 0.0;
  std::optional<double> validation_mse;
  std::optional<double> validation_accuracy;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainHistory {
  double initial_mse = 0.0;
  std::vector<EpochRecord> epochs;
  int final_epoch = 0;

  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct TrainResult {
  CompactCnn net;
  TrainHistory history;
};

/// Mean per-sample loss over a set.
[[nodiscard]] double mean_loss(const CompactCnn& net, std::span<const Sample> samples);
[[nodiscard]] double accuracy(const CompactCnn& net, std::span<const Sample> samples);

/// Per-sample stochastic gradient descent for exactly cfg.max_iterations
/// epochs with epoch-level learning-rate adaptation. Throws DivergenceError
/// on a non-finite loss. `validation` is only evaluated, never trained on.
[[nodiscard]] TrainResult train(CompactCnn net, std::span<const Sample> samples,
                                const TrainConfig& cfg,
                                std::span<const Sample> validation = {});

// ---------------------------------------------------------------------------
// Gradient verification

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_parameter = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t parameter_count = 0;
};

/// Relative error |a - n| / max(1, |a|, |n|).
[[nodiscard]] double gradient_relative_error(double analytic, double numeric) noexcept;

/// Compares backward() with central finite differences of mse_loss.
[[nodiscard]] GradientCheckReport gradient_check(const CompactCnn& net, const Patch& patch,
                                                 int target_class, double step = 1e-6);

/// Random instance for gradient_check: parameters uniform in [-0.5, 0.5],
/// patch values uniform in [-1, 1], random target class; all from `seed`.
struct GradientCase {
  CompactCnn net;
  Patch patch;
  int target_class = 0;
};
[[nodiscard]] GradientCase random_gradient_case(const NetworkConfig& config, std::uint64_t seed);

}  // namespace polsar::cnn
