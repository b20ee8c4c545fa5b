#include "polsar/cnn.hpp"

#include "polsar/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace polsar::cnn {

namespace {

void reshape(Map& m, int rows, int cols) {
  m.rows = rows;
  m.cols = cols;
  m.data.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
}

// Fixed-size variants below sum each output in the same (u, v) order as the
// generic loops, so results do not depend on which path runs.
template <int KX, int KY>
void correlate_fixed(const double* kernel, const double* in, int in_cols, double* out,
                     int out_rows, int out_cols) {
  for (int r = 0; r < out_rows; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      double acc = out[static_cast<std::size_t>(r) * out_cols + c];
      for (int u = 0; u < KX; ++u) {
        const double* src = in + static_cast<std::size_t>(r + u) * in_cols + c;
        for (int v = 0; v < KY; ++v) {
          acc += kernel[u * KY + v] * src[v];
        }
      }
      out[static_cast<std::size_t>(r) * out_cols + c] = acc;
    }
  }
}

// gw += corr(d, in): gradient of a valid correlation w.r.t. its kernel.
template <int KX, int KY>
void kernel_gradient_fixed(const double* d, int rows, int cols, const double* in, int in_cols,
                           double* gw) {
  double g[KX * KY];
  for (int j = 0; j < KX * KY; ++j) {
    g[j] = gw[j];
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double dv = d[static_cast<std::size_t>(r) * cols + c];
      for (int u = 0; u < KX; ++u) {
        const double* src = in + static_cast<std::size_t>(r + u) * in_cols + c;
        for (int v = 0; v < KY; ++v) {
          g[u * KY + v] += dv * src[v];
        }
      }
    }
  }
  for (int j = 0; j < KX * KY; ++j) {
    gw[j] = g[j];
  }
}

void kernel_gradient(const double* d, int rows, int cols, const double* in, int in_cols, int kx,
                     int ky, double* gw) {
  if (kx == 3 && ky == 3) {
    kernel_gradient_fixed<3, 3>(d, rows, cols, in, in_cols, gw);
    return;
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double dv = d[static_cast<std::size_t>(r) * cols + c];
      for (int u = 0; u < kx; ++u) {
        const double* src = in + static_cast<std::size_t>(r + u) * in_cols + c;
        double* g = gw + u * ky;
        for (int v = 0; v < ky; ++v) {
          g[v] += dv * src[v];
        }
      }
    }
  }
}

// out += corr(kernel, in), out sized (in_rows - kx + 1) x (in_cols - ky + 1).
void correlate_accumulate(const double* kernel, int kx, int ky, const double* in, int in_cols,
                          double* out, int out_rows, int out_cols) {
  if (out_rows == 1 && out_cols == 1 && in_cols == ky) {
    // Kernel covers the whole input: a flat dot product.
    const int n = kx * ky;
    for (int j = 0; j < n; ++j) {
      out[0] += kernel[j] * in[j];
    }
    return;
  }
  if (kx == 3 && ky == 3) {
    correlate_fixed<3, 3>(kernel, in, in_cols, out, out_rows, out_cols);
    return;
  }
  for (int u = 0; u < kx; ++u) {
    for (int v = 0; v < ky; ++v) {
      const double w = kernel[u * ky + v];
      for (int r = 0; r < out_rows; ++r) {
        const double* src = in + static_cast<std::size_t>(r + u) * in_cols + v;
        double* dst = out + static_cast<std::size_t>(r) * out_cols;
        for (int c = 0; c < out_cols; ++c) {
          dst[c] += w * src[c];
        }
      }
    }
  }
}

void pool(const Map& in, int pr, int pc, Map& out) {
  const int rows = in.rows / pr;
  const int cols = in.cols / pc;
  reshape(out, rows, cols);
  const double inv = 1.0 / (static_cast<double>(pr) * pc);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double sum = 0.0;
      for (int a = 0; a < pr; ++a) {
        const double* row = in.data.data() + static_cast<std::size_t>(r * pr + a) * in.cols + c * pc;
        for (int b = 0; b < pc; ++b) {
          sum += row[b];
        }
      }
      out(r, c) = sum * inv;
    }
  }
}

double activate(Activation a, double x) noexcept {
  return a == Activation::tanh ? std::tanh(x) : x;
}

// Derivative expressed through the activation output.
double activation_slope(Activation a, double y) noexcept {
  return a == Activation::tanh ? 1.0 - y * y : 1.0;
}

}  // namespace

Map valid_conv2d(const Map& kernel, const Map& input) {
  if (kernel.rows < 1 || kernel.cols < 1) {
    throw std::invalid_argument("empty convolution kernel");
  }
  if (kernel.rows > input.rows || kernel.cols > input.cols) {
    throw std::invalid_argument("kernel " + std::to_string(kernel.rows) + "x" +
                                std::to_string(kernel.cols) + " larger than input " +
                                std::to_string(input.rows) + "x" + std::to_string(input.cols));
  }
  Map out(input.rows - kernel.rows + 1, input.cols - kernel.cols + 1);
  correlate_accumulate(kernel.data.data(), kernel.rows, kernel.cols, input.data.data(),
                       input.cols, out.data.data(), out.rows, out.cols);
  return out;
}

Map subsample(const Map& map, int ssx, int ssy) {
  if (ssx < 1 || ssy < 1) {
    throw std::invalid_argument("subsampling factors must be >= 1");
  }
  if (ssx > map.rows || ssy > map.cols) {
    throw std::invalid_argument("subsampling factor exceeds map dimension");
  }
  Map out;
  pool(map, ssx, ssy, out);
  return out;
}

// ---------------------------------------------------------------------------
// NetworkConfig

std::vector<std::pair<int, int>> NetworkConfig::conv_output_dims() const {
  std::vector<std::pair<int, int>> dims;
  int rows = window;
  int cols = window;
  for (std::size_t l = 0; l < cnn_layers.size(); ++l) {
    const auto& spec = cnn_layers[l];
    rows = rows - spec.kx + 1;
    cols = cols - spec.ky + 1;
    if (rows < 1 || cols < 1) {
      throw std::invalid_argument("CNN layer " + std::to_string(l + 1) + ": " +
                                  std::to_string(spec.kx) + "x" + std::to_string(spec.ky) +
                                  " kernel does not fit its input map");
    }
    dims.emplace_back(rows, cols);
    if (l + 1 < cnn_layers.size()) {
      rows /= spec.ssx;
      cols /= spec.ssy;
      if (rows < 1 || cols < 1) {
        throw std::invalid_argument("CNN layer " + std::to_string(l + 1) +
                                    ": subsampling leaves an empty map");
      }
    }
  }
  return dims;
}

void NetworkConfig::validate() const {
  if (input_channels < 1) {
    throw std::invalid_argument("input_channels must be >= 1");
  }
  if (window < 1 || window % 2 == 0) {
    throw std::invalid_argument("window must be a positive odd integer, got " +
                                std::to_string(window));
  }
  if (cnn_layers.empty()) {
    throw std::invalid_argument("at least one CNN layer is required");
  }
  for (const auto& spec : cnn_layers) {
    if (spec.neurons < 1 || spec.kx < 1 || spec.ky < 1 || spec.ssx < 1 || spec.ssy < 1) {
      throw std::invalid_argument("CNN layer sizes, kernels and factors must be >= 1");
    }
  }
  for (int n : mlp_layers) {
    if (n < 1) {
      throw std::invalid_argument("MLP layer sizes must be >= 1");
    }
  }
  if (num_classes < 2) {
    throw std::invalid_argument("num_classes must be >= 2");
  }
  (void)conv_output_dims();
}

NetworkConfig NetworkConfig::compact_default(int channels, int window, int classes,
                                             std::uint64_t seed) {
  NetworkConfig cfg;
  cfg.input_channels = channels;
  cfg.window = window;
  cfg.cnn_layers = {ConvLayerSpec{20, 3, 3, 2, 2}};
  cfg.mlp_layers = {10};
  cfg.num_classes = classes;
  cfg.activation = Activation::tanh;
  cfg.seed = seed;
  return cfg;
}

NetworkConfig NetworkConfig::scaled(int width_mult, int depth_mult) const {
  if (width_mult < 1 || depth_mult < 1) {
    throw std::invalid_argument("network multipliers must be >= 1");
  }
  NetworkConfig out = *this;
  out.cnn_layers.clear();
  for (int rep = 0; rep < depth_mult; ++rep) {
    for (auto spec : cnn_layers) {
      spec.neurons *= width_mult;
      out.cnn_layers.push_back(spec);
    }
  }
  for (int& n : out.mlp_layers) {
    n *= width_mult;
  }
  return out;
}

std::size_t parameter_count(const NetworkConfig& config) {
  config.validate();
  std::size_t count = 0;
  int prev = config.input_channels;
  for (const auto& spec : config.cnn_layers) {
    count += static_cast<std::size_t>(spec.neurons) *
             (static_cast<std::size_t>(prev) * spec.kx * spec.ky + 1);
    prev = spec.neurons;
  }
  std::vector<int> sizes = config.mlp_layers;
  sizes.push_back(config.num_classes);
  for (int n : sizes) {
    count += static_cast<std::size_t>(n) * (static_cast<std::size_t>(prev) + 1);
    prev = n;
  }
  return count;
}

// ---------------------------------------------------------------------------
// CompactCnn

CompactCnn::CompactCnn(NetworkConfig config, std::vector<double> parameters)
    : config_(std::move(config)), params_(std::move(parameters)) {
  const std::size_t expected = cnn::parameter_count(config_);
  if (params_.size() != expected) {
    throw std::invalid_argument("parameter vector has " + std::to_string(params_.size()) +
                                " entries, configuration needs " + std::to_string(expected));
  }
  for (double p : params_) {
    if (!std::isfinite(p)) {
      throw std::invalid_argument("non-finite network parameter");
    }
  }

  std::size_t offset = 0;
  int prev = config_.input_channels;
  for (const auto& spec : config_.cnn_layers) {
    auto& layer = cnn_offsets_.emplace_back();
    for (int k = 0; k < spec.neurons; ++k) {
      layer.push_back(offset);
      offset += static_cast<std::size_t>(prev) * spec.kx * spec.ky + 1;
    }
    prev = spec.neurons;
  }
  mlp_sizes_ = config_.mlp_layers;
  mlp_sizes_.push_back(config_.num_classes);
  for (int n : mlp_sizes_) {
    auto& layer = mlp_offsets_.emplace_back();
    for (int k = 0; k < n; ++k) {
      layer.push_back(offset);
      offset += static_cast<std::size_t>(prev) + 1;
    }
    prev = n;
  }
}

std::size_t CompactCnn::cnn_offset(int layer, int neuron) const {
  return cnn_offsets_.at(static_cast<std::size_t>(layer)).at(static_cast<std::size_t>(neuron));
}

std::size_t CompactCnn::mlp_offset(int layer, int neuron) const {
  return mlp_offsets_.at(static_cast<std::size_t>(layer)).at(static_cast<std::size_t>(neuron));
}

int CompactCnn::mlp_input_count(int layer) const {
  if (layer == 0) {
    return config_.cnn_layers.back().neurons;
  }
  return mlp_sizes_.at(static_cast<std::size_t>(layer - 1));
}

std::span<const double> CompactCnn::kernel(int layer, int neuron, int input) const {
  const auto& spec = config_.cnn_layers.at(static_cast<std::size_t>(layer));
  const auto size = static_cast<std::size_t>(spec.kx) * spec.ky;
  return {params_.data() + cnn_offset(layer, neuron) + static_cast<std::size_t>(input) * size,
          size};
}

std::span<double> CompactCnn::kernel(int layer, int neuron, int input) {
  const auto& spec = config_.cnn_layers.at(static_cast<std::size_t>(layer));
  const auto size = static_cast<std::size_t>(spec.kx) * spec.ky;
  return {params_.data() + cnn_offset(layer, neuron) + static_cast<std::size_t>(input) * size,
          size};
}

double& CompactCnn::cnn_bias(int layer, int neuron) {
  const auto& spec = config_.cnn_layers.at(static_cast<std::size_t>(layer));
  const int inputs = layer == 0 ? config_.input_channels
                                : config_.cnn_layers[static_cast<std::size_t>(layer - 1)].neurons;
  return params_[cnn_offset(layer, neuron) +
                 static_cast<std::size_t>(inputs) * spec.kx * spec.ky];
}

double& CompactCnn::mlp_weight(int layer, int neuron, int input) {
  return params_[mlp_offset(layer, neuron) + static_cast<std::size_t>(input)];
}

double& CompactCnn::mlp_bias(int layer, int neuron) {
  return params_[mlp_offset(layer, neuron) + static_cast<std::size_t>(mlp_input_count(layer))];
}

void CompactCnn::check_patch(const Patch& patch) const {
  if (patch.channels != config_.input_channels || patch.size != config_.window ||
      patch.data.size() != static_cast<std::size_t>(patch.channels) * patch.size * patch.size) {
    throw std::invalid_argument(
        "patch shape " + std::to_string(patch.size) + "x" + std::to_string(patch.size) + "x" +
        std::to_string(patch.channels) + " does not match network input " +
        std::to_string(config_.window) + "x" + std::to_string(config_.window) + "x" +
        std::to_string(config_.input_channels));
  }
}

std::vector<double> CompactCnn::forward(const Patch& patch, ForwardTrace& trace) const {
  check_patch(patch);
  if (&trace.input != &patch) {
    trace.input.channels = patch.channels;
    trace.input.size = patch.size;
    trace.input.data.assign(patch.data.begin(), patch.data.end());
  }
  const Activation act = config_.activation;
  const std::size_t layers = config_.cnn_layers.size();
  trace.cnn.resize(layers);

  int prev_count = config_.input_channels;
  int prev_rows = config_.window;
  int prev_cols = config_.window;
  auto prev_map = [&](std::size_t l, int i) -> const double* {
    if (l == 0) {
      return patch.channel(i).data();
    }
    return trace.cnn[l - 1].s[static_cast<std::size_t>(i)].data.data();
  };

  for (std::size_t l = 0; l < layers; ++l) {
    const auto& spec = config_.cnn_layers[l];
    auto& layer = trace.cnn[l];
    const int rows = prev_rows - spec.kx + 1;
    const int cols = prev_cols - spec.ky + 1;
    const bool last = l + 1 == layers;
    layer.pool_rows = last ? rows : spec.ssx;
    layer.pool_cols = last ? cols : spec.ssy;
    const auto n = static_cast<std::size_t>(spec.neurons);
    layer.x.resize(n);
    layer.y.resize(n);
    layer.s.resize(n);
    const std::size_t ksize = static_cast<std::size_t>(spec.kx) * spec.ky;

    for (int k = 0; k < spec.neurons; ++k) {
      Map& x = layer.x[static_cast<std::size_t>(k)];
      Map& y = layer.y[static_cast<std::size_t>(k)];
      reshape(x, rows, cols);
      const double* w = params_.data() + cnn_offset(static_cast<int>(l), k);
      std::fill(x.data.begin(), x.data.end(), w[static_cast<std::size_t>(prev_count) * ksize]);
      for (int i = 0; i < prev_count; ++i) {
        correlate_accumulate(w + static_cast<std::size_t>(i) * ksize, spec.kx, spec.ky,
                             prev_map(l, i), prev_cols, x.data.data(), rows, cols);
      }
      reshape(y, rows, cols);
      for (std::size_t j = 0; j < x.data.size(); ++j) {
        y.data[j] = activate(act, x.data[j]);
      }
      pool(y, layer.pool_rows, layer.pool_cols, layer.s[static_cast<std::size_t>(k)]);
    }
    prev_count = spec.neurons;
    prev_rows = rows / layer.pool_rows;
    prev_cols = cols / layer.pool_cols;
  }

  trace.mlp_input.resize(static_cast<std::size_t>(prev_count));
  for (std::size_t k = 0; k < trace.mlp_input.size(); ++k) {
    trace.mlp_input[k] = trace.cnn.back().s[k].data[0];
  }

  trace.mlp.resize(mlp_sizes_.size());
  const std::vector<double>* in = &trace.mlp_input;
  for (std::size_t m = 0; m < mlp_sizes_.size(); ++m) {
    auto& layer = trace.mlp[m];
    const auto n = static_cast<std::size_t>(mlp_sizes_[m]);
    layer.x.resize(n);
    layer.y.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double* w = params_.data() + mlp_offsets_[m][k];
      double sum = w[in->size()];
      for (std::size_t j = 0; j < in->size(); ++j) {
        sum += w[j] * (*in)[j];
      }
      layer.x[k] = sum;
      layer.y[k] = activate(act, sum);
    }
    in = &layer.y;
  }
  return trace.mlp.back().y;
}

std::vector<double> CompactCnn::forward(const Patch& patch) const {
  ForwardTrace trace;
  return forward(patch, trace);
}

// ---------------------------------------------------------------------------
// Loss and gradients

std::vector<double> encode_target(int target_class, int num_classes) {
  if (target_class < 0 || target_class >= num_classes) {
    throw std::invalid_argument("class index " + std::to_string(target_class) +
                                " out of range [0, " + std::to_string(num_classes) + ")");
  }
  std::vector<double> t(static_cast<std::size_t>(num_classes), -1.0);
  t[static_cast<std::size_t>(target_class)] = 1.0;
  return t;
}

double mse_loss(std::span<const double> scores, int target_class) {
  const auto t = encode_target(target_class, static_cast<int>(scores.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double d = scores[i] - t[i];
    sum += d * d;
  }
  return sum;
}

double backward(const CompactCnn& net, const ForwardTrace& trace, int target_class,
                std::span<double> gradient) {
  const auto& cfg = net.config();
  if (gradient.size() != net.parameter_count()) {
    throw std::invalid_argument("gradient buffer size does not match the network");
  }
  if (trace.cnn.size() != cfg.cnn_layers.size() ||
      trace.mlp.size() != static_cast<std::size_t>(net.mlp_layer_count())) {
    throw std::invalid_argument("forward trace does not belong to this network");
  }
  std::fill(gradient.begin(), gradient.end(), 0.0);
  const Activation act = cfg.activation;
  const auto params = net.parameters();

  const auto& out = trace.mlp.back().y;
  const auto target = encode_target(target_class, static_cast<int>(out.size()));
  double loss = 0.0;

  thread_local std::vector<double> delta;
  thread_local std::vector<double> prev_delta;
  delta.resize(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double d = out[k] - target[k];
    loss += d * d;
    delta[k] = 2.0 * d * activation_slope(act, out[k]);
  }

  // MLP layers, last to first. On exit `prev_delta` holds dE/d(mlp input).
  for (int m = net.mlp_layer_count() - 1; m >= 0; --m) {
    const auto& in = m == 0 ? trace.mlp_input : trace.mlp[static_cast<std::size_t>(m - 1)].y;
    const std::size_t nin = in.size();
    prev_delta.assign(nin, 0.0);
    for (std::size_t k = 0; k < delta.size(); ++k) {
      const std::size_t off = net.mlp_offset(m, static_cast<int>(k));
      const double dk = delta[k];
      for (std::size_t j = 0; j < nin; ++j) {
        gradient[off + j] += dk * in[j];
        prev_delta[j] += params[off + j] * dk;
      }
      gradient[off + nin] += dk;
    }
    if (m > 0) {
      const auto& below = trace.mlp[static_cast<std::size_t>(m - 1)].y;
      for (std::size_t j = 0; j < nin; ++j) {
        prev_delta[j] *= activation_slope(act, below[j]);
      }
      delta.swap(prev_delta);
    }
  }

  // Gradient w.r.t. each pooled output of the current CNN layer.
  thread_local std::vector<Map> ds;
  thread_local std::vector<Map> ds_prev;
  thread_local Map dx;
  const std::size_t layers = cfg.cnn_layers.size();
  ds.resize(static_cast<std::size_t>(cfg.cnn_layers.back().neurons));
  for (std::size_t k = 0; k < ds.size(); ++k) {
    reshape(ds[k], 1, 1);
    ds[k].data[0] = prev_delta[k];
  }

  for (std::size_t li = layers; li-- > 0;) {
    const auto& spec = cfg.cnn_layers[li];
    const auto& layer = trace.cnn[li];
    const int prev_count = li == 0 ? cfg.input_channels : cfg.cnn_layers[li - 1].neurons;
    const std::size_t ksize = static_cast<std::size_t>(spec.kx) * spec.ky;
    const bool propagate = li > 0;
    int prev_rows = cfg.window;
    int prev_cols = cfg.window;
    if (propagate) {
      prev_rows = trace.cnn[li - 1].s[0].rows;
      prev_cols = trace.cnn[li - 1].s[0].cols;
      ds_prev.resize(static_cast<std::size_t>(prev_count));
      for (auto& m : ds_prev) {
        reshape(m, prev_rows, prev_cols);
        std::fill(m.data.begin(), m.data.end(), 0.0);
      }
    }
    auto prev_map = [&](int i) -> const double* {
      if (li == 0) {
        return trace.input.channel(i).data();
      }
      return trace.cnn[li - 1].s[static_cast<std::size_t>(i)].data.data();
    };

    const int pr = layer.pool_rows;
    const int pc = layer.pool_cols;
    const double inv = 1.0 / (static_cast<double>(pr) * pc);
    for (int k = 0; k < spec.neurons; ++k) {
      const Map& y = layer.y[static_cast<std::size_t>(k)];
      const Map& dsk = ds[static_cast<std::size_t>(k)];
      const int rows = y.rows;
      const int cols = y.cols;
      reshape(dx, rows, cols);
      std::fill(dx.data.begin(), dx.data.end(), 0.0);
      // Intra-neuron: spread each pooled gradient over its block, then
      // through the activation.
      for (int r = 0; r < dsk.rows * pr; ++r) {
        for (int c = 0; c < dsk.cols * pc; ++c) {
          dx(r, c) = dsk(r / pr, c / pc) * inv * activation_slope(act, y(r, c));
        }
      }

      const std::size_t off = net.cnn_offset(static_cast<int>(li), k);
      double bias_grad = 0.0;
      for (double v : dx.data) {
        bias_grad += v;
      }
      gradient[off + static_cast<std::size_t>(prev_count) * ksize] += bias_grad;

      const bool flat = rows == 1 && cols == 1 && prev_cols == spec.ky;
      for (int i = 0; i < prev_count; ++i) {
        const double* in = prev_map(i);
        const double* w = params.data() + off + static_cast<std::size_t>(i) * ksize;
        double* gw = gradient.data() + off + static_cast<std::size_t>(i) * ksize;
        if (flat) {
          const double d = dx.data[0];
          for (std::size_t j = 0; j < ksize; ++j) {
            gw[j] += d * in[j];
          }
          if (propagate) {
            double* dst = ds_prev[static_cast<std::size_t>(i)].data.data();
            for (std::size_t j = 0; j < ksize; ++j) {
              dst[j] += w[j] * d;
            }
          }
          continue;
        }
        kernel_gradient(dx.data.data(), rows, cols, in, prev_cols, spec.kx, spec.ky, gw);
        if (propagate) {
          // Inter-layer: adjoint of the valid correlation (full correlation
          // of the delta map with the kernel).
          double* dst_base = ds_prev[static_cast<std::size_t>(i)].data.data();
          for (int u = 0; u < spec.kx; ++u) {
            for (int v = 0; v < spec.ky; ++v) {
              const double wv = w[u * spec.ky + v];
              for (int r = 0; r < rows; ++r) {
                double* dst = dst_base + static_cast<std::size_t>(r + u) * prev_cols + v;
                const double* d = dx.data.data() + static_cast<std::size_t>(r) * cols;
                for (int c = 0; c < cols; ++c) {
                  dst[c] += wv * d[c];
                }
              }
            }
          }
        }
      }
    }
    if (propagate) {
      ds.swap(ds_prev);
    }
  }
  return loss;
}

std::vector<double> backward(const CompactCnn& net, const Patch& patch, int target_class) {
  ForwardTrace trace;
  (void)net.forward(patch, trace);
  std::vector<double> gradient(net.parameter_count());
  (void)backward(net, trace, target_class, gradient);
  return gradient;
}

int argmax(std::span<const double> scores) noexcept {
  int best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[static_cast<std::size_t>(best)]) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

CompactCnn init_weights(const NetworkConfig& config) {
  const std::size_t n = parameter_count(config);
  CounterRng rng(config.seed, 0x494E4954 /* "INIT" */);
  std::vector<double> params(n);
  for (double& p : params) {
    p = rng.uniform(-0.1, 0.1);
  }
  return CompactCnn(config, std::move(params));
}

// ---------------------------------------------------------------------------
// Gradient verification

double gradient_relative_error(double analytic, double numeric) noexcept {
  const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / scale;
}

GradientCheckReport gradient_check(const CompactCnn& net, const Patch& patch, int target_class,
                                   double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("finite-difference step must be positive");
  }
  const auto analytic = backward(net, patch, target_class);
  CompactCnn probe = net;
  auto params = probe.parameters();
  ForwardTrace trace;
  GradientCheckReport report;
  report.parameter_count = params.size();
  for (std::size_t p = 0; p < params.size(); ++p) {
    const double saved = params[p];
    params[p] = saved + step;
    const double plus = mse_loss(probe.forward(patch, trace), target_class);
    params[p] = saved - step;
    const double minus = mse_loss(probe.forward(patch, trace), target_class);
    params[p] = saved;
    const double numeric = (plus - minus) / (2.0 * step);
    const double err = gradient_relative_error(analytic[p], numeric);
    if (err > report.max_relative_error || p == 0) {
      report.max_relative_error = err;
      report.worst_parameter = p;
      report.worst_analytic = analytic[p];
      report.worst_numeric = numeric;
    }
  }
  return report;
}

GradientCase random_gradient_case(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  CounterRng rng(seed, 0x47524144 /* "GRAD" */);
  std::vector<double> params(parameter_count(config));
  for (double& p : params) {
    p = rng.uniform(-0.5, 0.5);
  }
  Patch patch(config.input_channels, config.window);
  for (double& v : patch.data) {
    v = rng.uniform(-1.0, 1.0);
  }
  const int target = static_cast<int>(rng.below(static_cast<std::uint64_t>(config.num_classes)));
  return {CompactCnn(config, std::move(params)), std::move(patch), target};
}

}  // namespace polsar::cnn
