#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace polsar::tools {

struct ExtractOptions {
  std::string input;
  std::string channels = "T3";
  int boxcar = 5;
  double db_floor = 1e-15;
  std::string stage = "scaled";
  std::string out;
  std::string pauli_rgb;
};

struct NetworkOptions {
  int window = 9;
  std::string cnn = "20x3x3s2";
  std::string mlp = "10";
  int width_mult = 1;
  int depth_mult = 1;
  std::string activation = "tanh";  // "identity" is a test mode
};

struct TrainOptions {
  std::string cube;
  std::string labels;
  std::optional<int> per_class;
  std::optional<double> fraction;
  bool clamp = false;
  NetworkOptions network;
  std::optional<int> classes;
  int max_iters = 400;
  double lr = 0.05;
  double lr_up = 1.05;
  double lr_down = 0.70;
  std::uint64_t seed = 1;
  std::optional<double> val_split;
  int restarts = 1;
  std::string out;
  std::string history;
  std::string samples_out;
};

struct ClassifyOptions {
  std::string model;
  std::string cube;
  std::string out_labels;
  std::string out_mask;
  std::string palette;
  unsigned threads = 0;
};

struct EvaluateOptions {
  std::string pred;
  std::string truth;
  std::optional<int> classes;
  std::string remap;
  std::string remap_pred;
  std::string exclude_train;
  std::string class_names;
  std::string out;
};

struct SynthOptions {
  std::string preset;
  std::string spec;
  int size = 256;
  std::optional<std::uint64_t> seed;
  std::string out_cube;
  std::string out_labels;
  unsigned threads = 0;
};

struct GradcheckOptions {
  NetworkOptions network{7, "20x3x3s2", "10", 1, 1};
  int channels = 3;
  int classes = 4;
  std::uint64_t seed = 1;
  int seeds = 5;
  double step = 1e-6;
  double tolerance = 1e-6;
};

struct SweepOptions {
  std::string input;
  std::string labels;
  std::string channel_sets = "T3,T3_SPAN,T3_C3";
  std::string windows = "7,9,11,13,15,17,19,21";
  int boxcar = 5;
  std::optional<int> per_class;
  std::optional<double> fraction;
  bool clamp = false;
  NetworkOptions network;
  int max_iters = 400;
  std::uint64_t seed = 1;
  bool include_train = false;
  std::optional<double> reference_oa;
  std::string out;
};

int run_extract(const ExtractOptions& o);
int run_train(const TrainOptions& o);
int run_classify(const ClassifyOptions& o);
int run_evaluate(const EvaluateOptions& o, bool include_train_pixels);
int run_synth(const SynthOptions& o);
int run_gradcheck(const GradcheckOptions& o);
int run_sweep(const SweepOptions& o);

}  // namespace polsar::tools
