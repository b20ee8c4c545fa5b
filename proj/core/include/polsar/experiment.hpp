#pragma once

// End-to-end runs: features -> sampling -> training -> classification -> metrics.

#include "polsar/cnn.hpp"
#include "polsar/metrics.hpp"
#include "polsar/pipeline.hpp"
#include "polsar/polsar_core.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace polsar {

struct FeatureOptions {
  ChannelSet channels = ChannelSet::T3;
  int boxcar = 0;  // 0 or 1 disables
  double db_floor = kDefaultDbFloor;
};

/// Linear cube for the chosen channel set; C and span derive from T when needed.
[[nodiscard]] FeatureCube linear_features(const HermitianImage& coherency,
                                          const FeatureOptions& opts);

/// linear_features followed by the dB transform and [-1, 1] scaling.
[[nodiscard]] FeatureCube prepare_features(const HermitianImage& coherency,
                                           const FeatureOptions& opts);

struct ExperimentConfig {
  cnn::NetworkConfig network;  // input_channels and num_classes are filled in
  cnn::TrainConfig training;
  SamplingSpec sampling = SamplingSpec::count(500);
  std::uint64_t sample_seed = 0;
  std::optional<double> validation_ratio;
  bool exclude_training_pixels = true;
  unsigned threads = 0;
};

struct ExperimentResult {
  cnn::CompactCnn net;
  cnn::TrainHistory history;
  SampleSet samples;
  Classification classification;
  ConfusionMatrix confusion;
  AccuracyStats stats;
};

/// `cube` must be scaled; classes are 1..max id of `truth`.
[[nodiscard]] ExperimentResult run_experiment(const FeatureCube& cube, const LabelRaster& truth,
                                              ExperimentConfig cfg);

}  // namespace polsar
