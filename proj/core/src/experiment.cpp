#include "polsar/experiment.hpp"

#include "polsar/error.hpp"

#include <stdexcept>

namespace polsar {

FeatureCube linear_features(const HermitianImage& coherency, const FeatureOptions& opts) {
  const HermitianImage filtered =
      opts.boxcar > 1 ? boxcar_multilook(coherency, opts.boxcar) : coherency;
  std::optional<HermitianImage> covariance;
  std::optional<RealRaster> spans;
  if (opts.channels == ChannelSet::T3_C3) {
    covariance = coherency_to_covariance(filtered);
  }
  if (opts.channels == ChannelSet::T3_SPAN) {
    spans = trace_raster(filtered);
  }
  return extract_channels(filtered, covariance ? &*covariance : nullptr, spans ? &*spans : nullptr,
                          opts.channels);
}

FeatureCube prepare_features(const HermitianImage& coherency, const FeatureOptions& opts) {
  return scale_to_unit(db_transform(linear_features(coherency, opts), opts.db_floor));
}

ExperimentResult run_experiment(const FeatureCube& cube, const LabelRaster& truth,
                                ExperimentConfig cfg) {
  if (cube.stage != Stage::scaled) {
    throw std::invalid_argument("run_experiment needs a scaled cube");
  }
  if (cube.width != truth.width || cube.height != truth.height) {
    throw DataError("cube and label raster dimensions differ");
  }
  const int classes = truth.max_id();
  if (classes < 2) {
    throw DataError("ground truth needs at least two classes");
  }
  cfg.network.input_channels = static_cast<int>(cube.channels.size());
  cfg.network.num_classes = classes;

  SampleSet samples = sample_training_pixels(truth, cfg.sampling, cfg.sample_seed);
  SampleSet train_set = samples;
  std::vector<cnn::Sample> validation;
  if (cfg.validation_ratio) {
    auto split = split_train_validation(samples, *cfg.validation_ratio, cfg.sample_seed);
    train_set = std::move(split.train);
    validation = build_dataset(cube, split.validation, cfg.network.window);
  }
  const auto dataset = build_dataset(cube, train_set, cfg.network.window);

  auto net = cnn::init_weights(cfg.network);
  net.channel_names = cube.channel_names();
  net.scaling = cube.scaling;
  auto trained = cnn::train(std::move(net), dataset, cfg.training, validation);

  auto classification = classify_image(trained.net, cube, cfg.network.window, cfg.threads);
  const LabelRaster eval_truth =
      cfg.exclude_training_pixels ? exclude_pixels(truth, samples.points) : truth;
  auto cm = confusion_matrix(classification.labels, eval_truth, classes);
  if (truth.class_names.size() == static_cast<std::size_t>(classes)) {
    cm.set_class_names(truth.class_names);
  }
  auto stats = accuracy_stats(cm);
  return {std::move(trained.net), std::move(trained.history), std::move(samples),
          std::move(classification), std::move(cm), std::move(stats)};
}

}  // namespace polsar
