#include "commands.hpp"

#include "polsar/error.hpp"
#include "polsar/experiment.hpp"
#include "polsar/io.hpp"
#include "polsar/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace polsar::tools {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot open '" + path + "' for writing");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::istringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) {
      items.push_back(item);
    }
  }
  return items;
}

HermitianImage load_coherency(const std::string& path) {
  const auto cube = io::read_cube(path);
  switch (io::detect_kind(cube)) {
    case io::CubeKind::hermitian:
      if (cube.channels.front().name.front() != 'T') {
        throw DataError("'" + path + "' holds a covariance (C) image; a coherency (T) image is required");
      }
      return io::cube_to_hermitian(cube);
    case io::CubeKind::scattering:
      return build_hermitian_image(io::cube_to_scattering(cube), Basis::pauli);
    case io::CubeKind::features:
      break;
  }
  throw DataError("'" + path + "' is a feature cube; expected a scattering or coherency image");
}

FeatureCube to_scaled(const FeatureCube& cube) {
  if (io::detect_kind(cube) != io::CubeKind::features) {
    throw DataError("cube holds a scattering or coherency image; run extract-features first");
  }
  switch (cube.stage) {
    case Stage::scaled:
      return cube;
    case Stage::db:
      return scale_to_unit(cube);
    case Stage::linear:
      return scale_to_unit(db_transform(cube));
  }
  return cube;
}

SamplingSpec sampling_spec(const std::optional<int>& per_class,
                           const std::optional<double>& fraction, bool clamp) {
  SamplingSpec spec;
  spec.per_class = per_class;
  spec.fraction = fraction;
  spec.clamp_to_available = clamp;
  if (!per_class && !fraction) {
    spec.per_class = 500;
  }
  spec.validate();
  return spec;
}

cnn::NetworkConfig network_config(const NetworkOptions& o, int channels, int classes,
                                  std::uint64_t seed) {
  cnn::NetworkConfig cfg;
  cfg.input_channels = channels;
  cfg.window = o.window;
  cfg.cnn_layers = io::parse_cnn_layers(o.cnn);
  cfg.mlp_layers = io::parse_mlp_layers(o.mlp);
  cfg.num_classes = classes;
  cfg.seed = seed;
  cfg.activation = o.activation == "identity" ? cnn::Activation::identity : cnn::Activation::tanh;
  cfg = cfg.scaled(o.width_mult, o.depth_mult);
  cfg.validate();
  return cfg;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) {
    std::cerr << "warning: " << w << '\n';
  }
}

}  // namespace

int run_extract(const ExtractOptions& o) {
  const auto coherency = load_coherency(o.input);
  FeatureOptions fo;
  fo.channels = parse_channel_set(o.channels);
  fo.boxcar = o.boxcar;
  fo.db_floor = o.db_floor;
  if (o.boxcar != 0 && (o.boxcar < 1 || o.boxcar % 2 == 0)) {
    throw std::invalid_argument("--boxcar must be 0 or an odd window size");
  }
  FeatureCube cube = linear_features(coherency, fo);
  if (o.stage == "db" || o.stage == "scaled") {
    cube = db_transform(cube, o.db_floor);
  }
  if (o.stage == "scaled") {
    cube = scale_to_unit(cube);
  }
  io::write_cube(cube, o.out);
  std::cout << "wrote " << o.out << ": " << cube.width << "x" << cube.height << ", channels";
  for (const auto& name : cube.channel_names()) {
    std::cout << ' ' << name;
  }
  std::cout << ", stage " << to_string(cube.stage) << '\n';
  if (!o.pauli_rgb.empty()) {
    io::write_ppm(pauli_rgb(coherency), o.pauli_rgb);
    std::cout << "wrote " << o.pauli_rgb << '\n';
  }
  return 0;
}

int run_train(const TrainOptions& o) {
  const FeatureCube cube = to_scaled(io::read_cube(o.cube));
  const LabelRaster labels = io::read_labels(o.labels);
  if (labels.width != cube.width || labels.height != cube.height) {
    throw DataError("label raster is " + std::to_string(labels.width) + "x" +
                    std::to_string(labels.height) + " but the cube is " +
                    std::to_string(cube.width) + "x" + std::to_string(cube.height));
  }
  const int classes = o.classes.value_or(labels.max_id());
  if (classes < labels.max_id()) {
    throw DataError("labels use class id " + std::to_string(labels.max_id()) +
                    " but --classes is " + std::to_string(classes));
  }

  const auto spec = sampling_spec(o.per_class, o.fraction, o.clamp);
  SampleSet samples = sample_training_pixels(labels, spec, o.seed);
  print_warnings(samples.warnings);
  SampleSet train_set = samples;
  std::vector<cnn::Sample> validation;
  if (o.val_split) {
    auto split = split_train_validation(samples, *o.val_split, o.seed);
    print_warnings(split.warnings);
    train_set = std::move(split.train);
    validation = build_dataset(cube, split.validation, o.network.window);
  }
  const auto dataset = build_dataset(cube, train_set, o.network.window);
  std::cerr << "training on " << dataset.size() << " samples";
  if (!validation.empty()) {
    std::cerr << ", validating on " << validation.size();
  }
  std::cerr << '\n';

  cnn::TrainConfig tc;
  tc.max_iterations = o.max_iters;
  tc.initial_lr = o.lr;
  tc.lr_up = o.lr_up;
  tc.lr_down = o.lr_down;

  if (o.restarts < 1) {
    throw std::invalid_argument("--restarts must be >= 1");
  }
  std::optional<cnn::TrainResult> result;
  for (int attempt = 0; attempt < o.restarts && !result; ++attempt) {
    const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(attempt);
    auto net = cnn::init_weights(network_config(o.network, static_cast<int>(cube.channels.size()),
                                                classes, seed));
    net.channel_names = cube.channel_names();
    net.scaling = cube.scaling;
    tc.shuffle_seed = seed;
    try {
      result = cnn::train(std::move(net), dataset, tc, validation);
    } catch (const DivergenceError& e) {
      std::cerr << "attempt " << attempt + 1 << " with seed " << seed << ": " << e.what() << '\n';
      if (attempt + 1 == o.restarts) {
        throw;
      }
    }
  }

  io::save_model(result->net, o.out);
  const auto& h = result->history;
  std::cout << "epochs " << h.final_epoch << ", final train MSE "
            << (h.epochs.empty() ? h.initial_mse : h.epochs.back().train_mse);
  if (!h.epochs.empty() && h.epochs.back().validation_accuracy) {
    std::cout << ", validation accuracy "
              << format_percent(h.epochs.back().validation_accuracy);
  }
  std::cout << ", training accuracy " << format_percent(cnn::accuracy(result->net, dataset))
            << "\nwrote " << o.out << '\n';
  if (!o.history.empty()) {
    auto out = open_out(o.history);
    io::write_history_csv(h, out);
  }
  if (!o.samples_out.empty()) {
    auto out = open_out(o.samples_out);
    io::write_samples_csv(samples.points, out);
  }
  return 0;
}

int run_classify(const ClassifyOptions& o) {
  const auto net = io::load_model(o.model);
  FeatureCube cube = io::read_cube(o.cube);
  if (!net.scaling.empty() && !(cube.stage == Stage::scaled && cube.scaling == net.scaling)) {
    // Map the scene onto the training site's scaling.
    if (cube.stage == Stage::scaled) {
      cube = unscale(cube);
    } else if (cube.stage == Stage::linear) {
      cube = db_transform(cube);
    }
    cube = apply_scaling(cube, net.scaling);
  } else if (cube.stage != Stage::scaled) {
    cube = to_scaled(cube);
  }
  const auto result = classify_image(net, cube, net.config().window, o.threads);
  if (!o.out_labels.empty()) {
    io::write_labels(result.labels, o.out_labels);
    std::cout << "wrote " << o.out_labels << '\n';
  }
  if (!o.out_mask.empty()) {
    const auto palette =
        o.palette.empty() ? io::default_palette(net.config().num_classes) : io::read_palette(o.palette);
    io::write_mask(result.labels, palette, o.out_mask);
    std::cout << "wrote " << o.out_mask << '\n';
  }
  const auto hist = result.labels.histogram();
  for (std::size_t c = 1; c < hist.size(); ++c) {
    std::cout << "class " << c << ": " << hist[c] << " pixels\n";
  }
  return 0;
}

int run_evaluate(const EvaluateOptions& o, bool include_train_pixels) {
  LabelRaster pred = io::read_labels(o.pred);
  LabelRaster truth = io::read_labels(o.truth);
  if (pred.width != truth.width || pred.height != truth.height) {
    throw DataError("prediction and truth rasters differ in size");
  }
  if (!o.remap.empty()) {
    truth = cross_site_remap(truth, io::read_remap(o.remap));
  }
  if (!o.remap_pred.empty()) {
    pred = cross_site_remap(pred, io::read_remap(o.remap_pred));
  }
  if (!o.exclude_train.empty() && !include_train_pixels) {
    const auto points = io::read_samples_csv(o.exclude_train);
    truth = exclude_pixels(truth, points);
    std::cerr << "excluded " << points.size() << " training pixels\n";
  }
  const int classes = o.classes.value_or(std::max(pred.max_id(), truth.max_id()));
  auto cm = confusion_matrix(pred, truth, classes);
  if (!o.class_names.empty()) {
    cm.set_class_names(split_list(o.class_names));
  }
  const auto stats = accuracy_stats(cm);
  io::print_metrics(cm, stats, std::cout);
  if (!o.out.empty()) {
    auto out = open_out(o.out);
    io::write_metrics_csv(cm, stats, out);
  }
  return 0;
}

int run_synth(const SynthOptions& o) {
  synth::SceneSpec spec;
  if (!o.spec.empty()) {
    spec = io::read_scene_spec(o.spec);
    if (o.seed) {
      spec.seed = *o.seed;
    }
  } else if (o.preset == "synth4") {
    spec = synth::synth4_preset(o.seed.value_or(1), o.size);
  } else {
    throw std::invalid_argument("unknown preset '" + o.preset + "' (available: synth4)");
  }
  const auto scene = synth::generate_scene(spec, o.threads);
  io::write_cube(io::hermitian_to_cube(scene.coherency), o.out_cube);
  io::write_labels(scene.labels, o.out_labels);
  const auto hist = scene.labels.histogram();
  std::cout << "wrote " << o.out_cube << " and " << o.out_labels << " (" << spec.width << "x"
            << spec.height << ", " << spec.looks << " looks, seed " << spec.seed << ")\n";
  for (std::size_t c = 1; c < hist.size(); ++c) {
    std::cout << "class " << c << ": " << hist[c] << " pixels\n";
  }
  return 0;
}

int run_gradcheck(const GradcheckOptions& o) {
  const auto cfg = network_config(o.network, o.channels, o.classes, o.seed);
  if (o.seeds < 1) {
    throw std::invalid_argument("--seeds must be >= 1");
  }
  double worst = 0.0;
  for (int s = 0; s < o.seeds; ++s) {
    const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(s);
    const auto c = cnn::random_gradient_case(cfg, seed);
    const auto report = cnn::gradient_check(c.net, c.patch, c.target_class, o.step);
    std::printf("seed %llu: %zu parameters, max relative error %.3e (parameter %zu: analytic %.9g, "
                "numeric %.9g)\n",
                static_cast<unsigned long long>(seed), report.parameter_count,
                report.max_relative_error, report.worst_parameter, report.worst_analytic,
                report.worst_numeric);
    worst = std::max(worst, report.max_relative_error);
  }
  const bool ok = worst < o.tolerance;
  std::printf("max relative error %.3e (tolerance %.1e): %s\n", worst, o.tolerance,
              ok ? "PASS" : "FAIL");
  return ok ? 0 : 2;
}

int run_sweep(const SweepOptions& o) {
  const auto coherency = load_coherency(o.input);
  const LabelRaster truth = io::read_labels(o.labels);
  std::ofstream csv;
  if (!o.out.empty()) {
    csv = open_out(o.out);
    csv << "channels,window,overall_accuracy,train_samples,evaluated_pixels,final_train_mse\n";
  }
  std::printf("%-8s %6s %10s\n", "channels", "window", "OA");
  for (const auto& set_name : split_list(o.channel_sets)) {
    FeatureOptions fo;
    fo.channels = parse_channel_set(set_name);
    fo.boxcar = o.boxcar;
    const auto cube = prepare_features(coherency, fo);
    for (const auto& w : split_list(o.windows)) {
      ExperimentConfig cfg;
      cfg.network = network_config(o.network, static_cast<int>(cube.channels.size()),
                                   std::max(2, truth.max_id()), o.seed);
      cfg.network.window = std::stoi(w);
      cfg.network.validate();
      cfg.training.max_iterations = o.max_iters;
      cfg.training.shuffle_seed = o.seed;
      cfg.sampling = sampling_spec(o.per_class, o.fraction, o.clamp);
      cfg.sample_seed = o.seed;
      cfg.exclude_training_pixels = !o.include_train;
      const auto r = run_experiment(cube, truth, cfg);
      print_warnings(r.samples.warnings);
      std::printf("%-8s %6d %10s\n", set_name.c_str(), cfg.network.window,
                  format_percent(r.stats.overall).c_str());
      if (csv.is_open()) {
        csv << set_name << ',' << cfg.network.window << ',' << r.stats.overall << ','
            << r.samples.points.size() << ',' << r.stats.total << ','
            << r.history.epochs.back().train_mse << '\n';
      }
      if (o.reference_oa) {
        std::printf("  reference OA %.2f%%, difference %+.2f points\n", *o.reference_oa * 100.0,
                    (r.stats.overall - *o.reference_oa) * 100.0);
      }
    }
  }
  return 0;
}

}  // namespace polsar::tools
