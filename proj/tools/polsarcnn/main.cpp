// polsarcnn: feature extraction, training, classification and evaluation of
// PolSAR land-cover maps with a compact CNN.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 training divergence.

#include "commands.hpp"

#include "polsar/error.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace polsar::tools;

void add_network_options(CLI::App* app, NetworkOptions& n) {
  app->add_option("--window", n.window, "Patch side N (odd)")->capture_default_str();
  app->add_option("--cnn", n.cnn, "CNN layers, e.g. 20x3x3s2 or 20x3x3s2,20x3x3s1")
      ->capture_default_str();
  app->add_option("--mlp", n.mlp, "Hidden MLP layer sizes, e.g. 10 or 16,8 (empty for none)")
      ->capture_default_str();
  app->add_option("--m", n.width_mult, "Neuron-count multiplier for hidden layers")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--n", n.depth_mult, "Repeat the CNN layer stack n times")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--activation", n.activation, "tanh, or identity for testing")
      ->capture_default_str()
      ->check(CLI::IsMember({"tanh", "identity"}))
      ->group("");
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

// Splices `key = value` lines of a subcommand's --config file in front of its
// command-line arguments; the later command-line values win.
std::vector<std::string> expand_config(const CLI::App& app, int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const CLI::App* sub = nullptr;
  std::size_t sub_pos = 0;
  for (std::size_t i = 0; i < args.size() && sub == nullptr; ++i) {
    for (const auto* candidate : app.get_subcommands({})) {
      if (candidate->get_name() == args[i]) {
        sub = candidate;
        sub_pos = i;
      }
    }
  }
  if (sub == nullptr) {
    return args;
  }
  std::string path;
  for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) {
    return args;
  }
  std::ifstream in(path);
  if (!in) {
    throw CLI::FileError::Missing(path);
  }
  std::vector<std::string> injected;
  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const auto line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ConversionError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    const auto* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw CLI::ExtrasError(path + ": unknown key '" + key + "' for " + sub->get_name(),
                             CLI::ExitCodes::ExtrasError);
    }
    if (opt->get_expected_min() == 0) {
      if (CLI::detail::to_flag_value(value) > 0) {
        injected.push_back("--" + key);
      }
    } else {
      injected.push_back("--" + key + "=" + value);
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, injected.begin(),
              injected.end());
  return args;
}

void print_resolved(const CLI::App* sub) {
  std::cerr << "# resolved configuration: " << sub->get_name() << '\n'
            << sub->config_to_str(true, false);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compact-CNN PolSAR land-cover classification"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", "polsarcnn 0.1.0");

  std::function<int()> action;
  CLI::App* chosen = nullptr;
  auto subcommand = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", "Read options from a key = value file; flags take precedence");
    return sub;
  };

  ExtractOptions ex;
  auto* extract = subcommand("extract-features", "Build a feature cube from a scattering or coherency image");
  extract->add_option("--input", ex.input, "Scattering or coherency (T) image cube")->required();
  extract->add_option("--channels", ex.channels, "T3, T3_SPAN or T3_C3")
      ->capture_default_str()
      ->check(CLI::IsMember({"T3", "T3_SPAN", "T3_C3"}));
  extract->add_option("--boxcar", ex.boxcar, "Boxcar multilook window (odd, 0 = off)")
      ->capture_default_str();
  extract->add_option("--db-floor", ex.db_floor, "Intensity floor before the dB transform")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  extract->add_option("--stage", ex.stage, "Output stage: linear, db or scaled")
      ->capture_default_str()
      ->check(CLI::IsMember({"linear", "db", "scaled"}));
  extract->add_option("--out", ex.out, "Output cube")->required();
  extract->add_option("--pauli-rgb", ex.pauli_rgb, "Optional Pauli RGB preview (PPM)");
  extract->callback([&] { action = [&] { return run_extract(ex); }; chosen = extract; });

  TrainOptions tr;
  auto* train = subcommand("train", "Train a compact CNN on sampled labeled pixels");
  train->add_option("--cube", tr.cube, "Feature cube")->required();
  train->add_option("--labels", tr.labels, "Ground-truth PGM")->required();
  auto* per_class = train->add_option("--per-class", tr.per_class, "Training pixels per class (default 500)");
  train->add_option("--fraction", tr.fraction, "Fraction of each class, rounded up")
      ->excludes(per_class);
  train->add_flag("--clamp", tr.clamp, "Take all pixels of classes smaller than requested");
  add_network_options(train, tr.network);
  train->add_option("--classes", tr.classes, "Class count K (default: max label id)");
  train->add_option("--max-iters", tr.max_iters, "Training epochs")->capture_default_str();
  train->add_option("--lr", tr.lr, "Initial learning rate")->capture_default_str();
  train->add_option("--lr-up", tr.lr_up, "Factor after an improving epoch")->capture_default_str();
  train->add_option("--lr-down", tr.lr_down, "Factor after a non-improving epoch")->capture_default_str();
  train->add_option("--seed", tr.seed, "Seed for sampling, initialization and shuffling")
      ->capture_default_str();
  train->add_option("--val-split", tr.val_split, "Fraction of samples held out for validation");
  train->add_option("--restarts", tr.restarts, "Retry with seed+1, ... after divergence")
      ->capture_default_str();
  train->add_option("--out", tr.out, "Output model")->required();
  train->add_option("--history", tr.history, "Per-epoch CSV");
  train->add_option("--samples-out", tr.samples_out, "CSV of sampled training pixels");
  train->callback([&] { action = [&] { return run_train(tr); }; chosen = train; });

  ClassifyOptions cl;
  auto* classify = subcommand("classify", "Classify every pixel of a cube");
  classify->add_option("--model", cl.model, "Trained model")->required();
  classify->add_option("--cube", cl.cube, "Feature cube (any stage)")->required();
  classify->add_option("--out-labels", cl.out_labels, "Predicted labels (PGM)");
  classify->add_option("--out-mask", cl.out_mask, "Colour mask (PPM)");
  classify->add_option("--palette", cl.palette, "Palette file, lines 'id r g b'");
  classify->add_option("--threads", cl.threads, "Worker threads (0 = hardware)")->capture_default_str();
  classify->callback([&] { action = [&] { return run_classify(cl); }; chosen = classify; });

  EvaluateOptions ev;
  bool include_train = false;
  auto* evaluate = subcommand("evaluate", "Confusion matrix and accuracies");
  evaluate->add_option("--pred", ev.pred, "Predicted labels")->required();
  evaluate->add_option("--truth", ev.truth, "Ground truth")->required();
  evaluate->add_option("--classes", ev.classes, "Class count K");
  evaluate->add_option("--remap", ev.remap, "Remap file applied to the truth");
  evaluate->add_option("--remap-pred", ev.remap_pred, "Remap file applied to the prediction");
  evaluate->add_option("--exclude-train", ev.exclude_train, "Training samples CSV to leave out");
  evaluate->add_flag("--include-train-pixels", include_train, "Keep training pixels in the tally");
  evaluate->add_option("--class-names", ev.class_names, "Comma-separated class names");
  evaluate->add_option("--out", ev.out, "Metrics CSV");
  evaluate->callback([&] { action = [&] { return run_evaluate(ev, include_train); }; chosen = evaluate; });

  SynthOptions sy;
  auto* synth = subcommand("synth", "Generate a synthetic multilook scene");
  auto* preset = synth->add_option("--preset", sy.preset, "Named scene (synth4)");
  synth->add_option("--spec", sy.spec, "Scene description file")->excludes(preset);
  synth->add_option("--size", sy.size, "Preset side length")->capture_default_str();
  synth->add_option("--seed", sy.seed, "Seed (default 1 for presets, file value for --spec)");
  synth->add_option("--out-cube", sy.out_cube, "Coherency image cube")->required();
  synth->add_option("--out-labels", sy.out_labels, "Label PGM")->required();
  synth->add_option("--threads", sy.threads, "Worker threads (0 = hardware)")->capture_default_str();
  synth->callback([&] {
    if (sy.preset.empty() && sy.spec.empty()) {
      throw CLI::ValidationError("synth", "one of --preset or --spec is required");
    }
    action = [&] { return run_synth(sy); };
    chosen = synth;
  });

  GradcheckOptions gc;
  auto* gradcheck = subcommand("gradcheck", "Compare back-propagation with finite differences");
  add_network_options(gradcheck, gc.network);
  gradcheck->add_option("--channels", gc.channels, "Input channels")->capture_default_str();
  gradcheck->add_option("--classes", gc.classes, "Class count")->capture_default_str();
  gradcheck->add_option("--seed", gc.seed, "First seed")->capture_default_str();
  gradcheck->add_option("--seeds", gc.seeds, "Number of random instances")->capture_default_str();
  gradcheck->add_option("--step", gc.step, "Central-difference step")->capture_default_str();
  gradcheck->add_option("--tolerance", gc.tolerance, "Pass threshold")->capture_default_str();
  gradcheck->callback([&] { action = [&] { return run_gradcheck(gc); }; chosen = gradcheck; });

  SweepOptions sw;
  auto* sweep = subcommand("sweep", "Channel-set and window-size sweep on one site");
  sweep->add_option("--input", sw.input, "Scattering or coherency image cube")->required();
  sweep->add_option("--labels", sw.labels, "Ground truth")->required();
  sweep->add_option("--channel-sets", sw.channel_sets, "Comma-separated channel sets")
      ->capture_default_str();
  sweep->add_option("--windows", sw.windows, "Comma-separated window sizes")->capture_default_str();
  sweep->add_option("--boxcar", sw.boxcar, "Boxcar multilook window (odd, 0 = off)")
      ->capture_default_str();
  auto* sweep_per_class = sweep->add_option("--per-class", sw.per_class, "Training pixels per class");
  sweep->add_option("--fraction", sw.fraction, "Fraction of each class")->excludes(sweep_per_class);
  sweep->add_flag("--clamp", sw.clamp, "Take all pixels of classes smaller than requested");
  add_network_options(sweep, sw.network);
  sweep->add_option("--max-iters", sw.max_iters, "Training epochs")->capture_default_str();
  sweep->add_option("--seed", sw.seed, "Seed")->capture_default_str();
  sweep->add_flag("--include-train-pixels", sw.include_train, "Keep training pixels in the tally");
  sweep->add_option("--reference-oa", sw.reference_oa, "Reference overall accuracy to compare against (0..1)");
  sweep->add_option("--out", sw.out, "Results CSV");
  sweep->callback([&] { action = [&] { return run_sweep(sw); }; chosen = sweep; });

  try {
    auto args = expand_config(app, argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    print_resolved(chosen);
    return action();
  } catch (const polsar::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const polsar::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
