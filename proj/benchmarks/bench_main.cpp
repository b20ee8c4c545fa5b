#include "polsar/cnn.hpp"
#include "polsar/experiment.hpp"
#include "polsar/pipeline.hpp"
#include "polsar/synth.hpp"

#include <benchmark/benchmark.h>

using namespace polsar;

namespace {

cnn::Patch random_patch(int channels, int window) {
  CounterRng rng(7);
  cnn::Patch p(channels, window);
  for (double& v : p.data) {
    v = rng.uniform(-1.0, 1.0);
  }
  return p;
}

void BM_Forward(benchmark::State& state) {
  const int window = static_cast<int>(state.range(0));
  const auto net = cnn::init_weights(cnn::NetworkConfig::compact_default(3, window, 4, 1));
  const auto patch = random_patch(3, window);
  cnn::ForwardTrace trace;
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward(patch, trace));
  }
}
BENCHMARK(BM_Forward)->Arg(7)->Arg(9)->Arg(21);

void BM_ForwardBackward(benchmark::State& state) {
  const int window = static_cast<int>(state.range(0));
  const auto net = cnn::init_weights(cnn::NetworkConfig::compact_default(3, window, 4, 1));
  const auto patch = random_patch(3, window);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cnn::backward(net, patch, 2));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(7)->Arg(9)->Arg(21);

void BM_ForwardBackwardWide(benchmark::State& state) {
  const auto cfg = cnn::NetworkConfig::compact_default(3, 9, 4, 1).scaled(4, 2);
  const auto net = cnn::init_weights(cfg);
  const auto patch = random_patch(3, 9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cnn::backward(net, patch, 2));
  }
}
BENCHMARK(BM_ForwardBackwardWide);

void BM_TrainEpoch(benchmark::State& state) {
  const auto scene = synth::generate_scene(synth::synth4_preset(1, 64), 1);
  const auto cube = prepare_features(scene.coherency, FeatureOptions{});
  const auto samples = sample_training_pixels(scene.labels, SamplingSpec::count(100), 1);
  const auto data = build_dataset(cube, samples, 9);
  const auto net = cnn::init_weights(cnn::NetworkConfig::compact_default(3, 9, 4, 1));
  cnn::TrainConfig cfg;
  cfg.max_iterations = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cnn::train(net, data, cfg));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_ClassifyImage(benchmark::State& state) {
  const auto scene = synth::generate_scene(synth::synth4_preset(1, 64), 1);
  const auto cube = prepare_features(scene.coherency, FeatureOptions{});
  const auto net = cnn::init_weights(cnn::NetworkConfig::compact_default(3, 9, 4, 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(classify_image(net, cube, 9, static_cast<unsigned>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * 64 * 64);
}
BENCHMARK(BM_ClassifyImage)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_GenerateScene(benchmark::State& state) {
  const auto spec = synth::synth4_preset(1, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(synth::generate_scene(spec, 1));
  }
}
BENCHMARK(BM_GenerateScene)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Boxcar(benchmark::State& state) {
  const auto scene = synth::generate_scene(synth::synth4_preset(1, 128), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(boxcar_multilook(scene.coherency, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_Boxcar)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
