#include <benchmark/benchmark.h>

#include "freqlab/experiment.hpp"

using namespace freqlab;

namespace {

Scene bench_scene() {
  WorldConfig config;
  config.scene_duration = 12.0;
  config.seed = 7;
  return generate_scene(7, config);
}

TrainingSample bench_sample(int image_size) {
  WorldConfig world;
  world.scene_duration = 12.0;
  world.seed = 7;
  SceneSet set;
  set.scenes.push_back(generate_scene(7, world));
  set.role = Role::train;
  RenderConfig render;
  render.image_size = image_size;
  const auto dataset =
      build_training_set(set, 10.0, SampleSpec{}, render, NoiseConfig{}, 3);
  return dataset.samples.front();
}

void BM_SampleTimestamps(benchmark::State& state) {
  const Scene scene = bench_scene();
  const double f = static_cast<double>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_timestamps(scene.native_timestamps, f));
}
BENCHMARK(BM_SampleTimestamps)->Arg(2)->Arg(10);

void BM_Rasterize(benchmark::State& state) {
  const Scene scene = bench_scene();
  RenderConfig render;
  render.image_size = static_cast<int>(state.range(0));
  render.meters_per_pixel = 32.0 / render.image_size;
  for (auto _ : state)
    benchmark::DoNotOptimize(rasterize(scene, 2.0, render));
}
BENCHMARK(BM_Rasterize)->Arg(32)->Arg(64);

void BM_TemporalStack(benchmark::State& state) {
  const Scene scene = bench_scene();
  RenderConfig render;
  NoiseConfig noise;
  SampleSpec spec;
  Rng rng(5);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        temporal_stack(scene, 2.0, spec, render, noise, rng));
}
BENCHMARK(BM_TemporalStack);

void BM_ModelForward(benchmark::State& state) {
  const TrainingSample sample = bench_sample(32);
  ModelConfig mc;
  mc.width = static_cast<int>(state.range(0));
  mc.image_size = 32;
  mc.input_channels = 6;
  mc.history_dim = 55;
  mc.num_waypoints = 6;
  const ToyPredictor model(mc);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(sample));
}
BENCHMARK(BM_ModelForward)->Arg(4)->Arg(16);

void BM_TrainStep(benchmark::State& state) {
  const TrainingSample sample = bench_sample(32);
  ModelConfig mc;
  mc.width = static_cast<int>(state.range(0));
  mc.image_size = 32;
  mc.input_channels = 6;
  mc.history_dim = 55;
  mc.num_waypoints = 6;
  ToyPredictor model(mc);
  FrequencyDataset dataset;
  dataset.frequency = 10.0;
  dataset.role = Role::train;
  for (int i = 0; i < 8; ++i) dataset.samples.push_back(sample);
  TrainConfig tc;
  tc.batch_size = 8;
  tc.epochs = 1;
  tc.shuffle = false;
  for (auto _ : state) benchmark::DoNotOptimize(train(model, dataset, tc));
}
BENCHMARK(BM_TrainStep)->Arg(4)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
