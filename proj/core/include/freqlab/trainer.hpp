#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "freqlab/evaluator.hpp"
#include "freqlab/model.hpp"
#include "freqlab/subsample.hpp"

namespace freqlab {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 3;
  std::uint64_t seed = 0;
  OptKind optimizer = OptKind::adam;
  bool shuffle = true;

  void validate() const {
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
  }
};

struct RunRecord {
  double frequency = 0.0;
  int width = 0;
  std::uint64_t seed = 0;
  int epochs = 0;
  std::int64_t total_steps = 0;
  std::vector<double> loss_curve;  // per-epoch mean loss
  double wall_time = 0.0;          // seconds
  std::string checkpoint;          // optional path
};

// Minibatch MSE training. Deterministic given (model seed, config.seed,
// dataset); a non-finite loss aborts with DivergenceError.
RunRecord train(ToyPredictor& model, const FrequencyDataset& dataset,
                const TrainConfig& config);

// Table-style scheduling rule: round(f_ref * epochs_ref / f_target), min 1.
int iteration_matched_epochs(double f_ref, int epochs_ref, double f_target);

struct MatchedPairResult {
  RunRecord low_run, high_run;
  MetricResult low_metrics, high_metrics;
  int epochs_low = 0, epochs_high = 0;
  double delta_ade_pct = 0.0;  // (low - high) / high * 100
};

// Trains at f_high for epochs_high and at f_low for the iteration-matched
// epoch count, evaluating both on the shared validation set.
MatchedPairResult run_matched_pair(
    const SceneSet& train_scenes, const FrequencyDataset& valset, double f_low,
    double f_high, int epochs_high, const SampleSpec& spec,
    const RenderConfig& render, const NoiseConfig& noise,
    std::uint64_t noise_seed, const ModelConfig& model_config,
    const TrainConfig& train_config);

}  // namespace freqlab
