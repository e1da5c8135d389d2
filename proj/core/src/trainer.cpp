#include "freqlab/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "freqlab/rng.hpp"

namespace freqlab {

RunRecord train(ToyPredictor& model, const FrequencyDataset& dataset,
                const TrainConfig& config) {
  config.validate();
  if (dataset.role != Role::train)
    throw UsageError("train: dataset role must be train");
  if (dataset.samples.empty()) throw EmptyInputError("train: empty dataset");

  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = dataset.samples.size();
  const std::size_t batches =
      (n + static_cast<std::size_t>(config.batch_size) - 1) /
      static_cast<std::size_t>(config.batch_size);

  OptimizerState opt;
  opt.kind = config.optimizer;
  opt.learning_rate = config.learning_rate;

  RunRecord record;
  record.frequency = dataset.frequency;
  record.width = model.config().width;
  record.seed = config.seed;
  record.epochs = config.epochs;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::int64_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) {
      // Fisher-Yates from a stream keyed (seed, epoch): reproducible and
      // independent of dataset identity.
      Rng rng(Rng::derive(config.seed,
                          {Rng::hash_string("shuffle"),
                           static_cast<std::uint64_t>(epoch)}));
      for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(i)));
        std::swap(order[i], order[j]);
      }
    }
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t lo = b * static_cast<std::size_t>(config.batch_size);
      const std::size_t hi = std::min(n, lo + static_cast<std::size_t>(config.batch_size));
      NodePtr loss;
      try {
        std::vector<NodePtr> losses;
        losses.reserve(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) {
          const TrainingSample& sample = dataset.samples[order[i]];
          std::vector<double> target;
          target.reserve(sample.target.points.size() * 2);
          for (const auto& p : sample.target.points) {
            target.push_back(p[0]);
            target.push_back(p[1]);
          }
          const NodePtr pred = model.forward(sample);
          const int target_dim = static_cast<int>(target.size());
          const NodePtr tgt =
              make_constant(Tensor::from({target_dim}, std::move(target)));
          losses.push_back(mse_loss(pred, tgt));
        }
        loss = losses[0];
        for (std::size_t i = 1; i < losses.size(); ++i)
          loss = add(loss, losses[i]);
        loss = scale(loss, 1.0 / static_cast<double>(losses.size()));
      } catch (const NumericError&) {
        // the forward pass overflowed before the loss could be formed
        throw DivergenceError("training loss is non-finite",
                              static_cast<std::size_t>(step));
      }

      const double loss_value = loss->value[0];
      if (!std::isfinite(loss_value))
        throw DivergenceError("training loss is non-finite",
                              static_cast<std::size_t>(step));
      epoch_loss += loss_value * static_cast<double>(hi - lo);

      backward(loss);
      optimizer_step(opt, model.parameters());
      ++step;
    }
    record.loss_curve.push_back(epoch_loss / static_cast<double>(n));
  }
  record.total_steps = step;
  record.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return record;
}

int iteration_matched_epochs(double f_ref, int epochs_ref, double f_target) {
  if (f_ref <= 0.0 || f_target <= 0.0 || epochs_ref <= 0)
    throw ConfigError("iteration_matched_epochs: arguments must be positive");
  const double matched = f_ref * static_cast<double>(epochs_ref) / f_target;
  return std::max(1, static_cast<int>(std::llround(matched)));
}

MatchedPairResult run_matched_pair(
    const SceneSet& train_scenes, const FrequencyDataset& valset, double f_low,
    double f_high, int epochs_high, const SampleSpec& spec,
    const RenderConfig& render, const NoiseConfig& noise,
    std::uint64_t noise_seed, const ModelConfig& model_config,
    const TrainConfig& train_config) {
  if (!(f_low < f_high))
    throw ConfigError("run_matched_pair: requires f_low < f_high");

  MatchedPairResult result;
  result.epochs_high = epochs_high;
  result.epochs_low = iteration_matched_epochs(f_high, epochs_high, f_low);

  const auto run_one = [&](double f, int epochs, RunRecord& record,
                           MetricResult& metrics) {
    const FrequencyDataset dataset = build_training_set(
        train_scenes, f, spec, render, noise, noise_seed);
    ModelConfig mc = model_config;
    ToyPredictor model(mc);
    TrainConfig tc = train_config;
    tc.epochs = epochs;
    record = train(model, dataset, tc);
    metrics = evaluate(model, valset);
  };
  run_one(f_high, result.epochs_high, result.high_run, result.high_metrics);
  run_one(f_low, result.epochs_low, result.low_run, result.low_metrics);
  result.delta_ade_pct = (result.low_metrics.ade - result.high_metrics.ade) /
                         result.high_metrics.ade * 100.0;
  return result;
}

}  // namespace freqlab
