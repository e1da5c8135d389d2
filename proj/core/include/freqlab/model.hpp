#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "freqlab/subsample.hpp"
#include "freqlab/tensor.hpp"

namespace freqlab {

struct ModelConfig {
  int width = 16;          // CNN trunk channel width W
  int image_size = 32;     // pixels per side of each BEV frame
  int input_channels = 6;  // stacked channels (frames * planes)
  int history_dim = 0;     // flattened ego history length, without command
  int num_waypoints = 6;
  std::uint64_t seed = 0;

  void validate() const;
};

// Width-parameterized temporal CNN+MLP predictor.
//
// CNN trunk: 4 blocks of [3x3 conv, stride 2, relu] with channel widths
// (W, 2W, 4W, 4W), then flatten. MLP branch: (history + one-hot command) ->
// 2W -> 2W with relu. Fusion: concat -> 4W -> 2 * num_waypoints.
// Waypoints are absolute ego-frame offsets.
class ToyPredictor {
 public:
  explicit ToyPredictor(const ModelConfig& config);

  // Builds the forward graph on the persistent parameter nodes.
  NodePtr forward(const Tensor& bev, const std::vector<double>& history,
                  Command command) const;
  NodePtr forward(const TrainingSample& sample) const;

  // Value-only convenience; output shape (num_waypoints, 2).
  Tensor predict(const TrainingSample& sample) const;
  Waypoints predict_waypoints(const TrainingSample& sample) const;

  std::size_t param_count() const;
  const std::vector<NodePtr>& parameters() const { return params_; }
  std::vector<NodePtr>& parameters() { return params_; }
  const ModelConfig& config() const { return config_; }

  std::vector<NamedTensor> state() const;
  void load_state(const std::vector<NamedTensor>& state);

 private:
  NodePtr param(const std::string& name, std::vector<int> shape, int fan_in,
                Rng& rng);

  ModelConfig config_;
  std::vector<NodePtr> params_;
  std::vector<std::string> param_names_;
  // Indexed layer handles into params_.
  std::vector<std::array<int, 2>> conv_layers_;  // (weight idx, bias idx)
  std::vector<std::array<int, 2>> mlp_layers_;
  std::vector<std::array<int, 2>> head_layers_;
};

}  // namespace freqlab
