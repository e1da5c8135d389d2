#include "freqlab/model.hpp"

#include <array>
#include <cmath>

namespace freqlab {

void ModelConfig::validate() const {
  if (width < 1) throw ConfigError("model width must be >= 1");
  if (num_waypoints < 1) throw ConfigError("num_waypoints must be >= 1");
  if (image_size < 1 || input_channels < 1 || history_dim < 0)
    throw ConfigError("invalid model config");
}

namespace {

constexpr int kNumConvBlocks = 4;
constexpr int kKernel = 3;
constexpr int kStride = 2;
constexpr int kCommandDim = 3;

int conv_out(int in) { return (in - kKernel) / kStride + 1; }

std::vector<int> trunk_channels(int w) { return {w, 2 * w, 4 * w, 4 * w}; }

}  // namespace

NodePtr ToyPredictor::param(const std::string& name, std::vector<int> shape,
                            int fan_in, Rng& rng) {
  Tensor t(shape);
  if (fan_in > 0) {
    const double bound = std::sqrt(6.0 / fan_in);
    for (double& v : t.data) v = rng.uniform(-bound, bound);
  }
  NodePtr node = make_parameter(std::move(t));
  params_.push_back(node);
  param_names_.push_back(name);
  return node;
}

ToyPredictor::ToyPredictor(const ModelConfig& config) : config_(config) {
  config_.validate();
  Rng rng(Rng::derive(config_.seed, {Rng::hash_string("toy_predictor")}));

  int spatial = config_.image_size;
  int in_ch = config_.input_channels;
  const std::vector<int> widths = trunk_channels(config_.width);
  for (int i = 0; i < kNumConvBlocks; ++i) {
    if (spatial < kKernel)
      throw ConfigError("image too small for the conv stack");
    const std::string tag = "conv" + std::to_string(i);
    param(tag + ".w", {widths[static_cast<std::size_t>(i)], in_ch, kKernel, kKernel},
          in_ch * kKernel * kKernel, rng);
    param(tag + ".b", {widths[static_cast<std::size_t>(i)]}, 0, rng);
    conv_layers_.push_back({static_cast<int>(params_.size()) - 2,
                            static_cast<int>(params_.size()) - 1});
    spatial = conv_out(spatial);
    in_ch = widths[static_cast<std::size_t>(i)];
  }
  const int cnn_dim = in_ch * spatial * spatial;

  const int mlp_in = config_.history_dim + kCommandDim;
  const int hidden = 2 * config_.width;
  const std::array<std::array<int, 2>, 2> mlp_dims = {
      {{hidden, mlp_in}, {hidden, hidden}}};
  for (std::size_t i = 0; i < mlp_dims.size(); ++i) {
    const std::string tag = "mlp" + std::to_string(i);
    param(tag + ".w", {mlp_dims[i][0], mlp_dims[i][1]}, mlp_dims[i][1], rng);
    param(tag + ".b", {mlp_dims[i][0]}, 0, rng);
    mlp_layers_.push_back({static_cast<int>(params_.size()) - 2,
                           static_cast<int>(params_.size()) - 1});
  }

  const int fused_dim = cnn_dim + hidden;
  const int head_hidden = 4 * config_.width;
  const int out_dim = 2 * config_.num_waypoints;
  const std::array<std::array<int, 2>, 2> head_dims = {
      {{head_hidden, fused_dim}, {out_dim, head_hidden}}};
  for (std::size_t i = 0; i < head_dims.size(); ++i) {
    const std::string tag = "head" + std::to_string(i);
    param(tag + ".w", {head_dims[i][0], head_dims[i][1]}, head_dims[i][1], rng);
    param(tag + ".b", {head_dims[i][0]}, 0, rng);
    head_layers_.push_back({static_cast<int>(params_.size()) - 2,
                            static_cast<int>(params_.size()) - 1});
  }
}

NodePtr ToyPredictor::forward(const Tensor& bev,
                              const std::vector<double>& history,
                              Command command) const {
  if (bev.ndim() != 3 || bev.dim(0) != config_.input_channels ||
      bev.dim(1) != config_.image_size || bev.dim(2) != config_.image_size)
    throw ShapeError("forward: BEV input shape mismatch");
  if (static_cast<int>(history.size()) != config_.history_dim)
    throw ShapeError("forward: history length mismatch");

  NodePtr x = make_constant(bev);
  for (const auto& [wi, bi] : conv_layers_) {
    x = relu(conv2d(x, params_[static_cast<std::size_t>(wi)],
                    params_[static_cast<std::size_t>(bi)], kStride));
  }
  x = flatten(x);

  std::vector<double> mlp_in = history;
  mlp_in.resize(history.size() + kCommandDim, 0.0);
  mlp_in[history.size() + static_cast<std::size_t>(command)] = 1.0;
  const int mlp_in_dim = static_cast<int>(mlp_in.size());
  NodePtr h = make_constant(Tensor::from({mlp_in_dim}, std::move(mlp_in)));
  for (const auto& [wi, bi] : mlp_layers_) {
    h = relu(affine(h, params_[static_cast<std::size_t>(wi)],
                    params_[static_cast<std::size_t>(bi)]));
  }

  NodePtr fused = concat({x, h}, 0);
  fused = relu(affine(fused, params_[static_cast<std::size_t>(head_layers_[0][0])],
                      params_[static_cast<std::size_t>(head_layers_[0][1])]));
  return affine(fused, params_[static_cast<std::size_t>(head_layers_[1][0])],
                params_[static_cast<std::size_t>(head_layers_[1][1])]);
}

NodePtr ToyPredictor::forward(const TrainingSample& sample) const {
  return forward(sample.bev, sample.history, sample.command);
}

Tensor ToyPredictor::predict(const TrainingSample& sample) const {
  const NodePtr out = forward(sample);
  return Tensor::from({config_.num_waypoints, 2}, out->value.data);
}

Waypoints ToyPredictor::predict_waypoints(const TrainingSample& sample) const {
  const Tensor out = predict(sample);
  Waypoints wp;
  wp.spacing = sample.target.spacing;
  wp.horizon = sample.target.horizon;
  for (int k = 0; k < config_.num_waypoints; ++k)
    wp.points.push_back({out[2 * k], out[2 * k + 1]});
  return wp;
}

std::size_t ToyPredictor::param_count() const {
  std::size_t count = 0;
  for (const auto& p : params_) count += p->value.data.size();
  return count;
}

std::vector<NamedTensor> ToyPredictor::state() const {
  std::vector<NamedTensor> out;
  out.reserve(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i)
    out.push_back({param_names_[i], params_[i]->value});
  return out;
}

void ToyPredictor::load_state(const std::vector<NamedTensor>& state) {
  if (state.size() != params_.size())
    throw UsageError("load_state: parameter count mismatch");
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i].name != param_names_[i] ||
        state[i].tensor.shape != params_[i]->value.shape)
      throw UsageError("load_state: parameter layout mismatch");
    params_[i]->value = state[i].tensor;
  }
}

}  // namespace freqlab
