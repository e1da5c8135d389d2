#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "freqlab/errors.hpp"
#include "freqlab/rng.hpp"

namespace freqlab {

// Dense row-major double tensor.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, double fill = 0.0);
  static Tensor from(std::vector<int> s, std::vector<double> values);

  int size() const { return static_cast<int>(data.size()); }
  int ndim() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  double& operator[](int i) { return data[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return data[static_cast<std::size_t>(i)]; }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

int shape_volume(const std::vector<int>& shape);
void check_finite(const Tensor& t, const char* op);

// One node of the reverse-mode tape. Nodes built by operators hold a backward
// closure that scatters the node's gradient into its parents.
class Node;
using NodePtr = std::shared_ptr<Node>;

class Node {
 public:
  Tensor value;
  Tensor grad;  // same shape as value, lazily zero-initialized
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backward_fn;

  void ensure_grad();
  void zero_grad();
};

NodePtr make_constant(Tensor value);
NodePtr make_parameter(Tensor value);

// Operators. All use valid padding and cross-correlation convention.
// input (C_in, H, W); weights (C_out, C_in, k, k); bias (C_out).
NodePtr conv2d(const NodePtr& input, const NodePtr& weights,
               const NodePtr& bias, int stride);
// input (n); weights (m, n); bias (m).
NodePtr affine(const NodePtr& input, const NodePtr& weights,
               const NodePtr& bias);
NodePtr relu(const NodePtr& input);
// Non-overlapping max pooling over the two trailing spatial dims.
NodePtr max_pool(const NodePtr& input, int window);
NodePtr concat(const std::vector<NodePtr>& inputs, int axis);
NodePtr flatten(const NodePtr& input);
NodePtr sum(const NodePtr& input);
NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr scale(const NodePtr& input, double factor);
NodePtr mse_loss(const NodePtr& prediction, const NodePtr& target);

// Populates gradients of every parameter reachable from the scalar loss.
void backward(const NodePtr& loss);

enum class OptKind { sgd, adam };

struct OptimizerState {
  OptKind kind = OptKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step_count = 0;
  std::vector<Tensor> moment1;  // one per parameter, allocated on first step
  std::vector<Tensor> moment2;
};

// In-place update; zeroes gradients and increments the step counter.
void optimizer_step(OptimizerState& state, const std::vector<NodePtr>& params);

// Checkpoint format: magic "FQLB", u32 version, u32 tensor count, then per
// tensor: u32 name length, name bytes, u32 ndim, i32 dims, row-major doubles.
struct NamedTensor {
  std::string name;
  Tensor tensor;
};
void save_checkpoint(const std::string& path,
                     const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::string& path);

}  // namespace freqlab
