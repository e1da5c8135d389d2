#include "freqlab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <unordered_set>

namespace freqlab {

int shape_volume(const std::vector<int>& shape) {
  int n = 1;
  for (int d : shape) n *= d;
  return n;
}

Tensor::Tensor(std::vector<int> s, double fill) : shape(std::move(s)) {
  for (int d : shape) {
    if (d <= 0) throw ShapeError("tensor extent must be positive");
  }
  data.assign(static_cast<std::size_t>(shape_volume(shape)), fill);
}

Tensor Tensor::from(std::vector<int> s, std::vector<double> values) {
  Tensor t;
  t.shape = std::move(s);
  if (shape_volume(t.shape) != static_cast<int>(values.size()))
    throw ShapeError("tensor data size does not match shape");
  t.data = std::move(values);
  return t;
}

void check_finite(const Tensor& t, const char* op) {
  for (double v : t.data) {
    if (!std::isfinite(v))
      throw NumericError(std::string("non-finite value in output of ") + op);
  }
}

void Node::ensure_grad() {
  if (grad.data.size() != value.data.size()) {
    grad = Tensor(value.shape);
  }
}

void Node::zero_grad() {
  if (!grad.data.empty()) std::fill(grad.data.begin(), grad.data.end(), 0.0);
}

NodePtr make_constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = false;
  return n;
}

NodePtr make_parameter(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return n;
}

namespace {

NodePtr make_op(Tensor value, std::vector<NodePtr> parents,
                std::function<void(Node&)> backward_fn, const char* op) {
  check_finite(value, op);
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->backward_fn = std::move(backward_fn);
  n->requires_grad = false;
  for (const auto& p : n->parents) {
    if (p->requires_grad || p->backward_fn) n->requires_grad = true;
  }
  return n;
}

}  // namespace

NodePtr conv2d(const NodePtr& input, const NodePtr& weights,
               const NodePtr& bias, int stride) {
  const Tensor& x = input->value;
  const Tensor& w = weights->value;
  const Tensor& b = bias->value;
  if (stride < 1) throw ShapeError("conv2d: stride must be >= 1");
  if (x.ndim() != 3 || w.ndim() != 4 || b.ndim() != 1)
    throw ShapeError("conv2d: expected input (C,H,W), weights (O,C,k,k), bias (O)");
  const int cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const int cout = w.dim(0), k = w.dim(2);
  if (w.dim(1) != cin) throw ShapeError("conv2d: channel mismatch");
  if (w.dim(3) != k) throw ShapeError("conv2d: kernel must be square");
  if (b.dim(0) != cout) throw ShapeError("conv2d: bias size mismatch");
  if (h < k || wd < k) throw ShapeError("conv2d: input smaller than kernel");
  const int oh = (h - k) / stride + 1;
  const int ow = (wd - k) / stride + 1;

  Tensor out({cout, oh, ow});
  for (int oc = 0; oc < cout; ++oc) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = b[oc];
        const int iy0 = oy * stride, ix0 = ox * stride;
        for (int ic = 0; ic < cin; ++ic) {
          const double* xp = &x.data[static_cast<std::size_t>((ic * h + iy0) * wd + ix0)];
          const double* wp = &w.data[static_cast<std::size_t>(((oc * cin) + ic) * k * k)];
          for (int ky = 0; ky < k; ++ky) {
            const double* xrow = xp + ky * wd;
            const double* wrow = wp + ky * k;
            for (int kx = 0; kx < k; ++kx) acc += xrow[kx] * wrow[kx];
          }
        }
        out[(oc * oh + oy) * ow + ox] = acc;
      }
    }
  }

  auto backward_fn = [stride, cin, h, wd, cout, k, oh, ow](Node& self) {
    Node& xin = *self.parents[0];
    Node& wn = *self.parents[1];
    Node& bn = *self.parents[2];
    xin.ensure_grad();
    wn.ensure_grad();
    bn.ensure_grad();
    const Tensor& g = self.grad;
    const Tensor& x = xin.value;
    const Tensor& w = wn.value;
    for (int oc = 0; oc < cout; ++oc) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          const double go = g[(oc * oh + oy) * ow + ox];
          if (go == 0.0) continue;
          bn.grad[oc] += go;
          const int iy0 = oy * stride, ix0 = ox * stride;
          for (int ic = 0; ic < cin; ++ic) {
            const std::size_t xbase = static_cast<std::size_t>((ic * h + iy0) * wd + ix0);
            const std::size_t wbase = static_cast<std::size_t>(((oc * cin) + ic) * k * k);
            for (int ky = 0; ky < k; ++ky) {
              for (int kx = 0; kx < k; ++kx) {
                wn.grad.data[wbase + static_cast<std::size_t>(ky * k + kx)] +=
                    go * x.data[xbase + static_cast<std::size_t>(ky * wd + kx)];
                xin.grad.data[xbase + static_cast<std::size_t>(ky * wd + kx)] +=
                    go * w.data[wbase + static_cast<std::size_t>(ky * k + kx)];
              }
            }
          }
        }
      }
    }
  };
  return make_op(std::move(out), {input, weights, bias}, backward_fn, "conv2d");
}

NodePtr affine(const NodePtr& input, const NodePtr& weights,
               const NodePtr& bias) {
  const Tensor& x = input->value;
  const Tensor& w = weights->value;
  const Tensor& b = bias->value;
  if (x.ndim() != 1 || w.ndim() != 2 || b.ndim() != 1)
    throw ShapeError("affine: expected input (n), weights (m,n), bias (m)");
  const int n = x.dim(0), m = w.dim(0);
  if (w.dim(1) != n || b.dim(0) != m)
    throw ShapeError("affine: shape mismatch");
  Tensor out({m});
  for (int i = 0; i < m; ++i) {
    double acc = b[i];
    const double* wrow = &w.data[static_cast<std::size_t>(i * n)];
    for (int j = 0; j < n; ++j) acc += wrow[j] * x[j];
    out[i] = acc;
  }
  auto backward_fn = [n, m](Node& self) {
    Node& xin = *self.parents[0];
    Node& wn = *self.parents[1];
    Node& bn = *self.parents[2];
    xin.ensure_grad();
    wn.ensure_grad();
    bn.ensure_grad();
    for (int i = 0; i < m; ++i) {
      const double go = self.grad[i];
      if (go == 0.0) continue;
      bn.grad[i] += go;
      const double* wrow = &wn.value.data[static_cast<std::size_t>(i * n)];
      double* gwrow = &wn.grad.data[static_cast<std::size_t>(i * n)];
      for (int j = 0; j < n; ++j) {
        gwrow[j] += go * xin.value[j];
        xin.grad[j] += go * wrow[j];
      }
    }
  };
  return make_op(std::move(out), {input, weights, bias}, backward_fn, "affine");
}

NodePtr relu(const NodePtr& input) {
  Tensor out = input->value;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  auto backward_fn = [](Node& self) {
    Node& xin = *self.parents[0];
    xin.ensure_grad();
    for (int i = 0; i < self.value.size(); ++i) {
      if (xin.value[i] > 0.0) xin.grad[i] += self.grad[i];
    }
  };
  return make_op(std::move(out), {input}, backward_fn, "relu");
}

NodePtr max_pool(const NodePtr& input, int window) {
  const Tensor& x = input->value;
  if (x.ndim() != 3) throw ShapeError("max_pool: expected input (C,H,W)");
  if (window < 1) throw ShapeError("max_pool: window must be >= 1");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (h < window || w < window)
    throw ShapeError("max_pool: input smaller than window");
  const int oh = h / window, ow = w / window;
  Tensor out({c, oh, ow});
  auto argmax = std::make_shared<std::vector<int>>(
      static_cast<std::size_t>(c * oh * ow));
  for (int ic = 0; ic < c; ++ic) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double best = -std::numeric_limits<double>::infinity();
        int best_idx = 0;
        for (int ky = 0; ky < window; ++ky) {
          for (int kx = 0; kx < window; ++kx) {
            const int idx = (ic * h + oy * window + ky) * w + ox * window + kx;
            if (x[idx] > best) {
              best = x[idx];
              best_idx = idx;
            }
          }
        }
        const int oidx = (ic * oh + oy) * ow + ox;
        out[oidx] = best;
        (*argmax)[static_cast<std::size_t>(oidx)] = best_idx;
      }
    }
  }
  auto backward_fn = [argmax](Node& self) {
    Node& xin = *self.parents[0];
    xin.ensure_grad();
    for (int i = 0; i < self.value.size(); ++i) {
      xin.grad[(*argmax)[static_cast<std::size_t>(i)]] += self.grad[i];
    }
  };
  return make_op(std::move(out), {input}, backward_fn, "max_pool");
}

NodePtr concat(const std::vector<NodePtr>& inputs, int axis) {
  if (inputs.empty()) throw EmptyInputError("concat: no inputs");
  const int nd = inputs[0]->value.ndim();
  if (axis < 0 || axis >= nd) throw ShapeError("concat: axis out of range");
  for (const auto& in : inputs) {
    if (in->value.ndim() != nd) throw ShapeError("concat: rank mismatch");
    for (int d = 0; d < nd; ++d) {
      if (d != axis && in->value.dim(d) != inputs[0]->value.dim(d))
        throw ShapeError("concat: non-axis extent mismatch");
    }
  }
  std::vector<int> out_shape = inputs[0]->value.shape;
  int total = 0;
  for (const auto& in : inputs) total += in->value.dim(axis);
  out_shape[static_cast<std::size_t>(axis)] = total;

  // Treat each tensor as (outer, axis_len, inner) and copy slabs.
  int outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= out_shape[static_cast<std::size_t>(d)];
  for (int d = axis + 1; d < nd; ++d) inner *= out_shape[static_cast<std::size_t>(d)];

  Tensor out(out_shape);
  auto offsets = std::make_shared<std::vector<int>>();
  int offset = 0;
  for (const auto& in : inputs) {
    offsets->push_back(offset);
    const int alen = in->value.dim(axis);
    for (int o = 0; o < outer; ++o) {
      std::memcpy(&out.data[static_cast<std::size_t>((o * total + offset) * inner)],
                  &in->value.data[static_cast<std::size_t>(o * alen * inner)],
                  static_cast<std::size_t>(alen * inner) * sizeof(double));
    }
    offset += alen;
  }
  auto backward_fn = [offsets, outer, inner, total, axis](Node& self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      Node& p = *self.parents[i];
      p.ensure_grad();
      const int alen = p.value.dim(axis);
      const int off = (*offsets)[i];
      for (int o = 0; o < outer; ++o) {
        for (int j = 0; j < alen * inner; ++j) {
          p.grad[o * alen * inner + j] +=
              self.grad[(o * total + off) * inner + j];
        }
      }
    }
  };
  return make_op(std::move(out), inputs, backward_fn, "concat");
}

NodePtr flatten(const NodePtr& input) {
  Tensor out = Tensor::from({input->value.size()}, input->value.data);
  auto backward_fn = [](Node& self) {
    Node& xin = *self.parents[0];
    xin.ensure_grad();
    for (int i = 0; i < self.value.size(); ++i) xin.grad[i] += self.grad[i];
  };
  return make_op(std::move(out), {input}, backward_fn, "flatten");
}

NodePtr sum(const NodePtr& input) {
  double acc = 0.0;
  for (double v : input->value.data) acc += v;
  Tensor out = Tensor::from({1}, {acc});
  auto backward_fn = [](Node& self) {
    Node& xin = *self.parents[0];
    xin.ensure_grad();
    for (double& g : xin.grad.data) g += self.grad[0];
  };
  return make_op(std::move(out), {input}, backward_fn, "sum");
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
  if (!a->value.same_shape(b->value)) throw ShapeError("add: shape mismatch");
  Tensor out = a->value;
  for (int i = 0; i < out.size(); ++i) out[i] += b->value[i];
  auto backward_fn = [](Node& self) {
    for (const auto& p : self.parents) {
      p->ensure_grad();
      for (int i = 0; i < self.value.size(); ++i) p->grad[i] += self.grad[i];
    }
  };
  return make_op(std::move(out), {a, b}, backward_fn, "add");
}

NodePtr scale(const NodePtr& input, double factor) {
  Tensor out = input->value;
  for (double& v : out.data) v *= factor;
  auto backward_fn = [factor](Node& self) {
    Node& xin = *self.parents[0];
    xin.ensure_grad();
    for (int i = 0; i < self.value.size(); ++i)
      xin.grad[i] += factor * self.grad[i];
  };
  return make_op(std::move(out), {input}, backward_fn, "scale");
}

NodePtr mse_loss(const NodePtr& prediction, const NodePtr& target) {
  const Tensor& p = prediction->value;
  const Tensor& t = target->value;
  if (!p.same_shape(t)) throw ShapeError("mse_loss: shape mismatch");
  const int n = p.size();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = p[i] - t[i];
    acc += d * d;
  }
  Tensor out = Tensor::from({1}, {acc / n});
  auto backward_fn = [n](Node& self) {
    Node& pred = *self.parents[0];
    Node& tgt = *self.parents[1];
    pred.ensure_grad();
    tgt.ensure_grad();
    const double g = self.grad[0];
    for (int i = 0; i < n; ++i) {
      const double d = 2.0 * (pred.value[i] - tgt.value[i]) / n;
      pred.grad[i] += g * d;
      tgt.grad[i] -= g * d;
    }
  };
  return make_op(std::move(out), {prediction, target}, backward_fn, "mse_loss");
}

void backward(const NodePtr& loss) {
  if (loss->value.size() != 1)
    throw UsageError("backward: loss must be a scalar");
  // Iterative post-order DFS; graphs can be deep for large batches.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.get(), 0);
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, child] = stack.back();
    if (child < node->parents.size()) {
      Node* next = node->parents[child++].get();
      if (visited.insert(next).second) stack.emplace_back(next, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss->ensure_grad();
  loss->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward_fn && node->requires_grad) {
      node->ensure_grad();
      node->backward_fn(*node);
    }
  }
}

void optimizer_step(OptimizerState& state, const std::vector<NodePtr>& params) {
  for (const auto& p : params) {
    if (p->grad.data.size() != p->value.data.size())
      throw UsageError("optimizer_step: parameter has no gradient");
  }
  if (state.kind == OptKind::adam && state.moment1.empty()) {
    for (const auto& p : params) {
      state.moment1.emplace_back(p->value.shape);
      state.moment2.emplace_back(p->value.shape);
    }
  }
  state.step_count += 1;
  if (state.kind == OptKind::sgd) {
    for (const auto& p : params) {
      for (int i = 0; i < p->value.size(); ++i)
        p->value[i] -= state.learning_rate * p->grad[i];
    }
  } else {
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
      Node& p = *params[pi];
      Tensor& m = state.moment1[pi];
      Tensor& v = state.moment2[pi];
      for (int i = 0; i < p.value.size(); ++i) {
        const double g = p.grad[i];
        m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
        v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p.value[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
      }
    }
  }
  for (const auto& p : params) p->zero_grad();
}

namespace {

constexpr char kMagic[4] = {'F', 'Q', 'L', 'B'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    write_pod(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod(out, static_cast<std::uint32_t>(tensor.shape.size()));
    for (int d : tensor.shape) write_pod(out, static_cast<std::int32_t>(d));
    out.write(reinterpret_cast<const char*>(tensor.data.data()),
              static_cast<std::streamsize>(tensor.data.size() * sizeof(double)));
  }
  if (!out) throw IoError("checkpoint write failed: " + path);
}

std::vector<NamedTensor> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("bad checkpoint magic: " + path);
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion) throw IoError("unsupported checkpoint version");
  const auto count = read_pod<std::uint32_t>(in);
  std::vector<NamedTensor> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto ndim = read_pod<std::uint32_t>(in);
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = read_pod<std::int32_t>(in);
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!in) throw IoError("truncated checkpoint: " + path);
    out.push_back({std::move(name), std::move(t)});
  }
  return out;
}

}  // namespace freqlab
