#include <cmath>

#include "tda/kernels.hpp"
#include "tda/mlp.hpp"

namespace tda {

namespace k = tda::kernels;

Matrix init_weight(int fan_in, int fan_out, Rng& rng) {
  if (fan_in <= 0 || fan_out <= 0) throw ShapeError("init_weight: fan sizes must be positive");
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  Matrix w(fan_in, fan_out);
  double* p = w.data();
  for (std::size_t i = 0; i < w.size(); ++i) p[i] = rng.next_range(-bound, bound);
  return w;
}

MlpParams init_mlp(const MlpSpec& spec, Rng rng) {
  if (spec.input <= 0 || spec.output <= 0) throw ShapeError("init_mlp: bad layer widths");
  if (spec.head == Head::logistic && spec.output != 1)
    throw ShapeError("init_mlp: logistic head needs exactly one output");
  MlpParams p;
  p.spec = spec;
  int fan_in = spec.input;
  for (int width : spec.hidden) {
    if (width <= 0) throw ShapeError("init_mlp: bad hidden width");
    p.w.push_back(init_weight(fan_in, width, rng));
    p.b.emplace_back(1, width);
    fan_in = width;
  }
  p.w.push_back(init_weight(fan_in, spec.output, rng));
  p.b.emplace_back(1, spec.output);
  return p;
}

NodeId mlp_nodes(Graph& g, const MlpParams& p, const std::string& prefix, NodeId in,
                 bool trainable) {
  NodeId a = in;
  const std::size_t layers = p.w.size();
  for (std::size_t i = 0; i < layers; ++i) {
    const std::string tag = std::to_string(i);
    const NodeId w = g.param(prefix + "/w" + tag, p.w[i], trainable);
    const NodeId b = g.param(prefix + "/b" + tag, p.b[i], trainable);
    a = g.bias_add(g.matmul(a, w), b);
    if (i + 1 < layers) a = g.leaky_relu(a, p.spec.leaky_slope);
  }
  switch (p.spec.head) {
    case Head::linear:
      return a;
    case Head::softmax:
      return g.softmax(a);
    case Head::logistic: {
      // widen the single logit u to [u, 0]; softmax of that is [p, 1-p]
      const NodeId widen = g.constant(Matrix::from_rows({{1.0, 0.0}}));
      const NodeId pair = g.softmax(g.matmul(a, widen));
      return g.clamp_band(pair, kLogisticClampLo, kLogisticClampHi);
    }
  }
  throw Error("mlp_nodes: unknown head");
}

Matrix mlp_apply(const MlpParams& p, const Matrix& x) {
  Matrix a = x;
  Matrix t;
  const std::size_t layers = p.w.size();
  for (std::size_t i = 0; i < layers; ++i) {
    k::matmul(a, false, p.w[i], false, t, false);
    k::bias_add(t, p.b[i], a);
    if (i + 1 < layers) {
      k::leaky_relu(a, p.spec.leaky_slope, t);
      a = t;
    }
  }
  switch (p.spec.head) {
    case Head::linear:
      return a;
    case Head::softmax: {
      k::softmax_rows(a, t);
      return t;
    }
    case Head::logistic: {
      const Matrix widen = Matrix::from_rows({{1.0, 0.0}});
      Matrix wide;
      k::matmul(a, false, widen, false, wide, false);
      k::softmax_rows(wide, t);
      Matrix clamped;
      k::clamp_band(t, kLogisticClampLo, kLogisticClampHi, clamped);
      return clamped;
    }
  }
  throw Error("mlp_apply: unknown head");
}

std::vector<Matrix> mlp_preactivations(const MlpParams& p, const Matrix& x) {
  std::vector<Matrix> pre;
  Matrix a = x;
  Matrix t;
  for (std::size_t i = 0; i + 1 < p.w.size(); ++i) {
    k::matmul(a, false, p.w[i], false, t, false);
    Matrix z;
    k::bias_add(t, p.b[i], z);
    pre.push_back(z);
    k::leaky_relu(z, p.spec.leaky_slope, a);
  }
  return pre;
}

}  // namespace tda
