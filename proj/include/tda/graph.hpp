#pragma once

#include <map>
#include <string>
#include <vector>

#include "tda/matrix.hpp"

namespace tda {

using NodeId = int;

/// Everything a loss can be assembled from. The set is deliberately small:
/// each op has a hand-written derivative rule, and the tests difference
/// every one of them.
enum class Op {
  input,      // bound at forward() time by name
  param,      // named tensor, optionally trainable
  constant,   // literal tensor captured at build time
  matmul,
  bias_add,   // x (n x m) + bias (1 x m) broadcast over rows
  add,
  sub,
  mul,        // elementwise
  scale,      // elementwise multiply by a build-time scalar
  leaky_relu,
  tanh_op,
  exp_op,
  log_clamped,  // ln(clamp(x, 1e-7, 1))
  clamp_band,   // clamp(x, lo, hi); gradient is 1 inside the band
  softmax,      // row-wise, max-subtracted
  row_sum,      // n x m -> n x 1
  col_mean,     // n x m -> 1 x m
  l1_row_diff,  // per-row L1 distance -> n x 1
  stop_grad,    // identity forward, blocks backward
};

const char* op_name(Op op);

using Bindings = std::map<std::string, Matrix>;
using Gradients = std::map<std::string, Matrix>;

/// A build-once, run-many computation tape. Nodes are appended in
/// topological order; shapes are inferred and checked at build time, so a
/// malformed graph fails before any numbers move. forward() evaluates every
/// node and rejects non-finite values; backward() runs reverse-mode
/// accumulation from a scalar node.
///
/// Gradient flow is controlled two ways: stop_grad nodes cut the reverse
/// pass structurally, and params registered with trainable=false never
/// receive (nor propagate) gradient. backward() still reports an entry for
/// every param, with exact zeros for the frozen ones.
///
/// A Graph instance is not safe for concurrent use; parallelism lives
/// inside the kernels.
class Graph {
 public:
  NodeId input(const std::string& name, int rows, int cols);
  NodeId param(const std::string& name, const Matrix& value, bool trainable = true);
  NodeId constant(Matrix value);

  NodeId matmul(NodeId a, NodeId b);
  NodeId bias_add(NodeId x, NodeId bias);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId x, double c);
  NodeId leaky_relu(NodeId x, double slope);
  NodeId tanh_op(NodeId x);
  NodeId exp_op(NodeId x);
  NodeId log_clamped(NodeId x);
  NodeId clamp_band(NodeId x, double lo, double hi);
  NodeId softmax(NodeId x);
  NodeId row_sum(NodeId x);
  NodeId col_mean(NodeId x);
  NodeId l1_row_diff(NodeId a, NodeId b);
  NodeId stop_grad(NodeId x);

  /// Evaluates all nodes in order. Every input node must have a binding of
  /// the declared shape; all produced values must be finite.
  void forward(const Bindings& bindings = {});

  /// Reverse pass from a scalar (1 x 1) node that forward() has computed.
  /// Returns one gradient per registered param, keyed by name; frozen
  /// params map to exact zeros.
  Gradients backward(NodeId loss);

  const Matrix& value(NodeId id) const;
  double scalar(NodeId id) const;

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int rows(NodeId id) const;
  int cols(NodeId id) const;
  bool requires_grad(NodeId id) const;

 private:
  struct Node {
    Op op{};
    NodeId a = -1;
    NodeId b = -1;
    double c0 = 0.0;  // slope / scale factor / clamp low
    double c1 = 0.0;  // clamp high
    int rows = 0;
    int cols = 0;
    bool requires_grad = false;
    bool trainable = false;
    std::string name;
    Matrix value;
    Matrix grad;
    bool computed = false;
  };

  NodeId push(Node n);
  Node& check_id(NodeId id, const char* who);
  const Node& check_id(NodeId id, const char* who) const;

  std::vector<Node> nodes_;
  std::map<std::string, NodeId> params_;
  std::map<std::string, NodeId> inputs_;
};

}  // namespace tda
