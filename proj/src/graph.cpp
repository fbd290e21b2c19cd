#include <utility>

#include "tda/graph.hpp"
#include "tda/kernels.hpp"

namespace tda {

namespace {
namespace k = tda::kernels;

std::string shape_str(int r, int c) {
  return std::to_string(r) + "x" + std::to_string(c);
}
}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::input: return "input";
    case Op::param: return "param";
    case Op::constant: return "constant";
    case Op::matmul: return "matmul";
    case Op::bias_add: return "bias_add";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::scale: return "scale";
    case Op::leaky_relu: return "leaky_relu";
    case Op::tanh_op: return "tanh";
    case Op::exp_op: return "exp";
    case Op::log_clamped: return "log_clamped";
    case Op::clamp_band: return "clamp_band";
    case Op::softmax: return "softmax";
    case Op::row_sum: return "row_sum";
    case Op::col_mean: return "col_mean";
    case Op::l1_row_diff: return "l1_row_diff";
    case Op::stop_grad: return "stop_grad";
  }
  return "?";
}

NodeId Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

Graph::Node& Graph::check_id(NodeId id, const char* who) {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size()))
    throw Error(std::string(who) + ": node id " + std::to_string(id) + " out of range");
  return nodes_[id];
}

const Graph::Node& Graph::check_id(NodeId id, const char* who) const {
  return const_cast<Graph*>(this)->check_id(id, who);
}

NodeId Graph::input(const std::string& name, int rows, int cols) {
  if (auto it = inputs_.find(name); it != inputs_.end()) {
    const Node& n = nodes_[it->second];
    if (n.rows != rows || n.cols != cols)
      throw ShapeError("input '" + name + "' redeclared as " + shape_str(rows, cols) +
                       ", was " + shape_str(n.rows, n.cols));
    return it->second;
  }
  Node n;
  n.op = Op::input;
  n.rows = rows;
  n.cols = cols;
  n.name = name;
  const NodeId id = push(std::move(n));
  inputs_[name] = id;
  return id;
}

NodeId Graph::param(const std::string& name, const Matrix& value, bool trainable) {
  if (auto it = params_.find(name); it != params_.end()) {
    const Node& n = nodes_[it->second];
    if (n.rows != value.rows() || n.cols != value.cols())
      throw ShapeError("param '" + name + "' redeclared as " +
                       shape_str(value.rows(), value.cols()) + ", was " +
                       shape_str(n.rows, n.cols));
    if (n.trainable != trainable)
      throw Error("param '" + name + "' redeclared with a different trainable flag");
    return it->second;
  }
  if (!k::all_finite(value)) throw NonFiniteError("param '" + name + "' has non-finite entries");
  Node n;
  n.op = Op::param;
  n.rows = value.rows();
  n.cols = value.cols();
  n.name = name;
  n.trainable = trainable;
  n.requires_grad = trainable;
  n.value = value;
  n.computed = true;
  const NodeId id = push(std::move(n));
  params_[name] = id;
  return id;
}

NodeId Graph::constant(Matrix value) {
  if (!k::all_finite(value)) throw NonFiniteError("constant has non-finite entries");
  Node n;
  n.op = Op::constant;
  n.rows = value.rows();
  n.cols = value.cols();
  n.value = std::move(value);
  n.computed = true;
  return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Node& na = check_id(a, "matmul");
  const Node& nb = check_id(b, "matmul");
  if (na.cols != nb.rows)
    throw ShapeError("matmul: " + shape_str(na.rows, na.cols) + " * " +
                     shape_str(nb.rows, nb.cols));
  Node n;
  n.op = Op::matmul;
  n.a = a;
  n.b = b;
  n.rows = na.rows;
  n.cols = nb.cols;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

NodeId Graph::bias_add(NodeId x, NodeId bias) {
  const Node& nx = check_id(x, "bias_add");
  const Node& nb = check_id(bias, "bias_add");
  if (nb.rows != 1 || nb.cols != nx.cols)
    throw ShapeError("bias_add: bias " + shape_str(nb.rows, nb.cols) + " against " +
                     shape_str(nx.rows, nx.cols));
  Node n;
  n.op = Op::bias_add;
  n.a = x;
  n.b = bias;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.requires_grad = nx.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) {
  const Node& na = check_id(a, "add");
  const Node& nb = check_id(b, "add");
  if (na.rows != nb.rows || na.cols != nb.cols)
    throw ShapeError("add: " + shape_str(na.rows, na.cols) + " vs " +
                     shape_str(nb.rows, nb.cols));
  Node n;
  n.op = Op::add;
  n.a = a;
  n.b = b;
  n.rows = na.rows;
  n.cols = na.cols;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

NodeId Graph::sub(NodeId a, NodeId b) {
  const Node& na = check_id(a, "sub");
  const Node& nb = check_id(b, "sub");
  if (na.rows != nb.rows || na.cols != nb.cols)
    throw ShapeError("sub: " + shape_str(na.rows, na.cols) + " vs " +
                     shape_str(nb.rows, nb.cols));
  Node n;
  n.op = Op::sub;
  n.a = a;
  n.b = b;
  n.rows = na.rows;
  n.cols = na.cols;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

NodeId Graph::mul(NodeId a, NodeId b) {
  const Node& na = check_id(a, "mul");
  const Node& nb = check_id(b, "mul");
  if (na.rows != nb.rows || na.cols != nb.cols)
    throw ShapeError("mul: " + shape_str(na.rows, na.cols) + " vs " +
                     shape_str(nb.rows, nb.cols));
  Node n;
  n.op = Op::mul;
  n.a = a;
  n.b = b;
  n.rows = na.rows;
  n.cols = na.cols;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

NodeId Graph::scale(NodeId x, double c) {
  const Node& nx = check_id(x, "scale");
  Node n;
  n.op = Op::scale;
  n.a = x;
  n.c0 = c;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.requires_grad = nx.requires_grad;
  return push(std::move(n));
}

NodeId Graph::leaky_relu(NodeId x, double slope) {
  const Node& nx = check_id(x, "leaky_relu");
  Node n;
  n.op = Op::leaky_relu;
  n.a = x;
  n.c0 = slope;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.requires_grad = nx.requires_grad;
  return push(std::move(n));
}

NodeId Graph::tanh_op(NodeId x) {
  const Node& nx = check_id(x, "tanh");
  Node n;
  n.op = Op::tanh_op;
  n.a = x;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.requires_grad = nx.requires_grad;
  return push(std::move(n));
}

NodeId Graph::exp_op(NodeId x) {
  const Node& nx = check_id(x, "exp");
  Node n;
  n.op = Op::exp_op;
  n.a = x;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.requires_grad = nx.requires_grad;
  return push(std::move(n));
}

NodeId Graph::log_clamped(NodeId x) {
  const Node& nx = check_id(x, "log_clamped");
  Node n;
  n.op = Op::log_clamped;
  n.a = x;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.requires_grad = nx.requires_grad;
  return push(std::move(n));
}

NodeId Graph::clamp_band(NodeId x, double lo, double hi) {
  if (!(lo < hi)) throw Error("clamp_band: lo must be < hi");
  const Node& nx = check_id(x, "clamp_band");
  Node n;
  n.op = Op::clamp_band;
  n.a = x;
  n.c0 = lo;
  n.c1 = hi;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.requires_grad = nx.requires_grad;
  return push(std::move(n));
}

NodeId Graph::softmax(NodeId x) {
  const Node& nx = check_id(x, "softmax");
  if (nx.cols < 1) throw ShapeError("softmax: needs at least one column");
  Node n;
  n.op = Op::softmax;
  n.a = x;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.requires_grad = nx.requires_grad;
  return push(std::move(n));
}

NodeId Graph::row_sum(NodeId x) {
  const Node& nx = check_id(x, "row_sum");
  Node n;
  n.op = Op::row_sum;
  n.a = x;
  n.rows = nx.rows;
  n.cols = 1;
  n.requires_grad = nx.requires_grad;
  return push(std::move(n));
}

NodeId Graph::col_mean(NodeId x) {
  const Node& nx = check_id(x, "col_mean");
  if (nx.rows < 1) throw ShapeError("col_mean: needs at least one row");
  Node n;
  n.op = Op::col_mean;
  n.a = x;
  n.rows = 1;
  n.cols = nx.cols;
  n.requires_grad = nx.requires_grad;
  return push(std::move(n));
}

NodeId Graph::l1_row_diff(NodeId a, NodeId b) {
  const Node& na = check_id(a, "l1_row_diff");
  const Node& nb = check_id(b, "l1_row_diff");
  if (na.rows != nb.rows || na.cols != nb.cols)
    throw ShapeError("l1_row_diff: " + shape_str(na.rows, na.cols) + " vs " +
                     shape_str(nb.rows, nb.cols));
  Node n;
  n.op = Op::l1_row_diff;
  n.a = a;
  n.b = b;
  n.rows = na.rows;
  n.cols = 1;
  n.requires_grad = na.requires_grad || nb.requires_grad;
  return push(std::move(n));
}

NodeId Graph::stop_grad(NodeId x) {
  const Node& nx = check_id(x, "stop_grad");
  Node n;
  n.op = Op::stop_grad;
  n.a = x;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.requires_grad = false;  // the whole point
  return push(std::move(n));
}

void Graph::forward(const Bindings& bindings) {
  for (NodeId id = 0; id < static_cast<NodeId>(nodes_.size()); ++id) {
    Node& n = nodes_[id];
    switch (n.op) {
      case Op::input: {
        auto it = bindings.find(n.name);
        if (it == bindings.end()) throw Error("forward: input '" + n.name + "' unbound");
        const Matrix& v = it->second;
        if (v.rows() != n.rows || v.cols() != n.cols)
          throw ShapeError("forward: input '" + n.name + "' bound with " +
                           shape_str(v.rows(), v.cols()) + ", declared " +
                           shape_str(n.rows, n.cols));
        if (!k::all_finite(v))
          throw NonFiniteError("forward: input '" + n.name + "' has non-finite entries");
        n.value = v;
        break;
      }
      case Op::param:
      case Op::constant:
        break;  // values fixed at build time
      case Op::matmul:
        k::matmul(nodes_[n.a].value, false, nodes_[n.b].value, false, n.value, false);
        break;
      case Op::bias_add:
        k::bias_add(nodes_[n.a].value, nodes_[n.b].value, n.value);
        break;
      case Op::add:
        k::add(nodes_[n.a].value, nodes_[n.b].value, n.value);
        break;
      case Op::sub:
        k::sub(nodes_[n.a].value, nodes_[n.b].value, n.value);
        break;
      case Op::mul:
        k::hadamard(nodes_[n.a].value, nodes_[n.b].value, n.value);
        break;
      case Op::scale:
        k::scale(nodes_[n.a].value, n.c0, n.value);
        break;
      case Op::leaky_relu:
        k::leaky_relu(nodes_[n.a].value, n.c0, n.value);
        break;
      case Op::tanh_op:
        k::tanh_fwd(nodes_[n.a].value, n.value);
        break;
      case Op::exp_op:
        k::exp_fwd(nodes_[n.a].value, n.value);
        break;
      case Op::log_clamped:
        k::log_clamped(nodes_[n.a].value, n.value);
        break;
      case Op::clamp_band:
        k::clamp_band(nodes_[n.a].value, n.c0, n.c1, n.value);
        break;
      case Op::softmax:
        k::softmax_rows(nodes_[n.a].value, n.value);
        break;
      case Op::row_sum:
        k::row_sum(nodes_[n.a].value, n.value);
        break;
      case Op::col_mean:
        k::col_mean(nodes_[n.a].value, n.value);
        break;
      case Op::l1_row_diff:
        k::l1_row_diff(nodes_[n.a].value, nodes_[n.b].value, n.value);
        break;
      case Op::stop_grad:
        n.value = nodes_[n.a].value;
        break;
    }
    n.computed = true;
    if (n.op != Op::param && n.op != Op::constant && n.op != Op::input) {
      if (!k::all_finite(n.value))
        throw NonFiniteError(std::string("forward: node ") + std::to_string(id) + " (" +
                             op_name(n.op) + ") produced non-finite values");
    }
  }
}

Gradients Graph::backward(NodeId loss) {
  Node& top = check_id(loss, "backward");
  if (!top.computed) throw Error("backward: forward has not been run");
  if (top.rows != 1 || top.cols != 1)
    throw ShapeError("backward: loss node is " + shape_str(top.rows, top.cols) +
                     ", must be 1x1");

  for (Node& n : nodes_) {
    if (!n.grad.empty()) n.grad.fill(0.0);
  }
  auto ensure_grad = [](Node& n) {
    if (n.grad.empty()) n.grad = Matrix(n.rows, n.cols);
  };

  if (top.requires_grad) {
    ensure_grad(top);
    top.grad(0, 0) = 1.0;
    for (NodeId id = loss; id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.requires_grad || n.grad.empty()) continue;
      const Matrix& g = n.grad;
      switch (n.op) {
        case Op::input:
        case Op::param:
        case Op::constant:
        case Op::stop_grad:
          break;
        case Op::matmul: {
          Node& na = nodes_[n.a];
          Node& nb = nodes_[n.b];
          if (na.requires_grad) {
            ensure_grad(na);
            k::matmul(g, false, nb.value, true, na.grad, true);
          }
          if (nb.requires_grad) {
            ensure_grad(nb);
            k::matmul(na.value, true, g, false, nb.grad, true);
          }
          break;
        }
        case Op::bias_add: {
          Node& na = nodes_[n.a];
          Node& nb = nodes_[n.b];
          if (na.requires_grad) {
            ensure_grad(na);
            k::accumulate(na.grad, g);
          }
          if (nb.requires_grad) {
            ensure_grad(nb);
            k::col_sum_acc(g, nb.grad);
          }
          break;
        }
        case Op::add: {
          for (NodeId o : {n.a, n.b}) {
            Node& no = nodes_[o];
            if (no.requires_grad) {
              ensure_grad(no);
              k::accumulate(no.grad, g);
            }
          }
          break;
        }
        case Op::sub: {
          Node& na = nodes_[n.a];
          Node& nb = nodes_[n.b];
          if (na.requires_grad) {
            ensure_grad(na);
            k::accumulate(na.grad, g);
          }
          if (nb.requires_grad) {
            ensure_grad(nb);
            k::accumulate_scaled(nb.grad, g, -1.0);
          }
          break;
        }
        case Op::mul: {
          Node& na = nodes_[n.a];
          Node& nb = nodes_[n.b];
          Matrix tmp;
          if (na.requires_grad) {
            ensure_grad(na);
            k::hadamard(g, nb.value, tmp);
            k::accumulate(na.grad, tmp);
          }
          if (nb.requires_grad) {
            ensure_grad(nb);
            k::hadamard(g, na.value, tmp);
            k::accumulate(nb.grad, tmp);
          }
          break;
        }
        case Op::scale: {
          Node& na = nodes_[n.a];
          if (na.requires_grad) {
            ensure_grad(na);
            k::accumulate_scaled(na.grad, g, n.c0);
          }
          break;
        }
        case Op::leaky_relu: {
          Node& na = nodes_[n.a];
          if (na.requires_grad) {
            ensure_grad(na);
            k::leaky_relu_grad_acc(na.value, g, n.c0, na.grad);
          }
          break;
        }
        case Op::tanh_op: {
          Node& na = nodes_[n.a];
          if (na.requires_grad) {
            ensure_grad(na);
            k::tanh_grad_acc(n.value, g, na.grad);
          }
          break;
        }
        case Op::exp_op: {
          Node& na = nodes_[n.a];
          if (na.requires_grad) {
            ensure_grad(na);
            k::exp_grad_acc(n.value, g, na.grad);
          }
          break;
        }
        case Op::log_clamped: {
          Node& na = nodes_[n.a];
          if (na.requires_grad) {
            ensure_grad(na);
            k::log_clamped_grad_acc(na.value, g, na.grad);
          }
          break;
        }
        case Op::clamp_band: {
          Node& na = nodes_[n.a];
          if (na.requires_grad) {
            ensure_grad(na);
            k::clamp_band_grad_acc(na.value, g, n.c0, n.c1, na.grad);
          }
          break;
        }
        case Op::softmax: {
          Node& na = nodes_[n.a];
          if (na.requires_grad) {
            ensure_grad(na);
            k::softmax_rows_grad_acc(n.value, g, na.grad);
          }
          break;
        }
        case Op::row_sum: {
          Node& na = nodes_[n.a];
          if (na.requires_grad) {
            ensure_grad(na);
            k::row_sum_grad_acc(g, na.grad);
          }
          break;
        }
        case Op::col_mean: {
          Node& na = nodes_[n.a];
          if (na.requires_grad) {
            ensure_grad(na);
            k::col_mean_grad_acc(g, na.grad);
          }
          break;
        }
        case Op::l1_row_diff: {
          Node& na = nodes_[n.a];
          Node& nb = nodes_[n.b];
          Matrix tmp_a, tmp_b;
          if (na.requires_grad) ensure_grad(na);
          else tmp_a = Matrix(na.rows, na.cols);
          if (nb.requires_grad) ensure_grad(nb);
          else tmp_b = Matrix(nb.rows, nb.cols);
          k::l1_row_diff_grad_acc(na.value, nb.value, g,
                                  na.requires_grad ? na.grad : tmp_a,
                                  nb.requires_grad ? nb.grad : tmp_b);
          break;
        }
      }
    }
  }

  Gradients out;
  for (const auto& [name, id] : params_) {
    Node& n = nodes_[id];
    if (n.trainable && !n.grad.empty()) {
      if (!k::all_finite(n.grad))
        throw NonFiniteError("backward: gradient for '" + name + "' is non-finite");
      out[name] = n.grad;
    } else {
      out[name] = Matrix(n.rows, n.cols);
    }
  }
  return out;
}

const Matrix& Graph::value(NodeId id) const {
  const Node& n = check_id(id, "value");
  if (!n.computed) throw Error("value: node " + std::to_string(id) + " not computed yet");
  return n.value;
}

double Graph::scalar(NodeId id) const {
  const Matrix& v = value(id);
  if (v.rows() != 1 || v.cols() != 1)
    throw ShapeError("scalar: node " + std::to_string(id) + " is " +
                     shape_str(v.rows(), v.cols()));
  return v(0, 0);
}

int Graph::rows(NodeId id) const { return check_id(id, "rows").rows; }
int Graph::cols(NodeId id) const { return check_id(id, "cols").cols; }
bool Graph::requires_grad(NodeId id) const { return check_id(id, "requires_grad").requires_grad; }

}  // namespace tda
