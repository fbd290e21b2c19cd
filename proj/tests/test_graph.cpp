#include <cmath>
#include <doctest.h>
#include <functional>

#include "tda/gradcheck.hpp"
#include "tda/graph.hpp"
#include "tda/rng.hpp"

using tda::Bindings;
using tda::Gradients;
using tda::Graph;
using tda::Matrix;
using tda::NodeId;
using tda::Rng;

namespace {

Matrix randm(int rows, int cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.next_range(lo, hi);
  return m;
}

/// Keeps |entries| away from zero so leaky-relu and L1 cases stay off their
/// kinks under the finite-difference step.
Matrix randm_away_from(Matrix m, double margin) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      double& v = m(i, j);
      if (std::abs(v) < margin) v = v < 0.0 ? v - margin : v + margin;
    }
  return m;
}

/// Reduces any node to 1 x 1 against fixed random weights, so every output
/// entry influences the scalar.
NodeId weighted_sum(Graph& g, NodeId x, const Matrix& weights) {
  return g.col_mean(g.row_sum(g.mul(x, g.constant(weights))));
}

}  // namespace

TEST_CASE("forward matches hand arithmetic on a single matmul") {
  Graph g;
  const NodeId a = g.constant(Matrix::from_rows({{1, 2}, {3, 4}}));
  const NodeId b = g.constant(Matrix::from_rows({{1}, {1}}));
  const NodeId y = g.matmul(a, b);
  g.forward();
  CHECK(g.value(y) == Matrix::from_rows({{3}, {7}}));
}

TEST_CASE("softmax node closed forms") {
  Graph g;
  const NodeId x = g.constant(Matrix::from_rows({{0.0, 0.0}, {std::log(2.0), 0.0}}));
  const NodeId y = g.softmax(x);
  g.forward();
  CHECK(g.value(y)(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g.value(y)(1, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(g.value(y)(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("gradient of sum(W x) is x transposed") {
  Graph g;
  const NodeId w = g.param("W", Matrix::from_rows({{1, 1}}));
  const NodeId x = g.constant(Matrix::from_rows({{1}, {2}}));
  const NodeId loss = g.matmul(w, x);
  g.forward();
  const Gradients grads = g.backward(loss);
  CHECK(grads.at("W") == Matrix::from_rows({{1, 2}}));
}

TEST_CASE("softmax cross-entropy gradient at uniform logits") {
  Graph g;
  const NodeId logits = g.param("l", Matrix::from_rows({{0.0, 0.0}}));
  const NodeId target = g.constant(Matrix::from_rows({{1.0, 0.0}}));
  const NodeId ce =
      g.scale(g.col_mean(g.row_sum(g.mul(g.log_clamped(g.softmax(logits)), target))), -1.0);
  g.forward();
  const Gradients grads = g.backward(ce);
  CHECK(grads.at("l")(0, 0) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(grads.at("l")(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("every primitive passes finite-difference checks on random configurations") {
  // builder(state) wires one primitive between the param(s) and a fixed
  // reduction; the same builder re-runs inside the finite-difference oracle
  struct PrimCase {
    const char* name;
    int params;  // 1 or 2
    std::function<NodeId(Graph&, NodeId, NodeId, const Matrix&)> wire;
    double margin;  // keep param entries away from 0 by this much
    bool second_margin;
  };

  const auto unary = [](std::function<NodeId(Graph&, NodeId)> op) {
    return [op](Graph& g, NodeId p, NodeId, const Matrix& w) {
      return weighted_sum(g, op(g, p), w);
    };
  };
  const auto binary = [](std::function<NodeId(Graph&, NodeId, NodeId)> op) {
    return [op](Graph& g, NodeId p, NodeId q, const Matrix& w) {
      return weighted_sum(g, op(g, p, q), w);
    };
  };

  const PrimCase cases[] = {
      {"matmul", 2, binary([](Graph& g, NodeId a, NodeId b) { return g.matmul(a, b); }), 0.0,
       false},
      {"bias_add", 2,
       binary([](Graph& g, NodeId a, NodeId b) { return g.bias_add(a, b); }), 0.0, false},
      {"add", 2, binary([](Graph& g, NodeId a, NodeId b) { return g.add(a, b); }), 0.0,
       false},
      {"sub", 2, binary([](Graph& g, NodeId a, NodeId b) { return g.sub(a, b); }), 0.0,
       false},
      {"mul", 2, binary([](Graph& g, NodeId a, NodeId b) { return g.mul(a, b); }), 0.0,
       false},
      {"scale", 1, unary([](Graph& g, NodeId x) { return g.scale(x, -2.5); }), 0.0, false},
      {"leaky_relu", 1, unary([](Graph& g, NodeId x) { return g.leaky_relu(x, 0.2); }),
       1e-2, false},
      {"tanh", 1, unary([](Graph& g, NodeId x) { return g.tanh_op(x); }), 0.0, false},
      {"exp", 1, unary([](Graph& g, NodeId x) { return g.exp_op(x); }), 0.0, false},
      {"log_clamped", 1,
       unary([](Graph& g, NodeId x) { return g.log_clamped(g.scale(g.tanh_op(x), 0.45)); }),
       1e-2, false},
      {"clamp_band", 1,
       unary([](Graph& g, NodeId x) { return g.clamp_band(x, -0.5, 0.5); }), 0.0, false},
      {"softmax", 1, unary([](Graph& g, NodeId x) { return g.softmax(x); }), 0.0, false},
      {"row_sum", 1, unary([](Graph& g, NodeId x) { return g.row_sum(x); }), 0.0, false},
      {"col_mean", 1, unary([](Graph& g, NodeId x) { return g.col_mean(x); }), 0.0, false},
      {"l1_row_diff", 2,
       binary([](Graph& g, NodeId a, NodeId b) { return g.l1_row_diff(a, b); }), 0.0, true},
  };

  Rng master(424242);
  int total_cases = 0;
  for (const PrimCase& pc : cases) {
    for (int rep = 0; rep < 8; ++rep) {
      CAPTURE(pc.name);
      CAPTURE(rep);
      const int n = 2 + static_cast<int>(master.next_below(3));
      const int m = 2 + static_cast<int>(master.next_below(3));

      Matrix p, q;
      Matrix w;  // reduction weights sized to the primitive's output
      if (std::string(pc.name) == "matmul") {
        const int kk = 2 + static_cast<int>(master.next_below(3));
        p = randm(n, kk, master);
        q = randm(kk, m, master);
        w = randm(n, m, master);
      } else if (std::string(pc.name) == "bias_add") {
        p = randm(n, m, master);
        q = randm(1, m, master);
        w = randm(n, m, master);
      } else if (std::string(pc.name) == "row_sum") {
        p = randm(n, m, master);
        w = randm(n, 1, master);
      } else if (std::string(pc.name) == "col_mean") {
        p = randm(n, m, master);
        w = randm(1, m, master);
      } else if (std::string(pc.name) == "l1_row_diff") {
        p = randm(n, m, master);
        // push the two operands apart entrywise so |a - b| has no kink in
        // the differencing interval
        q = randm(n, m, master);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < m; ++j) {
            const double gap = q(i, j) - p(i, j);
            if (std::abs(gap) < 5e-2) q(i, j) = p(i, j) + (gap < 0.0 ? -5e-2 : 5e-2);
          }
        w = randm(n, 1, master);
      } else if (std::string(pc.name) == "clamp_band") {
        // mix of interior and pinned entries, all at least 0.05 from the edges
        p = randm(n, m, master, -1.0, 1.0);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < m; ++j) {
            double& v = p(i, j);
            if (std::abs(std::abs(v) - 0.5) < 5e-2) v = v < 0 ? v - 0.1 : v + 0.1;
          }
        w = randm(n, m, master);
      } else {
        p = randm(n, m, master);
        if (pc.margin > 0.0) p = randm_away_from(p, pc.margin);
        w = randm(n, m, master);
      }

      auto build = [&](Graph& g) {
        const NodeId pn = g.param("p", p);
        const NodeId qn = pc.params == 2 ? g.param("q", q) : -1;
        return pc.wire(g, pn, qn, w);
      };

      Graph g;
      const NodeId loss = build(g);
      g.forward();
      const Gradients analytic = g.backward(loss);

      auto eval = [&]() {
        Graph h;
        const NodeId l = build(h);
        h.forward();
        return h.scalar(l);
      };

      CHECK(tda::max_rel_err(analytic.at("p"), tda::finite_diff_grad(p, eval)) < 1e-4);
      ++total_cases;
      if (pc.params == 2) {
        CHECK(tda::max_rel_err(analytic.at("q"), tda::finite_diff_grad(q, eval)) < 1e-4);
        ++total_cases;
      }
    }
  }
  CHECK(total_cases >= 100);
}

TEST_CASE("stop_grad blocks the reverse pass") {
  Rng rng(5);
  Matrix p0 = randm(3, 4, rng);
  Graph g;
  const NodeId p = g.param("p", p0);
  const NodeId blocked = weighted_sum(g, g.stop_grad(g.tanh_op(p)), randm(3, 4, rng));
  g.forward();
  const Gradients grads = g.backward(blocked);
  CHECK(grads.at("p") == Matrix(3, 4, 0.0));
}

TEST_CASE("frozen params report exact zero gradients") {
  Rng rng(6);
  Matrix a0 = randm(2, 3, rng);
  Matrix b0 = randm(3, 2, rng);
  Graph g;
  const NodeId a = g.param("a", a0, /*trainable=*/true);
  const NodeId b = g.param("b", b0, /*trainable=*/false);
  const NodeId loss = g.col_mean(g.row_sum(g.matmul(a, b)));
  g.forward();
  const Gradients grads = g.backward(loss);
  CHECK(grads.at("b") == Matrix(3, 2, 0.0));
  bool any_nonzero = false;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) any_nonzero = any_nonzero || grads.at("a")(i, j) != 0.0;
  CHECK(any_nonzero);
}

TEST_CASE("re-registering a param name shares the node and accumulates gradient") {
  Rng rng(7);
  Matrix p0 = randm(2, 2, rng);
  Graph g;
  const NodeId p1 = g.param("p", p0);
  const NodeId p2 = g.param("p", p0);
  CHECK(p1 == p2);
  // p enters the loss twice; gradient must be the sum of both paths
  const NodeId loss = g.col_mean(g.row_sum(g.add(p1, p2)));
  g.forward();
  const Gradients grads = g.backward(loss);
  CHECK(grads.at("p") == Matrix(2, 2, 2.0 / 2.0));  // d/dp of mean over 2 rows of row sums

  Matrix other = randm(2, 3, rng);
  CHECK_THROWS_AS(g.param("p", other), tda::Error);
}

TEST_CASE("inputs must be bound with the declared shape") {
  Graph g;
  const NodeId x = g.input("x", 2, 2);
  const NodeId loss = g.col_mean(g.row_sum(x));
  CHECK_THROWS_AS(g.forward(), tda::Error);  // unbound

  Bindings wrong;
  wrong["x"] = Matrix(3, 2, 1.0);
  CHECK_THROWS_AS(g.forward(wrong), tda::ShapeError);

  Bindings ok;
  ok["x"] = Matrix(2, 2, 1.0);
  g.forward(ok);
  CHECK(g.scalar(loss) == 2.0);
}

TEST_CASE("shape errors at build time name the offending op") {
  Graph g;
  const NodeId a = g.constant(Matrix(2, 3, 1.0));
  const NodeId b = g.constant(Matrix(2, 3, 1.0));
  CHECK_THROWS_WITH_AS(static_cast<void>(g.matmul(a, b)),
                       doctest::Contains("matmul"), tda::ShapeError);
  CHECK_THROWS_AS(static_cast<void>(g.bias_add(a, a)), tda::ShapeError);
  CHECK_THROWS_AS(static_cast<void>(g.l1_row_diff(a, g.constant(Matrix(3, 3, 1.0)))),
                  tda::ShapeError);
}

TEST_CASE("non-finite intermediates abort the forward pass") {
  Graph g;
  const NodeId x = g.constant(Matrix(1, 1, 1000.0));
  static_cast<void>(g.exp_op(x));  // overflows to infinity
  CHECK_THROWS_AS(g.forward(), tda::NonFiniteError);
}

TEST_CASE("backward demands a computed scalar") {
  Graph g;
  const NodeId p = g.param("p", Matrix(2, 2, 1.0));
  const NodeId v = g.tanh_op(p);
  CHECK_THROWS_AS(static_cast<void>(g.backward(v)), tda::Error);  // before forward
  g.forward();
  CHECK_THROWS_AS(static_cast<void>(g.backward(v)), tda::Error);  // not 1 x 1
}

TEST_CASE("forward and backward are deterministic") {
  Rng rng(8);
  const Matrix p0 = randm(4, 4, rng);
  const Matrix w = randm(4, 4, rng);
  auto run = [&](Matrix& grad_out) {
    Graph g;
    const NodeId p = g.param("p", p0);
    const NodeId loss = weighted_sum(g, g.softmax(g.tanh_op(p)), w);
    g.forward();
    grad_out = g.backward(loss).at("p");
    return g.scalar(loss);
  };
  Matrix g1, g2;
  const double v1 = run(g1);
  const double v2 = run(g2);
  CHECK(v1 == v2);
  CHECK(g1 == g2);
}
