#include <cmath>
#include <doctest.h>

#include "tda/adam.hpp"
#include "tda/rng.hpp"

using tda::AdamConfig;
using tda::AdamState;
using tda::Matrix;

TEST_CASE("zero gradients leave a fresh state's parameters bit-identical") {
  tda::Rng rng(1);
  Matrix w = tda::sample_standard_normal(rng, 3, 4);
  Matrix b = tda::sample_standard_normal(rng, 1, 4);
  const Matrix w0 = w, b0 = b;
  AdamState st(AdamConfig{}, {&w, &b});
  const Matrix gw(3, 4), gb(1, 4);
  st.step({&w, &b}, {&gw, &gb});
  CHECK(w == w0);
  CHECK(b == b0);
  CHECK(st.t() == 1);
}

TEST_CASE("first step moves by about alpha in the gradient direction") {
  Matrix w(2, 1);
  w(0, 0) = 1.0;
  w(1, 0) = -1.0;
  AdamConfig cfg;
  AdamState st(cfg, {&w});
  Matrix g(2, 1);
  g(0, 0) = 0.5;
  g(1, 0) = -0.125;
  st.step({&w}, {&g});
  CHECK(std::abs((1.0 - w(0, 0)) - cfg.alpha) < 1e-10);
  CHECK(std::abs((w(1, 0) + 1.0) - cfg.alpha) < 1e-10);
}

TEST_CASE("t advances by exactly one per step and moments stay shaped") {
  Matrix w(2, 2, 1.0);
  AdamState st(AdamConfig{}, {&w});
  const Matrix g(2, 2, 0.25);
  for (int i = 1; i <= 5; ++i) {
    st.step({&w}, {&g});
    CHECK(st.t() == i);
  }
  CHECK(st.first_moment(0).rows() == 2);
  CHECK(st.second_moment(0).cols() == 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(st.second_moment(0)(i, j) >= 0.0);
}

TEST_CASE("group size and shape mismatches are rejected") {
  Matrix w(2, 2), other(3, 3);
  AdamState st(AdamConfig{}, {&w});
  const Matrix g(2, 2), g_bad(3, 3);
  CHECK_THROWS_AS(st.step({&w, &other}, {&g, &g_bad}), tda::Error);
  CHECK_THROWS_AS(st.step({&w}, {&g_bad}), tda::Error);
}

TEST_CASE("optimizing a quadratic shrinks the iterate") {
  Matrix w(1, 1);
  w(0, 0) = 1.0;
  AdamConfig cfg;
  cfg.alpha = 0.01;
  AdamState st(cfg, {&w});
  Matrix g(1, 1);
  double last_sampled = 1.0;
  for (int t = 1; t <= 100; ++t) {
    g(0, 0) = 2.0 * w(0, 0);
    st.step({&w}, {&g});
    if (t % 10 == 0) {
      CHECK(std::abs(w(0, 0)) < last_sampled);
      last_sampled = std::abs(w(0, 0));
    }
  }
}
