#include <cmath>
#include <doctest.h>

#include "tda/kernels.hpp"
#include "tda/rng.hpp"

using tda::Matrix;
namespace k = tda::kernels;

namespace {

Matrix randm(int rows, int cols, std::uint64_t seed) {
  tda::Rng rng(seed);
  return tda::sample_standard_normal(rng, rows, cols);
}

}  // namespace

TEST_CASE("matmul matches hand arithmetic") {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{1}, {1}});
  Matrix out;
  k::matmul(a, false, b, false, out, false);
  CHECK(out == Matrix::from_rows({{3}, {7}}));
}

TEST_CASE("matmul transpose variants agree with explicit transposition") {
  const Matrix a = randm(5, 3, 11);
  const Matrix b = randm(5, 4, 12);
  Matrix at(3, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) at(j, i) = a(i, j);

  Matrix want, got;
  k::matmul(at, false, b, false, want, false);  // (3x5)(5x4)
  k::matmul(a, true, b, false, got, false);
  CHECK(got == want);

  const Matrix c = randm(4, 3, 13);
  Matrix ct(3, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) ct(j, i) = c(i, j);
  k::matmul(b, false, ct, false, want, false);  // (5x4)(4x3)
  k::matmul(b, false, c, true, got, false);
  CHECK(got == want);
}

TEST_CASE("matmul accumulate adds onto the output") {
  const Matrix a = randm(3, 2, 21);
  const Matrix b = randm(2, 3, 22);
  Matrix base = randm(3, 3, 23);
  Matrix plain;
  k::matmul(a, false, b, false, plain, false);
  Matrix acc = base;
  k::matmul(a, false, b, false, acc, true);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(acc(i, j) == base(i, j) + plain(i, j));
}

TEST_CASE("matmul rejects mismatched inner dimensions") {
  const Matrix a(2, 3), b(4, 2);
  Matrix out;
  CHECK_THROWS_AS(k::matmul(a, false, b, false, out, false), tda::ShapeError);
}

TEST_CASE("elementwise ops check shapes") {
  const Matrix a(2, 3), b(3, 2);
  Matrix out;
  CHECK_THROWS_AS(k::add(a, b, out), tda::ShapeError);
  CHECK_THROWS_AS(k::sub(a, b, out), tda::ShapeError);
  CHECK_THROWS_AS(k::hadamard(a, b, out), tda::ShapeError);
}

TEST_CASE("bias_add broadcasts one row") {
  const Matrix x = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix bias = Matrix::from_rows({{10, 20}});
  Matrix out;
  k::bias_add(x, bias, out);
  CHECK(out == Matrix::from_rows({{11, 22}, {13, 24}}));
  const Matrix bad(2, 2);
  Matrix o2;
  CHECK_THROWS_AS(k::bias_add(x, bad, o2), tda::ShapeError);
}

TEST_CASE("softmax closed forms") {
  Matrix out;
  k::softmax_rows(Matrix::from_rows({{0, 0}}), out);
  CHECK(out(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out(0, 1) == doctest::Approx(0.5).epsilon(1e-12));

  k::softmax_rows(Matrix::from_rows({{std::log(2.0), 0.0}}), out);
  CHECK(out(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(out(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("softmax rows are positive and sum to one, even for huge logits") {
  Matrix x = randm(40, 7, 31);
  x(0, 0) = 1000.0;
  x(1, 3) = -1000.0;
  x(2, 0) = 700.0;
  x(2, 1) = -700.0;
  Matrix out;
  k::softmax_rows(x, out);
  for (int i = 0; i < x.rows(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < x.cols(); ++j) {
      CHECK(out(i, j) > 0.0);
      sum += out(i, j);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("log_clamped floors its argument") {
  Matrix out;
  k::log_clamped(Matrix::from_rows({{1.0, 0.5, 0.0, 1e-12}}), out);
  CHECK(out(0, 0) == 0.0);
  CHECK(out(0, 1) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  CHECK(out(0, 2) == doctest::Approx(std::log(1e-7)).epsilon(1e-15));
  CHECK(out(0, 3) == doctest::Approx(std::log(1e-7)).epsilon(1e-15));

  // gradient passes only inside the band
  const Matrix x = Matrix::from_rows({{0.5, 0.0, 2.0}});
  const Matrix g = Matrix::from_rows({{1.0, 1.0, 1.0}});
  Matrix gx(1, 3);
  k::log_clamped_grad_acc(x, g, gx);
  CHECK(gx(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(gx(0, 1) == 0.0);
  CHECK(gx(0, 2) == 0.0);
}

TEST_CASE("clamp_band pins values and blocks gradient outside") {
  Matrix out;
  k::clamp_band(Matrix::from_rows({{-1.0, 0.3, 2.0}}), 0.0, 1.0, out);
  CHECK(out == Matrix::from_rows({{0.0, 0.3, 1.0}}));
  const Matrix g = Matrix::from_rows({{5.0, 5.0, 5.0}});
  Matrix gx(1, 3);
  k::clamp_band_grad_acc(Matrix::from_rows({{-1.0, 0.3, 2.0}}), g, 0.0, 1.0, gx);
  CHECK(gx == Matrix::from_rows({{0.0, 5.0, 0.0}}));
}

TEST_CASE("l1_row_diff and its sign(0) = 0 subgradient") {
  const Matrix a = Matrix::from_rows({{1.0, 2.0}, {3.0, 3.0}});
  const Matrix b = Matrix::from_rows({{2.0, 0.5}, {3.0, 3.0}});
  Matrix out;
  k::l1_row_diff(a, b, out);
  CHECK(out(0, 0) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(out(1, 0) == 0.0);

  const Matrix g = Matrix::from_rows({{1.0}, {1.0}});
  Matrix ga(2, 2), gb(2, 2);
  k::l1_row_diff_grad_acc(a, b, g, ga, gb);
  CHECK(ga == Matrix::from_rows({{-1.0, 1.0}, {0.0, 0.0}}));
  CHECK(gb == Matrix::from_rows({{1.0, -1.0}, {0.0, 0.0}}));
}

TEST_CASE("row_sum and col_mean shapes and values") {
  const Matrix x = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  Matrix rs, cm;
  k::row_sum(x, rs);
  k::col_mean(x, cm);
  CHECK(rs == Matrix::from_rows({{6}, {15}}));
  CHECK(cm == Matrix::from_rows({{2.5, 3.5, 4.5}}));
}

TEST_CASE("adam_step: zero gradient with zero moments is a fixed point") {
  Matrix p = randm(4, 3, 41);
  const Matrix p0 = p;
  Matrix grad(4, 3), m(4, 3), v(4, 3);
  k::adam_step(p, grad, m, v, 1, 2e-4, 0.5, 0.999, 1e-8);
  CHECK(p == p0);
}

TEST_CASE("adam_step: first-step magnitude is about alpha") {
  Matrix p(1, 1), grad(1, 1), m(1, 1), v(1, 1);
  p(0, 0) = 1.0;
  grad(0, 0) = 0.5;
  k::adam_step(p, grad, m, v, 1, 2e-4, 0.5, 0.999, 1e-8);
  // bias-corrected m^ = g and sqrt(v^) = |g|, so the update is alpha * sign(g)
  // up to epsilon
  CHECK(std::abs((1.0 - p(0, 0)) - 2e-4) < 1e-10);
}

TEST_CASE("adam drives |w| down on a quadratic") {
  Matrix w(1, 1), grad(1, 1), m(1, 1), v(1, 1);
  w(0, 0) = 1.0;
  double sampled = std::abs(w(0, 0));
  for (long t = 1; t <= 100; ++t) {
    grad(0, 0) = 2.0 * w(0, 0);
    k::adam_step(w, grad, m, v, t, 0.01, 0.5, 0.999, 1e-8);
    if (t % 10 == 0) {
      CHECK(std::abs(w(0, 0)) < sampled);
      sampled = std::abs(w(0, 0));
    }
  }
}

TEST_CASE("all_finite flags NaN and infinity") {
  Matrix x = randm(3, 3, 51);
  CHECK(k::all_finite(x));
  x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(k::all_finite(x));
  x(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_FALSE(k::all_finite(x));
}

TEST_CASE("serial and openmp backends produce identical bits") {
  // sizes straddle the parallel-dispatch grain on purpose
  const int cases[][3] = {{3, 5, 4}, {17, 9, 13}, {150, 160, 170}};
  for (const auto& c : cases) {
    const int n = c[0], p = c[1], q = c[2];
    const Matrix a = randm(n, p, 100 + n);
    const Matrix b = randm(p, q, 200 + n);
    const Matrix bt = randm(q, p, 300 + n);
    const Matrix at = randm(p, n, 400 + n);
    const Matrix x = randm(n, q, 500 + n);
    const Matrix y = randm(n, q, 600 + n);
    const Matrix bias = randm(1, q, 700 + n);
    Matrix s, o;

    k::serial::matmul(a, false, b, false, s, false);
    k::omp::matmul(a, false, b, false, o, false);
    CHECK(s == o);
    k::serial::matmul(a, false, bt, true, s, false);
    k::omp::matmul(a, false, bt, true, o, false);
    CHECK(s == o);
    k::serial::matmul(at, true, b, false, s, false);
    k::omp::matmul(at, true, b, false, o, false);
    CHECK(s == o);

    k::serial::add(x, y, s);
    k::omp::add(x, y, o);
    CHECK(s == o);
    k::serial::hadamard(x, y, s);
    k::omp::hadamard(x, y, o);
    CHECK(s == o);
    k::serial::bias_add(x, bias, s);
    k::omp::bias_add(x, bias, o);
    CHECK(s == o);

    k::serial::leaky_relu(x, 0.2, s);
    k::omp::leaky_relu(x, 0.2, o);
    CHECK(s == o);
    k::serial::tanh_fwd(x, s);
    k::omp::tanh_fwd(x, o);
    CHECK(s == o);
    k::serial::softmax_rows(x, s);
    k::omp::softmax_rows(x, o);
    CHECK(s == o);

    Matrix gs(n, q), go(n, q);
    k::serial::softmax_rows_grad_acc(s, y, gs);
    k::omp::softmax_rows_grad_acc(o, y, go);
    CHECK(gs == go);

    k::serial::row_sum(x, s);
    k::omp::row_sum(x, o);
    CHECK(s == o);
    k::serial::col_mean(x, s);
    k::omp::col_mean(x, o);
    CHECK(s == o);
    k::serial::l1_row_diff(x, y, s);
    k::omp::l1_row_diff(x, y, o);
    CHECK(s == o);

    Matrix ps = randm(n, q, 800 + n), po = ps;
    Matrix ms(n, q), vs(n, q), mo(n, q), vo(n, q);
    k::serial::adam_step(ps, y, ms, vs, 3, 2e-4, 0.5, 0.999, 1e-8);
    k::omp::adam_step(po, y, mo, vo, 3, 2e-4, 0.5, 0.999, 1e-8);
    CHECK(ps == po);
    CHECK(ms == mo);
    CHECK(vs == vo);
  }
}

TEST_CASE("backend dispatch honors set_backend") {
  const k::Backend before = k::active_backend();
  k::set_backend(k::Backend::serial);
  CHECK(k::active_backend() == k::Backend::serial);
  k::set_backend(k::Backend::openmp);
  CHECK((k::active_backend() == k::Backend::openmp) == k::openmp_available());
  k::set_backend(before);
}
