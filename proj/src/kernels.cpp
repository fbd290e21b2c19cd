#include <atomic>
#include <string>

#include "tda/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

// Dispatch layer: validates shapes, sizes outputs, then forwards to the
// active backend. The backends themselves assume valid inputs.

namespace tda::kernels {

namespace {

std::atomic<Backend> g_backend{
#ifdef _OPENMP
    Backend::openmp
#else
    Backend::serial
#endif
};

[[noreturn]] void shape_fail(const char* op, const Matrix& a, const Matrix& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " +
                   std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " and " +
                   std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

void require_same(const char* op, const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_fail(op, a, b);
}

void size_out(Matrix& out, int rows, int cols) {
  if (out.rows() != rows || out.cols() != cols) out = Matrix(rows, cols);
}

bool use_omp() { return g_backend.load() == Backend::openmp; }

}  // namespace

Backend active_backend() { return g_backend.load(); }

void set_backend(Backend b) {
  if (b == Backend::openmp && !openmp_available()) b = Backend::serial;
  g_backend.store(b);
}

bool openmp_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void matmul(const Matrix& a, bool ta, const Matrix& b, bool tb, Matrix& out, bool acc) {
  const int ar = ta ? a.cols() : a.rows();
  const int ac = ta ? a.rows() : a.cols();
  const int br = tb ? b.cols() : b.rows();
  const int bc = tb ? b.rows() : b.cols();
  if (ac != br) shape_fail("matmul", a, b);
  if (acc) {
    if (out.rows() != ar || out.cols() != bc) shape_fail("matmul accumulate", out, out);
  } else {
    size_out(out, ar, bc);
  }
  if (use_omp()) omp::matmul(a, ta, b, tb, out, acc);
  else serial::matmul(a, ta, b, tb, out, acc);
}

void add(const Matrix& a, const Matrix& b, Matrix& out) {
  require_same("add", a, b);
  size_out(out, a.rows(), a.cols());
  if (use_omp()) omp::add(a, b, out);
  else serial::add(a, b, out);
}

void sub(const Matrix& a, const Matrix& b, Matrix& out) {
  require_same("sub", a, b);
  size_out(out, a.rows(), a.cols());
  if (use_omp()) omp::sub(a, b, out);
  else serial::sub(a, b, out);
}

void hadamard(const Matrix& a, const Matrix& b, Matrix& out) {
  require_same("hadamard", a, b);
  size_out(out, a.rows(), a.cols());
  if (use_omp()) omp::hadamard(a, b, out);
  else serial::hadamard(a, b, out);
}

void scale(const Matrix& a, double c, Matrix& out) {
  size_out(out, a.rows(), a.cols());
  if (use_omp()) omp::scale(a, c, out);
  else serial::scale(a, c, out);
}

void accumulate(Matrix& grad, const Matrix& g) {
  require_same("accumulate", grad, g);
  if (use_omp()) omp::accumulate(grad, g);
  else serial::accumulate(grad, g);
}

void accumulate_scaled(Matrix& grad, const Matrix& g, double c) {
  require_same("accumulate_scaled", grad, g);
  if (use_omp()) omp::accumulate_scaled(grad, g, c);
  else serial::accumulate_scaled(grad, g, c);
}

void bias_add(const Matrix& x, const Matrix& bias, Matrix& out) {
  if (bias.rows() != 1 || bias.cols() != x.cols()) shape_fail("bias_add", x, bias);
  size_out(out, x.rows(), x.cols());
  if (use_omp()) omp::bias_add(x, bias, out);
  else serial::bias_add(x, bias, out);
}

void col_sum_acc(const Matrix& g, Matrix& out) {
  if (out.rows() != 1 || out.cols() != g.cols()) shape_fail("col_sum_acc", g, out);
  if (use_omp()) omp::col_sum_acc(g, out);
  else serial::col_sum_acc(g, out);
}

void leaky_relu(const Matrix& x, double slope, Matrix& out) {
  size_out(out, x.rows(), x.cols());
  if (use_omp()) omp::leaky_relu(x, slope, out);
  else serial::leaky_relu(x, slope, out);
}

void leaky_relu_grad_acc(const Matrix& x, const Matrix& g, double slope, Matrix& gx) {
  require_same("leaky_relu_grad", x, g);
  require_same("leaky_relu_grad", x, gx);
  if (use_omp()) omp::leaky_relu_grad_acc(x, g, slope, gx);
  else serial::leaky_relu_grad_acc(x, g, slope, gx);
}

void tanh_fwd(const Matrix& x, Matrix& out) {
  size_out(out, x.rows(), x.cols());
  if (use_omp()) omp::tanh_fwd(x, out);
  else serial::tanh_fwd(x, out);
}

void tanh_grad_acc(const Matrix& y, const Matrix& g, Matrix& gx) {
  require_same("tanh_grad", y, g);
  require_same("tanh_grad", y, gx);
  if (use_omp()) omp::tanh_grad_acc(y, g, gx);
  else serial::tanh_grad_acc(y, g, gx);
}

void exp_fwd(const Matrix& x, Matrix& out) {
  size_out(out, x.rows(), x.cols());
  if (use_omp()) omp::exp_fwd(x, out);
  else serial::exp_fwd(x, out);
}

void exp_grad_acc(const Matrix& y, const Matrix& g, Matrix& gx) {
  require_same("exp_grad", y, g);
  require_same("exp_grad", y, gx);
  if (use_omp()) omp::exp_grad_acc(y, g, gx);
  else serial::exp_grad_acc(y, g, gx);
}

void log_clamped(const Matrix& x, Matrix& out) {
  size_out(out, x.rows(), x.cols());
  if (use_omp()) omp::log_clamped(x, out);
  else serial::log_clamped(x, out);
}

void log_clamped_grad_acc(const Matrix& x, const Matrix& g, Matrix& gx) {
  require_same("log_clamped_grad", x, g);
  require_same("log_clamped_grad", x, gx);
  if (use_omp()) omp::log_clamped_grad_acc(x, g, gx);
  else serial::log_clamped_grad_acc(x, g, gx);
}

void clamp_band(const Matrix& x, double lo, double hi, Matrix& out) {
  size_out(out, x.rows(), x.cols());
  if (use_omp()) omp::clamp_band(x, lo, hi, out);
  else serial::clamp_band(x, lo, hi, out);
}

void clamp_band_grad_acc(const Matrix& x, const Matrix& g, double lo, double hi, Matrix& gx) {
  require_same("clamp_band_grad", x, g);
  require_same("clamp_band_grad", x, gx);
  if (use_omp()) omp::clamp_band_grad_acc(x, g, lo, hi, gx);
  else serial::clamp_band_grad_acc(x, g, lo, hi, gx);
}

void softmax_rows(const Matrix& x, Matrix& out) {
  if (x.cols() < 1) throw ShapeError("softmax_rows: needs at least one column");
  size_out(out, x.rows(), x.cols());
  if (use_omp()) omp::softmax_rows(x, out);
  else serial::softmax_rows(x, out);
}

void softmax_rows_grad_acc(const Matrix& y, const Matrix& g, Matrix& gx) {
  require_same("softmax_grad", y, g);
  require_same("softmax_grad", y, gx);
  if (use_omp()) omp::softmax_rows_grad_acc(y, g, gx);
  else serial::softmax_rows_grad_acc(y, g, gx);
}

void row_sum(const Matrix& x, Matrix& out) {
  size_out(out, x.rows(), 1);
  if (use_omp()) omp::row_sum(x, out);
  else serial::row_sum(x, out);
}

void row_sum_grad_acc(const Matrix& g, Matrix& gx) {
  if (g.rows() != gx.rows() || g.cols() != 1) shape_fail("row_sum_grad", g, gx);
  if (use_omp()) omp::row_sum_grad_acc(g, gx);
  else serial::row_sum_grad_acc(g, gx);
}

void col_mean(const Matrix& x, Matrix& out) {
  if (x.rows() < 1) throw ShapeError("col_mean: needs at least one row");
  size_out(out, 1, x.cols());
  if (use_omp()) omp::col_mean(x, out);
  else serial::col_mean(x, out);
}

void col_mean_grad_acc(const Matrix& g, Matrix& gx) {
  if (g.cols() != gx.cols() || g.rows() != 1) shape_fail("col_mean_grad", g, gx);
  if (use_omp()) omp::col_mean_grad_acc(g, gx);
  else serial::col_mean_grad_acc(g, gx);
}

void l1_row_diff(const Matrix& a, const Matrix& b, Matrix& out) {
  require_same("l1_row_diff", a, b);
  size_out(out, a.rows(), 1);
  if (use_omp()) omp::l1_row_diff(a, b, out);
  else serial::l1_row_diff(a, b, out);
}

void l1_row_diff_grad_acc(const Matrix& a, const Matrix& b, const Matrix& g,
                          Matrix& ga, Matrix& gb) {
  require_same("l1_row_diff_grad", a, b);
  require_same("l1_row_diff_grad", a, ga);
  require_same("l1_row_diff_grad", a, gb);
  if (g.rows() != a.rows() || g.cols() != 1) shape_fail("l1_row_diff_grad", a, g);
  if (use_omp()) omp::l1_row_diff_grad_acc(a, b, g, ga, gb);
  else serial::l1_row_diff_grad_acc(a, b, g, ga, gb);
}

void adam_step(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, long t,
               double alpha, double beta1, double beta2, double epsilon) {
  require_same("adam_step", param, grad);
  require_same("adam_step", param, m);
  require_same("adam_step", param, v);
  if (t < 1) throw Error("adam_step: step count must be >= 1");
  if (use_omp()) omp::adam_step(param, grad, m, v, t, alpha, beta1, beta2, epsilon);
  else serial::adam_step(param, grad, m, v, t, alpha, beta1, beta2, epsilon);
}

bool all_finite(const Matrix& x) {
  if (use_omp()) return omp::all_finite(x);
  return serial::all_finite(x);
}

}  // namespace tda::kernels
