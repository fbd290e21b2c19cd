#pragma once

#include "tda/matrix.hpp"

namespace tda::kernels {

/// Two interchangeable backends: a plain serial reference and an OpenMP
/// variant. Both use identical per-element arithmetic and identical
/// accumulation order (OpenMP parallelism is only ever across independent
/// output elements), so every kernel is bit-identical across backends and
/// thread counts. The serial backend is the reference the OpenMP one is
/// tested against.
enum class Backend { serial, openmp };

Backend active_backend();
void set_backend(Backend b);  // openmp silently falls back when not compiled in
bool openmp_available();
int max_threads();

// Conventions: forward kernels overwrite `out` (the dispatch layer sizes
// it), *_grad_acc kernels accumulate (+=) into their gradient argument.

void matmul(const Matrix& a, bool trans_a, const Matrix& b, bool trans_b,
            Matrix& out, bool accumulate = false);
void add(const Matrix& a, const Matrix& b, Matrix& out);
void sub(const Matrix& a, const Matrix& b, Matrix& out);
void hadamard(const Matrix& a, const Matrix& b, Matrix& out);
void scale(const Matrix& a, double c, Matrix& out);
void accumulate(Matrix& grad, const Matrix& g);                    // grad += g
void accumulate_scaled(Matrix& grad, const Matrix& g, double c);   // grad += c*g
void bias_add(const Matrix& x, const Matrix& bias, Matrix& out);   // bias is 1 x m
void col_sum_acc(const Matrix& g, Matrix& out);                    // out(1 x m) += column sums

void leaky_relu(const Matrix& x, double slope, Matrix& out);
void leaky_relu_grad_acc(const Matrix& x, const Matrix& g, double slope, Matrix& gx);
void tanh_fwd(const Matrix& x, Matrix& out);
void tanh_grad_acc(const Matrix& y, const Matrix& g, Matrix& gx);  // y = tanh(x)
void exp_fwd(const Matrix& x, Matrix& out);
void exp_grad_acc(const Matrix& y, const Matrix& g, Matrix& gx);   // y = exp(x)

/// ln(clamp(x, kProbFloor, 1)); gradient passes 1/x inside the band, 0 outside.
void log_clamped(const Matrix& x, Matrix& out);
void log_clamped_grad_acc(const Matrix& x, const Matrix& g, Matrix& gx);
void clamp_band(const Matrix& x, double lo, double hi, Matrix& out);
void clamp_band_grad_acc(const Matrix& x, const Matrix& g, double lo, double hi, Matrix& gx);

/// Row-wise softmax with max subtraction; exponentials are floored at
/// 1e-300 so outputs are strictly positive.
void softmax_rows(const Matrix& x, Matrix& out);
void softmax_rows_grad_acc(const Matrix& y, const Matrix& g, Matrix& gx);  // y = softmax(x)

void row_sum(const Matrix& x, Matrix& out);   // n x m -> n x 1
void row_sum_grad_acc(const Matrix& g, Matrix& gx);
void col_mean(const Matrix& x, Matrix& out);  // n x m -> 1 x m
void col_mean_grad_acc(const Matrix& g, Matrix& gx);

/// Per-row L1 distance, n x m pairs -> n x 1. Subgradient uses sign with
/// sign(0) = 0.
void l1_row_diff(const Matrix& a, const Matrix& b, Matrix& out);
void l1_row_diff_grad_acc(const Matrix& a, const Matrix& b, const Matrix& g,
                          Matrix& ga, Matrix& gb);

/// One bias-corrected adaptive-moment update, in place. t is the step count
/// after incrementing (t >= 1).
void adam_step(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, long t,
               double alpha, double beta1, double beta2, double epsilon);

bool all_finite(const Matrix& x);

inline constexpr double kProbFloor = 1e-7;
inline constexpr double kExpFloor = 1e-300;

// The two backends expose the same surface; code outside the tests should
// go through the dispatching wrappers above.
namespace serial {
void matmul(const Matrix& a, bool ta, const Matrix& b, bool tb, Matrix& out, bool acc);
void add(const Matrix& a, const Matrix& b, Matrix& out);
void sub(const Matrix& a, const Matrix& b, Matrix& out);
void hadamard(const Matrix& a, const Matrix& b, Matrix& out);
void scale(const Matrix& a, double c, Matrix& out);
void accumulate(Matrix& grad, const Matrix& g);
void accumulate_scaled(Matrix& grad, const Matrix& g, double c);
void bias_add(const Matrix& x, const Matrix& bias, Matrix& out);
void col_sum_acc(const Matrix& g, Matrix& out);
void leaky_relu(const Matrix& x, double slope, Matrix& out);
void leaky_relu_grad_acc(const Matrix& x, const Matrix& g, double slope, Matrix& gx);
void tanh_fwd(const Matrix& x, Matrix& out);
void tanh_grad_acc(const Matrix& y, const Matrix& g, Matrix& gx);
void exp_fwd(const Matrix& x, Matrix& out);
void exp_grad_acc(const Matrix& y, const Matrix& g, Matrix& gx);
void log_clamped(const Matrix& x, Matrix& out);
void log_clamped_grad_acc(const Matrix& x, const Matrix& g, Matrix& gx);
void clamp_band(const Matrix& x, double lo, double hi, Matrix& out);
void clamp_band_grad_acc(const Matrix& x, const Matrix& g, double lo, double hi, Matrix& gx);
void softmax_rows(const Matrix& x, Matrix& out);
void softmax_rows_grad_acc(const Matrix& y, const Matrix& g, Matrix& gx);
void row_sum(const Matrix& x, Matrix& out);
void row_sum_grad_acc(const Matrix& g, Matrix& gx);
void col_mean(const Matrix& x, Matrix& out);
void col_mean_grad_acc(const Matrix& g, Matrix& gx);
void l1_row_diff(const Matrix& a, const Matrix& b, Matrix& out);
void l1_row_diff_grad_acc(const Matrix& a, const Matrix& b, const Matrix& g, Matrix& ga, Matrix& gb);
void adam_step(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, long t,
               double alpha, double beta1, double beta2, double epsilon);
bool all_finite(const Matrix& x);
}  // namespace serial

namespace omp {
void matmul(const Matrix& a, bool ta, const Matrix& b, bool tb, Matrix& out, bool acc);
void add(const Matrix& a, const Matrix& b, Matrix& out);
void sub(const Matrix& a, const Matrix& b, Matrix& out);
void hadamard(const Matrix& a, const Matrix& b, Matrix& out);
void scale(const Matrix& a, double c, Matrix& out);
void accumulate(Matrix& grad, const Matrix& g);
void accumulate_scaled(Matrix& grad, const Matrix& g, double c);
void bias_add(const Matrix& x, const Matrix& bias, Matrix& out);
void col_sum_acc(const Matrix& g, Matrix& out);
void leaky_relu(const Matrix& x, double slope, Matrix& out);
void leaky_relu_grad_acc(const Matrix& x, const Matrix& g, double slope, Matrix& gx);
void tanh_fwd(const Matrix& x, Matrix& out);
void tanh_grad_acc(const Matrix& y, const Matrix& g, Matrix& gx);
void exp_fwd(const Matrix& x, Matrix& out);
void exp_grad_acc(const Matrix& y, const Matrix& g, Matrix& gx);
void log_clamped(const Matrix& x, Matrix& out);
void log_clamped_grad_acc(const Matrix& x, const Matrix& g, Matrix& gx);
void clamp_band(const Matrix& x, double lo, double hi, Matrix& out);
void clamp_band_grad_acc(const Matrix& x, const Matrix& g, double lo, double hi, Matrix& gx);
void softmax_rows(const Matrix& x, Matrix& out);
void softmax_rows_grad_acc(const Matrix& y, const Matrix& g, Matrix& gx);
void row_sum(const Matrix& x, Matrix& out);
void row_sum_grad_acc(const Matrix& g, Matrix& gx);
void col_mean(const Matrix& x, Matrix& out);
void col_mean_grad_acc(const Matrix& g, Matrix& gx);
void l1_row_diff(const Matrix& a, const Matrix& b, Matrix& out);
void l1_row_diff_grad_acc(const Matrix& a, const Matrix& b, const Matrix& g, Matrix& ga, Matrix& gb);
void adam_step(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, long t,
               double alpha, double beta1, double beta2, double epsilon);
bool all_finite(const Matrix& x);
}  // namespace omp

}  // namespace tda::kernels
