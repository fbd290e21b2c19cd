// Times the serial reference kernels against the OpenMP backend on shapes
// near the training workload and checks both produce identical bits.
//
//   kernel_bench [reps] [rows] [inner] [cols]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "tda/kernels.hpp"
#include "tda/rng.hpp"

namespace {

using tda::Matrix;

double time_best(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

Matrix random_matrix(int rows, int cols, tda::Rng& rng) {
  Matrix m(rows, cols);
  tda::fill_standard_normal(rng, m.data(), static_cast<std::size_t>(m.rows()) * m.cols());
  return m;
}

int g_mismatches = 0;

void report(const char* name, const char* shape, double serial_s, double omp_s,
            bool identical) {
  std::printf("%-22s %-18s %10.3f us %10.3f us  x%-5.2f %s\n", name, shape,
              serial_s * 1e6, omp_s * 1e6, serial_s / omp_s, identical ? "" : "MISMATCH");
  if (!identical) ++g_mismatches;
}

}  // namespace

int main(int argc, char** argv) {
  namespace k = tda::kernels;
  const int reps = argc > 1 ? std::atoi(argv[1]) : 20;
  const int n = argc > 2 ? std::atoi(argv[2]) : 512;
  const int inner = argc > 3 ? std::atoi(argv[3]) : 256;
  const int m = argc > 4 ? std::atoi(argv[4]) : 256;

  std::printf("openmp %s, %d thread(s), best of %d reps\n\n",
              k::openmp_available() ? "available" : "NOT COMPILED IN", k::max_threads(),
              reps);
  std::printf("%-22s %-18s %13s %13s  %-6s\n", "kernel", "shape", "serial", "openmp",
              "speedup");

  tda::Rng rng(7);
  char shape[64];

  {
    const Matrix a = random_matrix(n, inner, rng);
    const Matrix b = random_matrix(inner, m, rng);
    Matrix out_s(n, m), out_o(n, m);
    const double ts = time_best([&] { k::serial::matmul(a, false, b, false, out_s, false); }, reps);
    const double to = time_best([&] { k::omp::matmul(a, false, b, false, out_o, false); }, reps);
    std::snprintf(shape, sizeof shape, "%dx%d * %dx%d", n, inner, inner, m);
    report("matmul", shape, ts, to, out_s == out_o);
  }
  {
    const Matrix a = random_matrix(n, inner, rng);
    const Matrix b = random_matrix(m, inner, rng);
    Matrix out_s(n, m), out_o(n, m);
    const double ts = time_best([&] { k::serial::matmul(a, false, b, true, out_s, false); }, reps);
    const double to = time_best([&] { k::omp::matmul(a, false, b, true, out_o, false); }, reps);
    std::snprintf(shape, sizeof shape, "%dx%d * (%dx%d)'", n, inner, m, inner);
    report("matmul (b transposed)", shape, ts, to, out_s == out_o);
  }
  {
    const Matrix x = random_matrix(n, m, rng);
    Matrix out_s(n, m), out_o(n, m);
    const double ts = time_best([&] { k::serial::leaky_relu(x, 0.2, out_s); }, reps);
    const double to = time_best([&] { k::omp::leaky_relu(x, 0.2, out_o); }, reps);
    std::snprintf(shape, sizeof shape, "%dx%d", n, m);
    report("leaky_relu", shape, ts, to, out_s == out_o);
  }
  {
    const Matrix x = random_matrix(n, m, rng);
    Matrix out_s(n, m), out_o(n, m);
    const double ts = time_best([&] { k::serial::softmax_rows(x, out_s); }, reps);
    const double to = time_best([&] { k::omp::softmax_rows(x, out_o); }, reps);
    std::snprintf(shape, sizeof shape, "%dx%d", n, m);
    report("softmax_rows", shape, ts, to, out_s == out_o);
  }
  {
    const Matrix y = random_matrix(n, m, rng);
    const Matrix g = random_matrix(n, m, rng);
    Matrix gx_s(n, m), gx_o(n, m);
    gx_s.fill(0.0);
    gx_o.fill(0.0);
    const double ts = time_best([&] { k::serial::softmax_rows_grad_acc(y, g, gx_s); }, reps);
    const double to = time_best([&] { k::omp::softmax_rows_grad_acc(y, g, gx_o); }, reps);
    std::snprintf(shape, sizeof shape, "%dx%d", n, m);
    report("softmax_rows_grad", shape, ts, to, gx_s == gx_o);
  }
  {
    const Matrix x = random_matrix(n, m, rng);
    const Matrix bias = random_matrix(1, m, rng);
    Matrix out_s(n, m), out_o(n, m);
    const double ts = time_best([&] { k::serial::bias_add(x, bias, out_s); }, reps);
    const double to = time_best([&] { k::omp::bias_add(x, bias, out_o); }, reps);
    std::snprintf(shape, sizeof shape, "%dx%d", n, m);
    report("bias_add", shape, ts, to, out_s == out_o);
  }
  {
    const Matrix grad = random_matrix(n, m, rng);
    Matrix p_s = random_matrix(n, m, rng);
    Matrix p_o = p_s;
    Matrix m1_s(n, m), v_s(n, m), m1_o(n, m), v_o(n, m);
    m1_s.fill(0.0);
    v_s.fill(0.0);
    m1_o.fill(0.0);
    v_o.fill(0.0);
    long t_s = 0, t_o = 0;
    const double ts = time_best(
        [&] { k::serial::adam_step(p_s, grad, m1_s, v_s, ++t_s, 2e-4, 0.5, 0.999, 1e-8); },
        reps);
    const double to = time_best(
        [&] { k::omp::adam_step(p_o, grad, m1_o, v_o, ++t_o, 2e-4, 0.5, 0.999, 1e-8); },
        reps);
    std::snprintf(shape, sizeof shape, "%dx%d", n, m);
    report("adam_step", shape, ts, to, t_s == t_o && p_s == p_o && m1_s == m1_o && v_s == v_o);
  }

  if (g_mismatches) {
    std::fprintf(stderr, "\n%d kernel(s) disagreed between backends\n", g_mismatches);
    return 1;
  }
  return 0;
}
