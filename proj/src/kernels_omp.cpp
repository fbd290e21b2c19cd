#include <cmath>

#include "tda/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

// OpenMP backend. Parallelism is always across independent output rows or
// elements and each output element is produced by exactly one thread with
// the same inner accumulation order as the serial reference, so results are
// bit-identical to it for any thread count. Small workloads stay on one
// thread via the if() clauses.

namespace tda::kernels::omp {

namespace {
constexpr long kGrain = 16 * 1024;  // flops below this are not worth a team
}

void matmul(const Matrix& a, bool ta, const Matrix& b, bool tb, Matrix& out, bool acc) {
  const int n = out.rows();
  const int m = out.cols();
  const int kk = ta ? a.rows() : a.cols();
  if (!acc) out.fill(0.0);
  const long work = static_cast<long>(n) * m * kk;
  if (!ta && !tb) {
#pragma omp parallel for schedule(static) if (work >= kGrain)
    for (int i = 0; i < n; ++i) {
      const double* arow = a.row(i);
      double* crow = out.row(i);
      for (int k = 0; k < kk; ++k) {
        const double av = arow[k];
        const double* brow = b.row(k);
        for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
      }
    }
  } else if (!ta && tb) {
#pragma omp parallel for schedule(static) if (work >= kGrain)
    for (int i = 0; i < n; ++i) {
      const double* arow = a.row(i);
      double* crow = out.row(i);
      for (int j = 0; j < m; ++j) {
        const double* brow = b.row(j);
        double s = 0.0;
        for (int k = 0; k < kk; ++k) s += arow[k] * brow[k];
        crow[j] += s;
      }
    }
  } else if (ta && !tb) {
#pragma omp parallel for schedule(static) if (work >= kGrain)
    for (int i = 0; i < n; ++i) {
      double* crow = out.row(i);
      for (int k = 0; k < kk; ++k) {
        const double av = a(k, i);
        const double* brow = b.row(k);
        for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
      }
    }
  } else {
#pragma omp parallel for schedule(static) if (work >= kGrain)
    for (int i = 0; i < n; ++i) {
      double* crow = out.row(i);
      for (int j = 0; j < m; ++j) {
        const double* brow = b.row(j);
        double s = 0.0;
        for (int k = 0; k < kk; ++k) s += a(k, i) * brow[k];
        crow[j] += s;
      }
    }
  }
}

void add(const Matrix& a, const Matrix& b, Matrix& out) {
  const long n = static_cast<long>(a.size());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (long i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
}

void sub(const Matrix& a, const Matrix& b, Matrix& out) {
  const long n = static_cast<long>(a.size());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (long i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
}

void hadamard(const Matrix& a, const Matrix& b, Matrix& out) {
  const long n = static_cast<long>(a.size());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (long i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
}

void scale(const Matrix& a, double c, Matrix& out) {
  const long n = static_cast<long>(a.size());
  const double* pa = a.data();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (long i = 0; i < n; ++i) po[i] = c * pa[i];
}

void accumulate(Matrix& grad, const Matrix& g) {
  const long n = static_cast<long>(grad.size());
  double* pg = grad.data();
  const double* ps = g.data();
#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (long i = 0; i < n; ++i) pg[i] += ps[i];
}

void accumulate_scaled(Matrix& grad, const Matrix& g, double c) {
  const long n = static_cast<long>(grad.size());
  double* pg = grad.data();
  const double* ps = g.data();
#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (long i = 0; i < n; ++i) pg[i] += c * ps[i];
}

void bias_add(const Matrix& x, const Matrix& bias, Matrix& out) {
  const int n = x.rows();
  const int m = x.cols();
  const double* pb = bias.data();
#pragma omp parallel for schedule(static) if (static_cast<long>(n) * m >= kGrain)
  for (int i = 0; i < n; ++i) {
    const double* xr = x.row(i);
    double* orow = out.row(i);
    for (int j = 0; j < m; ++j) orow[j] = xr[j] + pb[j];
  }
}

void col_sum_acc(const Matrix& g, Matrix& out) {
  const int n = g.rows();
  const int m = g.cols();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (static_cast<long>(n) * m >= kGrain)
  for (int j = 0; j < m; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += g(i, j);
    po[j] += s;
  }
}

void leaky_relu(const Matrix& x, double slope, Matrix& out) {
  const long n = static_cast<long>(x.size());
  const double* px = x.data();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (long i = 0; i < n; ++i) po[i] = px[i] > 0.0 ? px[i] : slope * px[i];
}

void leaky_relu_grad_acc(const Matrix& x, const Matrix& g, double slope, Matrix& gx) {
  const long n = static_cast<long>(x.size());
  const double* px = x.data();
  const double* pg = g.data();
  double* po = gx.data();
#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (long i = 0; i < n; ++i) po[i] += px[i] > 0.0 ? pg[i] : slope * pg[i];
}

void tanh_fwd(const Matrix& x, Matrix& out) {
  const long n = static_cast<long>(x.size());
  const double* px = x.data();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (n >= kGrain / 8)
  for (long i = 0; i < n; ++i) po[i] = std::tanh(px[i]);
}

void tanh_grad_acc(const Matrix& y, const Matrix& g, Matrix& gx) {
  const long n = static_cast<long>(y.size());
  const double* py = y.data();
  const double* pg = g.data();
  double* po = gx.data();
#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (long i = 0; i < n; ++i) po[i] += pg[i] * (1.0 - py[i] * py[i]);
}

void exp_fwd(const Matrix& x, Matrix& out) {
  const long n = static_cast<long>(x.size());
  const double* px = x.data();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (n >= kGrain / 8)
  for (long i = 0; i < n; ++i) po[i] = std::exp(px[i]);
}

void exp_grad_acc(const Matrix& y, const Matrix& g, Matrix& gx) {
  const long n = static_cast<long>(y.size());
  const double* py = y.data();
  const double* pg = g.data();
  double* po = gx.data();
#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (long i = 0; i < n; ++i) po[i] += pg[i] * py[i];
}

void log_clamped(const Matrix& x, Matrix& out) {
  const long n = static_cast<long>(x.size());
  const double* px = x.data();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (n >= kGrain / 8)
  for (long i = 0; i < n; ++i) {
    double v = px[i];
    if (v < kProbFloor) v = kProbFloor;
    if (v > 1.0) v = 1.0;
    po[i] = std::log(v);
  }
}

void log_clamped_grad_acc(const Matrix& x, const Matrix& g, Matrix& gx) {
  const long n = static_cast<long>(x.size());
  const double* px = x.data();
  const double* pg = g.data();
  double* po = gx.data();
#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (long i = 0; i < n; ++i) {
    if (px[i] >= kProbFloor && px[i] <= 1.0) po[i] += pg[i] / px[i];
  }
}

void clamp_band(const Matrix& x, double lo, double hi, Matrix& out) {
  const long n = static_cast<long>(x.size());
  const double* px = x.data();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (long i = 0; i < n; ++i) {
    double v = px[i];
    if (v < lo) v = lo;
    if (v > hi) v = hi;
    po[i] = v;
  }
}

void clamp_band_grad_acc(const Matrix& x, const Matrix& g, double lo, double hi, Matrix& gx) {
  const long n = static_cast<long>(x.size());
  const double* px = x.data();
  const double* pg = g.data();
  double* po = gx.data();
#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (long i = 0; i < n; ++i) {
    if (px[i] >= lo && px[i] <= hi) po[i] += pg[i];
  }
}

void softmax_rows(const Matrix& x, Matrix& out) {
  const int n = x.rows();
  const int m = x.cols();
#pragma omp parallel for schedule(static) if (static_cast<long>(n) * m >= kGrain / 8)
  for (int i = 0; i < n; ++i) {
    const double* xr = x.row(i);
    double* orow = out.row(i);
    double mx = xr[0];
    for (int j = 1; j < m; ++j) {
      if (xr[j] > mx) mx = xr[j];
    }
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      double e = std::exp(xr[j] - mx);
      if (e < kExpFloor) e = kExpFloor;
      orow[j] = e;
      s += e;
    }
    for (int j = 0; j < m; ++j) orow[j] /= s;
  }
}

void softmax_rows_grad_acc(const Matrix& y, const Matrix& g, Matrix& gx) {
  const int n = y.rows();
  const int m = y.cols();
#pragma omp parallel for schedule(static) if (static_cast<long>(n) * m >= kGrain)
  for (int i = 0; i < n; ++i) {
    const double* yr = y.row(i);
    const double* gr = g.row(i);
    double* orow = gx.row(i);
    double dot = 0.0;
    for (int j = 0; j < m; ++j) dot += gr[j] * yr[j];
    for (int j = 0; j < m; ++j) orow[j] += yr[j] * (gr[j] - dot);
  }
}

void row_sum(const Matrix& x, Matrix& out) {
  const int n = x.rows();
  const int m = x.cols();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (static_cast<long>(n) * m >= kGrain)
  for (int i = 0; i < n; ++i) {
    const double* xr = x.row(i);
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += xr[j];
    po[i] = s;
  }
}

void row_sum_grad_acc(const Matrix& g, Matrix& gx) {
  const int n = gx.rows();
  const int m = gx.cols();
  const double* pg = g.data();
#pragma omp parallel for schedule(static) if (static_cast<long>(n) * m >= kGrain)
  for (int i = 0; i < n; ++i) {
    double* orow = gx.row(i);
    const double gi = pg[i];
    for (int j = 0; j < m; ++j) orow[j] += gi;
  }
}

void col_mean(const Matrix& x, Matrix& out) {
  const int n = x.rows();
  const int m = x.cols();
  const double inv = 1.0 / static_cast<double>(n);
  double* po = out.data();
#pragma omp parallel for schedule(static) if (static_cast<long>(n) * m >= kGrain)
  for (int j = 0; j < m; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x(i, j);
    po[j] = s * inv;
  }
}

void col_mean_grad_acc(const Matrix& g, Matrix& gx) {
  const int n = gx.rows();
  const int m = gx.cols();
  const double inv = 1.0 / static_cast<double>(n);
  const double* pg = g.data();
#pragma omp parallel for schedule(static) if (static_cast<long>(n) * m >= kGrain)
  for (int i = 0; i < n; ++i) {
    double* orow = gx.row(i);
    for (int j = 0; j < m; ++j) orow[j] += pg[j] * inv;
  }
}

void l1_row_diff(const Matrix& a, const Matrix& b, Matrix& out) {
  const int n = a.rows();
  const int m = a.cols();
  double* po = out.data();
#pragma omp parallel for schedule(static) if (static_cast<long>(n) * m >= kGrain)
  for (int i = 0; i < n; ++i) {
    const double* ar = a.row(i);
    const double* br = b.row(i);
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += std::fabs(ar[j] - br[j]);
    po[i] = s;
  }
}

void l1_row_diff_grad_acc(const Matrix& a, const Matrix& b, const Matrix& g,
                          Matrix& ga, Matrix& gb) {
  const int n = a.rows();
  const int m = a.cols();
  const double* pg = g.data();
#pragma omp parallel for schedule(static) if (static_cast<long>(n) * m >= kGrain)
  for (int i = 0; i < n; ++i) {
    const double* ar = a.row(i);
    const double* br = b.row(i);
    double* gar = ga.row(i);
    double* gbr = gb.row(i);
    const double gi = pg[i];
    for (int j = 0; j < m; ++j) {
      const double d = ar[j] - br[j];
      const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      gar[j] += gi * s;
      gbr[j] -= gi * s;
    }
  }
}

void adam_step(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v, long t,
               double alpha, double beta1, double beta2, double epsilon) {
  const long n = static_cast<long>(param.size());
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  double* pp = param.data();
  const double* pg = grad.data();
  double* pm = m.data();
  double* pv = v.data();
#pragma omp parallel for schedule(static) if (n >= kGrain)
  for (long i = 0; i < n; ++i) {
    pm[i] = beta1 * pm[i] + (1.0 - beta1) * pg[i];
    pv[i] = beta2 * pv[i] + (1.0 - beta2) * pg[i] * pg[i];
    const double mhat = pm[i] / bc1;
    const double vhat = pv[i] / bc2;
    pp[i] -= alpha * mhat / (std::sqrt(vhat) + epsilon);
  }
}

bool all_finite(const Matrix& x) {
  const long n = static_cast<long>(x.size());
  const double* px = x.data();
  bool ok = true;
#pragma omp parallel for schedule(static) reduction(&& : ok) if (n >= kGrain)
  for (long i = 0; i < n; ++i) ok = ok && std::isfinite(px[i]);
  return ok;
}

}  // namespace tda::kernels::omp
