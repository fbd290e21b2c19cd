#include <cmath>

#include "tda/error.hpp"
#include "tda/gradcheck.hpp"

namespace tda {

Matrix finite_diff_grad(Matrix& param, const std::function<double()>& eval, double h) {
  if (h <= 0.0) throw Error("finite_diff_grad: step must be positive");
  Matrix out(param.rows(), param.cols());
  for (int i = 0; i < param.rows(); ++i) {
    for (int j = 0; j < param.cols(); ++j) {
      const double keep = param(i, j);
      param(i, j) = keep + h;
      const double up = eval();
      param(i, j) = keep - h;
      const double down = eval();
      param(i, j) = keep;
      out(i, j) = (up - down) / (2.0 * h);
    }
  }
  return out;
}

double rel_err(double a, double b, double floor) {
  const double denom = std::fabs(a) + std::fabs(b);
  return std::fabs(a - b) / (denom > floor ? denom : floor);
}

double max_rel_err(const Matrix& analytic, const Matrix& numeric, double floor) {
  if (!analytic.same_shape(numeric)) throw ShapeError("max_rel_err: shape mismatch");
  double worst = 0.0;
  for (int i = 0; i < analytic.rows(); ++i) {
    for (int j = 0; j < analytic.cols(); ++j) {
      const double e = rel_err(analytic(i, j), numeric(i, j), floor);
      if (e > worst) worst = e;
    }
  }
  return worst;
}

}  // namespace tda
