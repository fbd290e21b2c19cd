#pragma once

#include <functional>

#include "tda/matrix.hpp"

namespace tda {

/// Central-difference gradient of a scalar function with respect to the
/// entries of `param`. The callback must re-evaluate the function using
/// the (temporarily perturbed) current contents of `param`; entries are
/// restored exactly afterwards.
Matrix finite_diff_grad(Matrix& param, const std::function<double()>& eval, double h = 1e-5);

/// Symmetric relative error with an absolute floor: |a - b| / max(|a| + |b|, floor).
double rel_err(double a, double b, double floor = 1e-4);

/// Largest per-entry rel_err between two same-shaped matrices.
double max_rel_err(const Matrix& analytic, const Matrix& numeric, double floor = 1e-4);

}  // namespace tda
