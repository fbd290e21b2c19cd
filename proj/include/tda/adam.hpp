#pragma once

#include <vector>

#include "tda/matrix.hpp"

namespace tda {

struct AdamConfig {
  double alpha = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected adaptive-moment optimizer state for one parameter group.
/// The group's tensor list must keep the same order and shapes across
/// steps; t counts completed steps.
class AdamState {
 public:
  AdamState() = default;
  AdamState(AdamConfig cfg, const std::vector<const Matrix*>& params);

  /// One update over the whole group. A zero gradient at t = 0 moment
  /// state leaves the parameter bit-identical.
  void step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads);

  long t() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  const Matrix& first_moment(std::size_t i) const { return m_[i]; }
  const Matrix& second_moment(std::size_t i) const { return v_[i]; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace tda
