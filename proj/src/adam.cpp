#include "tda/adam.hpp"

#include "tda/error.hpp"
#include "tda/kernels.hpp"

namespace tda {

AdamState::AdamState(AdamConfig cfg, const std::vector<const Matrix*>& params) : cfg_(cfg) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Matrix* p : params) {
    m_.emplace_back(p->rows(), p->cols());
    v_.emplace_back(p->rows(), p->cols());
  }
}

void AdamState::step(const std::vector<Matrix*>& params,
                     const std::vector<const Matrix*>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw Error("adam: group size changed since init");
  ++t_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    kernels::adam_step(*params[i], *grads[i], m_[i], v_[i], t_, cfg_.alpha, cfg_.beta1,
                       cfg_.beta2, cfg_.epsilon);
  }
}

}  // namespace tda
