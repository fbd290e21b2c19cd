// Hand-built models whose outputs are known in closed form. Shared by the
// loss-value tests and the acceptance checks.
#pragma once

#include <vector>

#include "tda/objectives.hpp"

namespace craft {

using tda::Batch;
using tda::EncoderParams;
using tda::EncoderSpec;
using tda::Head;
using tda::Matrix;
using tda::MlpParams;
using tda::MlpSpec;
using tda::Model;

/// Encoder computing mu = x (requires latent == input width). logvar_bias
/// of 0 gives sigma = 1; -1e10 underflows to sigma = 0 exactly, making
/// z = mu deterministic.
inline EncoderParams identity_encoder(int d, double logvar_bias) {
  EncoderParams p;
  p.spec = EncoderSpec{d, {}, d, 0.2};
  p.w_mu = Matrix(d, d);
  for (int i = 0; i < d; ++i) p.w_mu(i, i) = 1.0;
  p.b_mu = Matrix(1, d);
  p.w_logvar = Matrix(d, d);
  p.b_logvar = Matrix(1, d, logvar_bias);
  return p;
}

/// Single linear layer with zero weights: every row maps to head(bias).
inline MlpParams bias_mlp(int in, int out, Head head, const std::vector<double>& bias) {
  MlpParams p;
  p.spec = MlpSpec{in, {}, out, 0.2, head};
  p.w.emplace_back(in, out);
  Matrix b(1, out);
  for (int j = 0; j < out; ++j) b(0, j) = bias[static_cast<std::size_t>(j)];
  p.b.push_back(std::move(b));
  return p;
}

/// Single linear layer with explicit weights and bias.
inline MlpParams linear_mlp(Matrix w, Matrix b, Head head) {
  MlpParams p;
  p.spec = MlpSpec{w.rows(), {}, w.cols(), 0.2, head};
  p.w.push_back(std::move(w));
  p.b.push_back(std::move(b));
  return p;
}

/// A full model around crafted parts; any part not supplied becomes a
/// zero-bias constant head of the right shape.
struct ModelParts {
  int d = 1;
  int p = 1;
  int k = 2;
  double logvar_bias = -1e10;  // sigma = 0 unless a test wants sampling
  const MlpParams* classifier = nullptr;
  const MlpParams* task_disc = nullptr;
  const MlpParams* prior_disc = nullptr;
  const MlpParams* domain_disc = nullptr;
};

inline Model assemble(const ModelParts& parts) {
  Model m;
  m.input_dim = parts.d;
  m.k = parts.k;
  m.encoder = identity_encoder(parts.d, parts.logvar_bias);
  m.encoder.spec.latent = parts.p;
  // identity requires d == p for the crafted tests
  m.classifier = parts.classifier
                     ? *parts.classifier
                     : bias_mlp(parts.p, parts.k, Head::softmax,
                                std::vector<double>(static_cast<std::size_t>(parts.k), 0.0));
  m.task_disc = parts.task_disc
                    ? *parts.task_disc
                    : bias_mlp(parts.p, parts.k + 1, Head::softmax,
                               std::vector<double>(static_cast<std::size_t>(parts.k) + 1, 0.0));
  m.prior_disc = parts.prior_disc ? *parts.prior_disc
                                  : bias_mlp(parts.p, 1, Head::logistic, {0.0});
  m.domain_disc = parts.domain_disc ? *parts.domain_disc
                                    : bias_mlp(parts.p, 1, Head::logistic, {0.0});
  return m;
}

/// Batch of constant rows: every source row is x_s, every target row x_t,
/// all noise zero, prior rows constant z_p.
inline Batch constant_batch(int ns, int nt, int d, int k, double x_s, double x_t,
                            double z_p, int label = 0) {
  Batch b;
  b.x_src = Matrix(ns, d, x_s);
  std::vector<int> labels(static_cast<std::size_t>(ns), label);
  b.y_src = tda::one_hot(labels, k);
  b.x_tgt = Matrix(nt, d, x_t);
  b.eps_src = Matrix(ns, d);
  b.eps_tgt = Matrix(nt, d);
  b.eps_tgt2 = Matrix(nt, d);
  b.z_prior = Matrix(ns, d, z_p);
  return b;
}

}  // namespace craft
