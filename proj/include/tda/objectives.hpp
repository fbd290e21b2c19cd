#pragma once

#include "tda/networks.hpp"

namespace tda {

/// One iteration's worth of data. Every noise tensor is always populated,
/// whether or not the loss that consumes it is enabled, so ablated runs
/// draw identical random streams.
struct Batch {
  Matrix x_src;     // n_s x d
  Matrix y_src;     // n_s x K one-hot
  Matrix x_tgt;     // n_t x d
  Matrix eps_src;   // n_s x p
  Matrix eps_tgt;   // n_t x p
  Matrix eps_tgt2;  // n_t x p, second draw for the smoothness penalty
  Matrix z_prior;   // n_prior x p, direct draws from the latent prior
};

/// Which parameter groups enter a graph as trainable. Everything else is
/// registered frozen and receives exact-zero gradients.
struct TrainableSet {
  bool encoder = false;
  bool classifier = false;
  bool task_disc = false;
  bool prior_disc = false;
  bool domain_disc = false;
};

/// Assembles loss terms over one batch on a caller-owned graph, sharing
/// subgraphs between terms: both the classifier and the task discriminator
/// see the same sampled latent, which is what ties the teacher signal to
/// the alignment loss.
///
/// Terms (all are means over the batch, all non-negative):
///   classification     CE of source labels under h(z_s)
///   task_disc_*        (K+1)-way CE: source rows labeled [y, 0], target
///                      rows labeled the extra class
///   teacher            CE of D(z_t) against [sg(h(z_t)), 0]; the
///                      stop-gradient keeps the pseudo-label a teacher
///   prior_disc         F learns prior -> 1, encoded source -> 0
///   prior_fool         encoder pushes F(z_s) -> 1 (freeze F when using it)
///   entropy            mean prediction entropy on target
///   smoothness         mean L1 gap between h at two latent draws
///   domain_baseline    plain two-way source/target discriminator loss;
///                      encoder_side inverts the labels
class LossBuilder {
 public:
  LossBuilder(Graph& g, const Model& m, const Batch& b, TrainableSet t);

  NodeId z_src();
  NodeId z_tgt();
  NodeId z_tgt2();
  NodeId probs_src();
  NodeId probs_tgt();
  NodeId probs_tgt2();

  NodeId classification();
  NodeId task_disc_source();
  NodeId task_disc_target();
  NodeId task_disc_total();
  NodeId teacher();
  NodeId prior_disc();
  NodeId prior_fool();
  NodeId entropy();
  NodeId smoothness();
  NodeId domain_baseline(bool encoder_side);

  /// Replaces the live pseudo-label in teacher() with a fixed matrix. The
  /// finite-difference oracle needs this: perturbing encoder weights must
  /// not move the stopped pseudo-label, and a plain re-evaluation would.
  void fix_teacher_pseudo(const Matrix& pseudo);

 private:
  NodeId ce_mean(NodeId probs, NodeId target_rows);
  NodeId uniform_onehot(int rows, int cols, int hot);

  Graph& g_;
  const Model& m_;
  const Batch& b_;
  TrainableSet t_;
  Matrix fixed_pseudo_;
  bool has_fixed_pseudo_ = false;

  NodeId z_src_ = -1, z_tgt_ = -1, z_tgt2_ = -1;
  NodeId probs_src_ = -1, probs_tgt_ = -1, probs_tgt2_ = -1;
  NodeId d_src_ = -1, d_tgt_ = -1;
  NodeId f_src_ = -1, f_prior_ = -1;
  NodeId f2_src_ = -1, f2_tgt_ = -1;
};

// Scalar batch values of each loss on a throwaway graph; these feed the
// history rows and the closed-form tests.
double loss_class(const Model& m, const Batch& b);
double loss_disc(const Model& m, const Batch& b);
double loss_disc_source(const Model& m, const Batch& b);
double loss_disc_target(const Model& m, const Batch& b);
double loss_teach(const Model& m, const Batch& b);
double loss_adv_f(const Model& m, const Batch& b);
double loss_adv_q(const Model& m, const Batch& b);
double loss_entropic(const Model& m, const Batch& b);
double loss_smooth(const Model& m, const Batch& b);
double loss_domain_baseline(const Model& m, const Batch& b, bool encoder_side);

/// Builds one-hot rows; every label must be in [0, cols).
Matrix one_hot(const std::vector<int>& labels, int cols);

}  // namespace tda
