#include "tda/objectives.hpp"

namespace tda {

namespace {

Matrix pad_right_identity(int k, int cols) {
  // K x cols [I | 0]; right-multiplying an n x K matrix widens it with zeros
  Matrix p(k, cols);
  for (int i = 0; i < k; ++i) p(i, i) = 1.0;
  return p;
}

}  // namespace

Matrix one_hot(const std::vector<int>& labels, int cols) {
  Matrix out(static_cast<int>(labels.size()), cols);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= cols)
      throw Error("one_hot: label " + std::to_string(labels[i]) + " out of range [0, " +
                  std::to_string(cols) + ")");
    out(static_cast<int>(i), labels[i]) = 1.0;
  }
  return out;
}

LossBuilder::LossBuilder(Graph& g, const Model& m, const Batch& b, TrainableSet t)
    : g_(g), m_(m), b_(b), t_(t) {
  const int d = m.input_dim;
  const int p = m.latent_dim();
  const int k = m.k;
  if (b.x_src.cols() != d) throw ShapeError("batch: x_src feature width != model input");
  if (b.x_tgt.cols() != d) throw ShapeError("batch: x_tgt feature width != model input");
  if (b.y_src.rows() != b.x_src.rows() || b.y_src.cols() != k)
    throw ShapeError("batch: y_src must be n_src x K one-hot");
  if (b.eps_src.rows() != b.x_src.rows() || b.eps_src.cols() != p)
    throw ShapeError("batch: eps_src must be n_src x latent");
  if (b.eps_tgt.rows() != b.x_tgt.rows() || b.eps_tgt.cols() != p)
    throw ShapeError("batch: eps_tgt must be n_tgt x latent");
  if (b.eps_tgt2.rows() != b.x_tgt.rows() || b.eps_tgt2.cols() != p)
    throw ShapeError("batch: eps_tgt2 must be n_tgt x latent");
  if (b.z_prior.cols() != p) throw ShapeError("batch: z_prior must be n x latent");
  if (b.x_src.rows() < 1 || b.x_tgt.rows() < 1 || b.z_prior.rows() < 1)
    throw ShapeError("batch: every part needs at least one row");
}

NodeId LossBuilder::ce_mean(NodeId probs, NodeId target_rows) {
  // mean over rows of -sum_j t_ij log p_ij
  const NodeId logp = g_.log_clamped(probs);
  const NodeId picked = g_.mul(logp, target_rows);
  const NodeId per_row = g_.row_sum(picked);
  return g_.scale(g_.col_mean(per_row), -1.0);
}

NodeId LossBuilder::uniform_onehot(int rows, int cols, int hot) {
  Matrix t(rows, cols);
  for (int i = 0; i < rows; ++i) t(i, hot) = 1.0;
  return g_.constant(std::move(t));
}

NodeId LossBuilder::z_src() {
  if (z_src_ < 0) {
    const NodeId x = g_.constant(b_.x_src);
    const NodeId eps = g_.constant(b_.eps_src);
    z_src_ = encoder_nodes(g_, m_.encoder, kPrefixEncoder, x, eps, t_.encoder).z;
  }
  return z_src_;
}

NodeId LossBuilder::z_tgt() {
  if (z_tgt_ < 0) {
    const NodeId x = g_.constant(b_.x_tgt);
    const NodeId eps = g_.constant(b_.eps_tgt);
    z_tgt_ = encoder_nodes(g_, m_.encoder, kPrefixEncoder, x, eps, t_.encoder).z;
  }
  return z_tgt_;
}

NodeId LossBuilder::z_tgt2() {
  if (z_tgt2_ < 0) {
    const NodeId x = g_.constant(b_.x_tgt);
    const NodeId eps = g_.constant(b_.eps_tgt2);
    z_tgt2_ = encoder_nodes(g_, m_.encoder, kPrefixEncoder, x, eps, t_.encoder).z;
  }
  return z_tgt2_;
}

NodeId LossBuilder::probs_src() {
  if (probs_src_ < 0)
    probs_src_ = mlp_nodes(g_, m_.classifier, kPrefixClassifier, z_src(), t_.classifier);
  return probs_src_;
}

NodeId LossBuilder::probs_tgt() {
  if (probs_tgt_ < 0)
    probs_tgt_ = mlp_nodes(g_, m_.classifier, kPrefixClassifier, z_tgt(), t_.classifier);
  return probs_tgt_;
}

NodeId LossBuilder::probs_tgt2() {
  if (probs_tgt2_ < 0)
    probs_tgt2_ = mlp_nodes(g_, m_.classifier, kPrefixClassifier, z_tgt2(), t_.classifier);
  return probs_tgt2_;
}

NodeId LossBuilder::classification() {
  return ce_mean(probs_src(), g_.constant(b_.y_src));
}

NodeId LossBuilder::task_disc_source() {
  if (d_src_ < 0) d_src_ = mlp_nodes(g_, m_.task_disc, kPrefixTaskDisc, z_src(), t_.task_disc);
  // source rows keep their class label, padded with a zero for the extra
  // "target" class
  Matrix padded(b_.y_src.rows(), m_.k + 1);
  for (int i = 0; i < b_.y_src.rows(); ++i)
    for (int j = 0; j < m_.k; ++j) padded(i, j) = b_.y_src(i, j);
  return ce_mean(d_src_, g_.constant(std::move(padded)));
}

NodeId LossBuilder::task_disc_target() {
  if (d_tgt_ < 0) d_tgt_ = mlp_nodes(g_, m_.task_disc, kPrefixTaskDisc, z_tgt(), t_.task_disc);
  return ce_mean(d_tgt_, uniform_onehot(b_.x_tgt.rows(), m_.k + 1, m_.k));
}

NodeId LossBuilder::task_disc_total() {
  return g_.add(task_disc_source(), task_disc_target());
}

NodeId LossBuilder::teacher() {
  if (d_tgt_ < 0) d_tgt_ = mlp_nodes(g_, m_.task_disc, kPrefixTaskDisc, z_tgt(), t_.task_disc);
  NodeId padded = -1;
  if (has_fixed_pseudo_) {
    padded = g_.constant(fixed_pseudo_);
  } else {
    const NodeId pseudo = g_.stop_grad(probs_tgt());
    const NodeId pad = g_.constant(pad_right_identity(m_.k, m_.k + 1));
    padded = g_.matmul(pseudo, pad);
  }
  return ce_mean(d_tgt_, padded);
}

void LossBuilder::fix_teacher_pseudo(const Matrix& pseudo) {
  if (pseudo.rows() != b_.x_tgt.rows() || pseudo.cols() != m_.k + 1)
    throw ShapeError("fix_teacher_pseudo: want n_tgt x (K+1)");
  fixed_pseudo_ = pseudo;
  has_fixed_pseudo_ = true;
}

NodeId LossBuilder::prior_disc() {
  if (f_prior_ < 0)
    f_prior_ = mlp_nodes(g_, m_.prior_disc, kPrefixPriorDisc, g_.constant(b_.z_prior),
                         t_.prior_disc);
  if (f_src_ < 0)
    f_src_ = mlp_nodes(g_, m_.prior_disc, kPrefixPriorDisc, z_src(), t_.prior_disc);
  // prior draws are the positive class, encoded source the negative
  const NodeId on_prior = ce_mean(f_prior_, uniform_onehot(b_.z_prior.rows(), 2, 0));
  const NodeId on_source = ce_mean(f_src_, uniform_onehot(b_.x_src.rows(), 2, 1));
  return g_.add(on_prior, on_source);
}

NodeId LossBuilder::prior_fool() {
  if (f_src_ < 0)
    f_src_ = mlp_nodes(g_, m_.prior_disc, kPrefixPriorDisc, z_src(), t_.prior_disc);
  return ce_mean(f_src_, uniform_onehot(b_.x_src.rows(), 2, 0));
}

NodeId LossBuilder::entropy() {
  const NodeId p = probs_tgt();
  const NodeId picked = g_.mul(g_.log_clamped(p), p);
  return g_.scale(g_.col_mean(g_.row_sum(picked)), -1.0);
}

NodeId LossBuilder::smoothness() {
  return g_.col_mean(g_.l1_row_diff(probs_tgt(), probs_tgt2()));
}

NodeId LossBuilder::domain_baseline(bool encoder_side) {
  if (f2_src_ < 0)
    f2_src_ = mlp_nodes(g_, m_.domain_disc, kPrefixDomainDisc, z_src(), t_.domain_disc);
  if (f2_tgt_ < 0)
    f2_tgt_ = mlp_nodes(g_, m_.domain_disc, kPrefixDomainDisc, z_tgt(), t_.domain_disc);
  // discriminator side: target -> 1, source -> 0; encoder side swaps them
  const int src_hot = encoder_side ? 0 : 1;
  const int tgt_hot = encoder_side ? 1 : 0;
  const NodeId on_src = ce_mean(f2_src_, uniform_onehot(b_.x_src.rows(), 2, src_hot));
  const NodeId on_tgt = ce_mean(f2_tgt_, uniform_onehot(b_.x_tgt.rows(), 2, tgt_hot));
  return g_.add(on_src, on_tgt);
}

namespace {

double eval_scalar(const Model& m, const Batch& b, NodeId (LossBuilder::*term)()) {
  Graph g;
  LossBuilder lb(g, m, b, TrainableSet{});
  const NodeId id = (lb.*term)();
  g.forward();
  return g.scalar(id);
}

}  // namespace

double loss_class(const Model& m, const Batch& b) {
  return eval_scalar(m, b, &LossBuilder::classification);
}

double loss_disc(const Model& m, const Batch& b) {
  return eval_scalar(m, b, &LossBuilder::task_disc_total);
}

double loss_disc_source(const Model& m, const Batch& b) {
  return eval_scalar(m, b, &LossBuilder::task_disc_source);
}

double loss_disc_target(const Model& m, const Batch& b) {
  return eval_scalar(m, b, &LossBuilder::task_disc_target);
}

double loss_teach(const Model& m, const Batch& b) {
  return eval_scalar(m, b, &LossBuilder::teacher);
}

double loss_adv_f(const Model& m, const Batch& b) {
  return eval_scalar(m, b, &LossBuilder::prior_disc);
}

double loss_adv_q(const Model& m, const Batch& b) {
  return eval_scalar(m, b, &LossBuilder::prior_fool);
}

double loss_entropic(const Model& m, const Batch& b) {
  return eval_scalar(m, b, &LossBuilder::entropy);
}

double loss_smooth(const Model& m, const Batch& b) {
  return eval_scalar(m, b, &LossBuilder::smoothness);
}

double loss_domain_baseline(const Model& m, const Batch& b, bool encoder_side) {
  Graph g;
  LossBuilder lb(g, m, b, TrainableSet{});
  const NodeId id = lb.domain_baseline(encoder_side);
  g.forward();
  return g.scalar(id);
}

}  // namespace tda
