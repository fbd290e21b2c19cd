#include <utility>

#include "tda/trainer.hpp"

namespace tda {

namespace {

std::vector<const Matrix*> to_const(const std::vector<ParamRef>& refs) {
  std::vector<const Matrix*> out;
  out.reserve(refs.size());
  for (const auto& r : refs) out.push_back(r.tensor);
  return out;
}

std::vector<Matrix*> to_mut(const std::vector<ParamRef>& refs) {
  std::vector<Matrix*> out;
  out.reserve(refs.size());
  for (const auto& r : refs) out.push_back(r.tensor);
  return out;
}

/// Applies one group's gradients out of a full backward result.
void apply_group(AdamState& adam, std::vector<ParamRef> refs, const Gradients& grads) {
  std::vector<const Matrix*> g;
  g.reserve(refs.size());
  for (const auto& r : refs) {
    auto it = grads.find(r.name);
    if (it == grads.end()) throw Error("trainer: missing gradient for '" + r.name + "'");
    g.push_back(&it->second);
  }
  adam.step(to_mut(refs), g);
}

}  // namespace

double RunHistory::final_source_acc() const {
  if (epochs.empty()) throw Error("history: no epochs recorded");
  return epochs.back().acc_source;
}

double RunHistory::final_target_acc() const {
  if (epochs.empty()) throw Error("history: no epochs recorded");
  return epochs.back().acc_target;
}

TrainerState init_trainer(const TrainConfig& config, int input_dim, int k) {
  if (config.batch_size < 1) throw ConfigError("trainer: batch_size must be positive");
  if (config.epochs < 0) throw ConfigError("trainer: epochs must be non-negative");
  TrainerState s;
  s.config = config;
  s.model = init_model(input_dim, k, config.arch, config.seed);
  s.adam_encoder = AdamState(config.adam, to_const(encoder_param_refs(s.model.encoder, kPrefixEncoder)));
  s.adam_classifier = AdamState(config.adam, to_const(mlp_param_refs(s.model.classifier, kPrefixClassifier)));
  s.adam_task_disc = AdamState(config.adam, to_const(mlp_param_refs(s.model.task_disc, kPrefixTaskDisc)));
  s.adam_prior_disc = AdamState(config.adam, to_const(mlp_param_refs(s.model.prior_disc, kPrefixPriorDisc)));
  s.adam_domain_disc = AdamState(config.adam, to_const(mlp_param_refs(s.model.domain_disc, kPrefixDomainDisc)));
  return s;
}

void step_alignment_discriminator(TrainerState& s, const Batch& b) {
  switch (s.config.discriminator) {
    case DiscMode::none:
      return;
    case DiscMode::task: {
      Graph g;
      TrainableSet t;
      t.task_disc = true;
      LossBuilder lb(g, s.model, b, t);
      const NodeId loss = lb.task_disc_total();
      g.forward();
      s.last.loss_disc = g.scalar(loss);
      apply_group(s.adam_task_disc, mlp_param_refs(s.model.task_disc, kPrefixTaskDisc),
                  g.backward(loss));
      return;
    }
    case DiscMode::binary: {
      Graph g;
      TrainableSet t;
      t.domain_disc = true;
      LossBuilder lb(g, s.model, b, t);
      const NodeId loss = lb.domain_baseline(false);
      g.forward();
      s.last.loss_advd_disc = g.scalar(loss);
      apply_group(s.adam_domain_disc, mlp_param_refs(s.model.domain_disc, kPrefixDomainDisc),
                  g.backward(loss));
      return;
    }
  }
}

void step_prior_discriminator(TrainerState& s, const Batch& b) {
  if (!s.config.source_reg) return;
  Graph g;
  TrainableSet t;
  t.prior_disc = true;
  LossBuilder lb(g, s.model, b, t);
  const NodeId loss = lb.prior_disc();
  g.forward();
  s.last.loss_adv_f = g.scalar(loss);
  apply_group(s.adam_prior_disc, mlp_param_refs(s.model.prior_disc, kPrefixPriorDisc),
              g.backward(loss));
}

void step_encoder(TrainerState& s, const Batch& b) {
  Graph g;
  TrainableSet t;
  t.encoder = true;
  LossBuilder lb(g, s.model, b, t);

  const NodeId cls = lb.classification();
  NodeId loss = cls;
  NodeId disc_src = -1, teach = -1, advd = -1, fool = -1;
  switch (s.config.discriminator) {
    case DiscMode::task:
      // the encoder's alignment pressure: keep source latents classifiable
      // by D under their own labels while target latents match the
      // (stopped) classifier view instead of the extra class
      disc_src = lb.task_disc_source();
      teach = lb.teacher();
      loss = g.add(g.add(loss, disc_src), teach);
      break;
    case DiscMode::binary:
      advd = lb.domain_baseline(true);
      loss = g.add(loss, advd);
      break;
    case DiscMode::none:
      break;
  }
  if (s.config.source_reg) {
    fool = lb.prior_fool();
    loss = g.add(loss, g.scale(fool, s.config.lambda_q));
  }
  g.forward();
  s.last.loss_class = g.scalar(cls);
  if (teach >= 0) s.last.loss_teach = g.scalar(teach);
  if (advd >= 0) s.last.loss_advd_enc = g.scalar(advd);
  if (fool >= 0) s.last.loss_adv_q = g.scalar(fool);
  apply_group(s.adam_encoder, encoder_param_refs(s.model.encoder, kPrefixEncoder),
              g.backward(loss));
}

void step_classifier(TrainerState& s, const Batch& b) {
  Graph g;
  TrainableSet t;
  t.classifier = true;
  LossBuilder lb(g, s.model, b, t);

  const NodeId cls = lb.classification();
  NodeId loss = g.scale(cls, s.config.lambda_h);
  NodeId ent = -1, smooth = -1;
  if (s.config.target_reg) {
    ent = lb.entropy();
    smooth = lb.smoothness();
    loss = g.add(loss, g.scale(g.add(ent, smooth), s.config.lambda_h_prime));
  }
  g.forward();
  if (ent >= 0) s.last.loss_entropic = g.scalar(ent);
  if (smooth >= 0) s.last.loss_smooth = g.scalar(smooth);
  apply_group(s.adam_classifier, mlp_param_refs(s.model.classifier, kPrefixClassifier),
              g.backward(loss));
}

void run_iteration(TrainerState& s, const Batch& b) {
  s.last = StepRecord{};
  step_alignment_discriminator(s, b);
  step_prior_discriminator(s, b);
  step_encoder(s, b);
  step_classifier(s, b);
  ++s.step_count;
  s.last.step = s.step_count;
}

Batch make_batch(const DomainDataset& source, const DomainDataset& target,
                 const std::vector<int>& src_idx, const std::vector<int>& tgt_idx,
                 int latent_dim, Rng& eps_src_rng, Rng& eps_tgt_rng, Rng& eps_tgt2_rng,
                 Rng& prior_rng) {
  const auto* labels = source.training_labels();
  if (!labels) throw Error("make_batch: source domain must expose training labels");
  const int ns = static_cast<int>(src_idx.size());
  const int nt = static_cast<int>(tgt_idx.size());
  Batch b;
  b.x_src = Matrix(ns, source.dim());
  std::vector<int> picked(ns);
  for (int i = 0; i < ns; ++i) {
    const double* row = source.inputs().row(src_idx[i]);
    for (int j = 0; j < source.dim(); ++j) b.x_src(i, j) = row[j];
    picked[i] = (*labels)[src_idx[i]];
  }
  b.y_src = one_hot(picked, source.num_classes());
  b.x_tgt = Matrix(nt, target.dim());
  for (int i = 0; i < nt; ++i) {
    const double* row = target.inputs().row(tgt_idx[i]);
    for (int j = 0; j < target.dim(); ++j) b.x_tgt(i, j) = row[j];
  }
  // always drawn, in a fixed order, so disabling a loss never shifts the
  // random stream any other loss sees
  b.eps_src = sample_standard_normal(eps_src_rng, ns, latent_dim);
  b.eps_tgt = sample_standard_normal(eps_tgt_rng, nt, latent_dim);
  b.eps_tgt2 = sample_standard_normal(eps_tgt2_rng, nt, latent_dim);
  b.z_prior = sample_standard_normal(prior_rng, ns, latent_dim);
  return b;
}

std::pair<Model, RunHistory> train(const TrainConfig& config, const DomainDataset& source,
                                   const DomainDataset& target) {
  if (source.dim() != target.dim())
    throw ShapeError("train: source and target feature widths differ");
  if (!source.training_labels()) throw Error("train: source labels unavailable");
  if (source.n() < config.batch_size || target.n() < config.batch_size)
    throw Error("train: both domains need at least one full batch");

  TrainerState s = init_trainer(config, source.dim(), source.num_classes());
  const Rng master(config.seed);
  Rng shuffle_src = master.split(kStreamBatchSource);
  Rng shuffle_tgt = master.split(kStreamBatchTarget);
  Rng eps_src_rng = master.split(kStreamNoiseSource);
  Rng eps_tgt_rng = master.split(kStreamNoiseTarget);
  Rng eps_tgt2_rng = master.split(kStreamNoiseTargetSecond);
  Rng prior_rng = master.split(kStreamNoisePrior);

  RunHistory history;
  history.seed = config.seed;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    auto src_batches = epoch_batches(source.n(), config.batch_size, shuffle_src);
    auto tgt_batches = epoch_batches(target.n(), config.batch_size, shuffle_tgt);
    const std::size_t iters = std::min(src_batches.size(), tgt_batches.size());
    if (iters == 0) throw Error("train: batch size exceeds a domain's size");
    for (std::size_t i = 0; i < iters; ++i) {
      Batch b = make_batch(source, target, src_batches[i], tgt_batches[i],
                           config.arch.latent_dim, eps_src_rng, eps_tgt_rng, eps_tgt2_rng,
                           prior_rng);
      run_iteration(s, b);
      s.last.epoch = epoch;
      history.steps.push_back(s.last);
    }
    EpochRecord er;
    er.epoch = epoch;
    er.step = s.step_count;
    er.acc_source = evaluate_accuracy(s.model, source);
    er.acc_target = evaluate_accuracy(s.model, target);
    history.epochs.push_back(er);
  }
  return {std::move(s.model), std::move(history)};
}

std::vector<int> predict(const Model& m, const Matrix& x) {
  const Matrix mu = encode_mean(m.encoder, x);
  const Matrix probs = classify(m, mu);
  std::vector<int> out(probs.rows());
  for (int i = 0; i < probs.rows(); ++i) {
    int best = 0;
    for (int j = 1; j < probs.cols(); ++j) {
      if (probs(i, j) > probs(i, best)) best = j;
    }
    out[i] = best;
  }
  return out;
}

double evaluate_accuracy(const Model& m, const DomainDataset& ds) {
  const auto& labels = ds.evaluation_labels();
  const std::vector<int> pred = predict(m, ds.inputs());
  int hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (pred[i] == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace tda
