#pragma once

#include "tda/adam.hpp"
#include "tda/datasets.hpp"
#include "tda/objectives.hpp"

namespace tda {

/// Alignment signal driving the encoder.
///  task   - (K+1)-way task discriminator with the teacher loss
///  binary - plain two-way domain discriminator baseline
///  none   - no alignment at all (source-only training)
enum class DiscMode { task, binary, none };

struct TrainConfig {
  ArchConfig arch;
  AdamConfig adam;
  double lambda_q = 0.01;        // weight of the prior-fooling term
  double lambda_h = 1.0;         // weight of the classifier's CE term
  double lambda_h_prime = 0.1;   // weight of the entropy + smoothness terms
  int batch_size = 16;
  int epochs = 300;
  bool source_reg = true;   // prior matching on the encoded source
  bool target_reg = true;   // entropy + smoothness on the target
  DiscMode discriminator = DiscMode::task;
  std::uint64_t seed = 1;
};

/// Per-step loss values, recorded right before the updates of the step that
/// computed each term. Terms whose switch is off stay 0.
struct StepRecord {
  long step = 0;
  int epoch = 0;
  double loss_class = 0.0;
  double loss_disc = 0.0;
  double loss_teach = 0.0;
  double loss_adv_f = 0.0;
  double loss_adv_q = 0.0;
  double loss_entropic = 0.0;
  double loss_smooth = 0.0;
  double loss_advd_disc = 0.0;
  double loss_advd_enc = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  long step = 0;
  double acc_source = 0.0;
  double acc_target = 0.0;
};

struct RunHistory {
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  double final_source_acc() const;
  double final_target_acc() const;
};

/// Everything one run mutates: the model, one optimizer state per network,
/// and the loss values of the latest iteration.
struct TrainerState {
  TrainConfig config;
  Model model;
  AdamState adam_encoder, adam_classifier, adam_task_disc, adam_prior_disc, adam_domain_disc;
  StepRecord last;
  long step_count = 0;
};

TrainerState init_trainer(const TrainConfig& config, int input_dim, int k);

/// The four sub-steps of one iteration, in their fixed order. Each builds
/// its own graph over the shared batch, updates exactly one parameter
/// group, and leaves every other group bit-identical.
void step_alignment_discriminator(TrainerState& s, const Batch& b);  // D (or F2)
void step_prior_discriminator(TrainerState& s, const Batch& b);      // F
void step_encoder(TrainerState& s, const Batch& b);                  // Q
void step_classifier(TrainerState& s, const Batch& b);               // h
void run_iteration(TrainerState& s, const Batch& b);

/// Full training loop: per epoch, min(n_s, n_t) / batch_size iterations
/// over independently shuffled domains, with accuracy recorded per epoch.
std::pair<Model, RunHistory> train(const TrainConfig& config, const DomainDataset& source,
                                   const DomainDataset& target);

/// Class decisions through the mean latent; no sampling, ties take the
/// lowest class index.
std::vector<int> predict(const Model& m, const Matrix& x);
double evaluate_accuracy(const Model& m, const DomainDataset& ds);

/// Assembles one batch: gathers the indexed rows, one-hot labels, and all
/// noise draws from the dedicated streams.
Batch make_batch(const DomainDataset& source, const DomainDataset& target,
                 const std::vector<int>& src_idx, const std::vector<int>& tgt_idx,
                 int latent_dim, Rng& eps_src_rng, Rng& eps_tgt_rng, Rng& eps_tgt2_rng,
                 Rng& prior_rng);

}  // namespace tda
