#pragma once

#include "tda/history.hpp"
#include "tda/trainer.hpp"

namespace tda {

/// Everything a run needs, resolved from a flat "key = value" config file
/// plus command-line overrides. `resolved` echoes the final value of every
/// key and is reproduced in each artifact.
struct ExperimentConfig {
  TrainConfig train;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string out_dir = "out";

  std::string dataset = "two-moons";  // two-moons | gaussian-mixture | idx
  int n_per_domain = 1000;
  double moons_noise = 0.1;
  Matrix mixture_means = Matrix::from_rows({{0.0, 0.0}, {3.0, 0.0}, {0.0, 3.0}});
  int mixture_n_per_class = 200;
  double mixture_noise = 0.5;
  ShiftSpec shift;
  std::string idx_source_images, idx_source_labels;
  std::string idx_target_images, idx_target_labels;
  int idx_subsample = 2000;   // 0 keeps everything
  int idx_block_factor = 1;   // 1 keeps full resolution
  bool save_checkpoints = true;
  bool export_embeddings = false;

  std::map<std::string, std::string> resolved;
};

/// Reads a config file: one "key = value" per line, '#' starts a comment,
/// blank lines ignored.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Applies the key/value map over the defaults. Unknown keys and malformed
/// values are errors.
ExperimentConfig parse_experiment_config(const std::map<std::string, std::string>& kv);

/// Source and target domains for one seed, fully preprocessed (shifted,
/// rescaled, target labels held out).
std::pair<DomainDataset, DomainDataset> build_datasets(const ExperimentConfig& cfg,
                                                       std::uint64_t seed);

struct RunResult {
  std::uint64_t seed = 0;
  Model model;
  RunHistory history;
  double source_acc = 0.0;
  double target_acc = 0.0;
};

/// Trains one seed; no filesystem side effects.
RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed);

struct ArmSummary {
  std::string arm;
  std::vector<std::uint64_t> seeds;
  std::vector<double> target_accs;
  std::vector<double> source_accs;
  double target_mean = 0.0;
  double target_std = 0.0;  // sample standard deviation
  double source_mean = 0.0;
  double source_std = 0.0;
};

ArmSummary summarize_arm(const std::string& arm, const std::vector<RunResult>& runs);

/// Runs every seed of one configuration, writing per-seed artifacts under
/// <out_dir>/<arm>/ when write_artifacts is set.
ArmSummary run_experiment_arm(const ExperimentConfig& cfg, const std::string& arm,
                              bool write_artifacts);

void write_summary_csv(const std::string& path, const std::vector<ArmSummary>& arms);

/// The regularizer ablation grid: full, wo-s, wo-t, wo-st.
std::vector<ArmSummary> run_ablation_suite(const ExperimentConfig& cfg, bool write_artifacts);

/// Task-discriminative alignment vs the plain binary-domain baseline.
std::vector<ArmSummary> run_discriminator_comparison(const ExperimentConfig& cfg,
                                                     bool write_artifacts);

/// Mean-latent embedding of both domains with true and predicted labels
/// (label -1 when a point has none).
void export_embedding_csv(const std::string& path, const Model& m,
                          const DomainDataset& source, const DomainDataset& target);

/// The echo map for a config (sorted keys, canonical value formatting).
std::map<std::string, std::string> config_echo(const ExperimentConfig& cfg);

}  // namespace tda
