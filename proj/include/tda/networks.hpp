#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tda/graph.hpp"
#include "tda/mlp.hpp"

namespace tda {

/// Stochastic encoder: a leaky-relu trunk with two linear heads producing
/// the latent mean and log-variance. Samples are mu + exp(logvar/2) * eps
/// with caller-supplied eps, so the whole pipeline stays a deterministic
/// function of its inputs.
struct EncoderSpec {
  int input = 0;
  std::vector<int> hidden;
  int latent = 0;
  double leaky_slope = 0.2;
};

struct EncoderParams {
  EncoderSpec spec;
  std::vector<Matrix> w;  // trunk
  std::vector<Matrix> b;
  Matrix w_mu, b_mu;
  Matrix w_logvar, b_logvar;
};

EncoderParams init_encoder(const EncoderSpec& spec, Rng rng);

struct EncodeNodes {
  NodeId mu = -1;
  NodeId logvar = -1;
  NodeId sigma = -1;
  NodeId z = -1;  // mu when eps is absent (the prediction path)
};

EncodeNodes encoder_nodes(Graph& g, const EncoderParams& p, const std::string& prefix,
                          NodeId x, std::optional<NodeId> eps, bool trainable);

struct LatentBatch {
  Matrix mu, sigma, z;
};

LatentBatch encode(const EncoderParams& p, const Matrix& x, const Matrix& eps);
Matrix encode_mean(const EncoderParams& p, const Matrix& x);

/// Widths of every network, with the defaults used at desk scale.
struct ArchConfig {
  int latent_dim = 16;
  std::vector<int> encoder_hidden{128, 128};
  std::vector<int> classifier_hidden{64};
  std::vector<int> task_disc_hidden{128, 64};
  std::vector<int> binary_disc_hidden{64};
  double leaky_slope = 0.2;
};

/// The full parameter set: encoder Q, classifier h (K way), task
/// discriminator D (K+1 way), prior discriminator F (real prior vs encoded
/// source), and the two-way domain discriminator F2 used by the binary
/// alignment baseline. All five are always initialized (each from its own
/// seed stream) so enabling or disabling one never shifts another's init.
struct Model {
  EncoderParams encoder;
  MlpParams classifier;
  MlpParams task_disc;
  MlpParams prior_disc;
  MlpParams domain_disc;
  int k = 0;
  int input_dim = 0;
  int latent_dim() const { return encoder.spec.latent; }
};

Model init_model(int input_dim, int k, const ArchConfig& arch, std::uint64_t seed);

Matrix classify(const Model& m, const Matrix& z);           // n x K probabilities
Matrix discriminate_task(const Model& m, const Matrix& z);  // n x (K+1) probabilities
/// First column of the logistic pair: probability of the head's positive
/// class, clamped to [1e-7, 1-1e-7].
Matrix discriminate_binary(const MlpParams& disc, const Matrix& z);  // n x 1

/// Named view over every tensor of a group / the whole model; the order is
/// stable and shared by the optimizer, the checkpoint format and the graph
/// param names ("Q/w0", "h/b1", ...).
struct ParamRef {
  std::string name;
  Matrix* tensor;
};

std::vector<ParamRef> encoder_param_refs(EncoderParams& p, const std::string& prefix);
std::vector<ParamRef> mlp_param_refs(MlpParams& p, const std::string& prefix);
std::vector<ParamRef> model_param_refs(Model& m);

inline constexpr const char* kPrefixEncoder = "Q";
inline constexpr const char* kPrefixClassifier = "h";
inline constexpr const char* kPrefixTaskDisc = "D";
inline constexpr const char* kPrefixPriorDisc = "F";
inline constexpr const char* kPrefixDomainDisc = "F2";

/// Binary little-endian checkpoint: magic, format version, a config echo
/// blob, the architecture, then every named tensor.
void save_model(const std::string& path, const Model& m, const std::string& config_echo);
Model load_model(const std::string& path, std::string* config_echo = nullptr);

}  // namespace tda
