#pragma once

#include <string>
#include <vector>

#include "tda/graph.hpp"
#include "tda/matrix.hpp"
#include "tda/rng.hpp"

namespace tda {

/// Output stage of a feedforward net.
///  linear   - raw logits
///  softmax  - row-stochastic probabilities
///  logistic - single logit widened to the pair [p, 1-p], then clamped to
///             [1e-7, 1-1e-7] so its log terms stay bounded
enum class Head { linear, softmax, logistic };

struct MlpSpec {
  int input = 0;
  std::vector<int> hidden;
  int output = 0;
  double leaky_slope = 0.2;
  Head head = Head::linear;
};

struct MlpParams {
  MlpSpec spec;
  std::vector<Matrix> w;  // fan_in x fan_out per layer
  std::vector<Matrix> b;  // 1 x fan_out per layer
};

inline constexpr double kLogisticClampLo = 1e-7;
inline constexpr double kLogisticClampHi = 1.0 - 1e-7;

/// Uniform fan-in init: U[-sqrt(6/fan_in), +sqrt(6/fan_in)].
Matrix init_weight(int fan_in, int fan_out, Rng& rng);

MlpParams init_mlp(const MlpSpec& spec, Rng rng);

/// Appends the net to the graph with params named "<prefix>/w0",
/// "<prefix>/b0", ... Returns the head output node: n x output for linear
/// and softmax heads, n x 2 for the logistic head (output must be 1).
NodeId mlp_nodes(Graph& g, const MlpParams& p, const std::string& prefix, NodeId in,
                 bool trainable);

/// Value-level forward pass (same arithmetic as the graph path).
Matrix mlp_apply(const MlpParams& p, const Matrix& x);

/// Pre-activation values of every hidden layer; used by gradient-check
/// validity screens to stay away from the leaky-relu kink.
std::vector<Matrix> mlp_preactivations(const MlpParams& p, const Matrix& x);

}  // namespace tda
