#pragma once

#include <string>
#include <vector>

#include "tda/networks.hpp"

namespace tda {

/// One finite-difference check of one loss on one randomly drawn network
/// configuration (dims, widths, init, batch).
struct LossCheckCase {
  std::string loss;
  int index = 0;
  int params_checked = 0;
  double max_rel_err = 0.0;
  bool pass = false;
};

struct LossCheckReport {
  std::vector<LossCheckCase> cases;
  double worst_rel_err = 0.0;
  int total = 0;
  int failed = 0;
  double tolerance = 0.0;
};

/// Differences every loss term (the classification, task-discriminator,
/// teacher, both prior-adversary sides, entropy and smoothness losses, and
/// both sides of the binary-domain baseline) against central differences
/// over every trainable tensor that loss is allowed to move. Configurations
/// are redrawn when a sample lands near a kink (leaky-relu zero crossing,
/// probability clamp, or an L1 sign flip), since no subgradient matches a
/// two-sided difference there.
LossCheckReport run_loss_gradchecks(int cases_per_loss, double tolerance,
                                    std::uint64_t seed);

}  // namespace tda
