#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arena/model/encoder.hpp"
#include "arena/nn/gradcheck.hpp"

namespace arena {

struct BlockCheck {
  std::string block;
  nn::GradCheckResult result;
};

/// Finite-difference checks for dense, layer_norm, leaky_relu, attention, the
/// Q head, the imitation head and the end-to-end model, on seeded random
/// inputs. Parameters and inputs are both checked.
std::vector<BlockCheck> run_gradient_checks(std::uint64_t seed, double eps = 1e-5);

/// Encoded observations from random-policy play, including bullets in flight
/// and states with more entities than the limits admit.
std::vector<EntityFeatureSet> sample_feature_sets(int count, const EncoderLimits& limits,
                                                  std::uint64_t seed);

}  // namespace arena
