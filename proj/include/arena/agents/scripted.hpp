#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "arena/agents/policy.hpp"

namespace arena {

enum class ScriptedVariant { Random, RuleBased, RuleBased2 };

struct RuleParams {
  double aim_tolerance = 0.20;  // radians
  /// Engagement range; non-positive means the arena diagonal (always engaged).
  double engage_distance = 0.0;
  /// Multiplier on the bullet-path radius that triggers a dodge, in entity radii.
  double strafe_bias = 2.0;
};

int act_random(const Observation& obs, Rng& rng);
int act_rule_based(const Observation& obs, const RuleParams& params = {});
int act_rule_based_2(const Observation& obs, const RuleParams& params = {});

/// Compass direction whose heading is closest to the target bearing, with the
/// angular error in radians. Ties go to the lower direction code.
struct Bearing {
  MoveDir dir;
  double error;
};
Bearing nearest_compass(Vec2 delta);

class ScriptedPolicy final : public Policy {
 public:
  explicit ScriptedPolicy(ScriptedVariant variant, RuleParams params = {});
  int act(const Observation& obs, Rng& rng) override;
  std::string name() const override;
  ScriptedVariant variant() const { return variant_; }

 private:
  ScriptedVariant variant_;
  RuleParams params_;
};

/// Parses "random", "rule", "rule2" (and the display names).
ScriptedVariant parse_scripted_variant(std::string_view text);
/// Display name matching evaluation table rows: "Random", "Rule Based", "Rule Based 2".
std::string display_name(ScriptedVariant variant);

}  // namespace arena
