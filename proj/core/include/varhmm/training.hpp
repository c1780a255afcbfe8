#pragma once

#include <map>
#include <string>
#include <vector>

#include "varhmm/gibbs.hpp"
#include "varhmm/skill_library.hpp"

namespace varhmm {

struct TrainOptions {
  GibbsConfig gibbs;
  /// Build the expected-likelihood curve from leave-one-out refits when
  /// >= 3 trials exist, so training trials are not scored by a model that
  /// saw them (avoids an optimistic sigma).
  bool loo_curves = true;
};

struct SkillTrainResult {
  SkillModel skill;
  GibbsDiagnostics diagnostics;
};

/// Fit one skill from its training trials and build its curve.
SkillTrainResult train_skill(const std::string& skill_id,
                             const std::vector<ObservationSequence>& trials,
                             const TrainOptions& options, const RngStream& base_rng);

struct LibraryTrainResult {
  SkillLibrary library;
  std::map<std::string, GibbsDiagnostics> diagnostics;
};

/// Train every skill (streams derived per skill id, so results do not
/// depend on map iteration or skill-insertion order).
LibraryTrainResult train_library(
    const std::map<std::string, std::vector<ObservationSequence>>& per_skill,
    const FeatureConfig& features, const TrainOptions& options, const RngStream& base_rng);

}  // namespace varhmm
