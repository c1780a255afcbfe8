#pragma once

#include <string>
#include <vector>

#include "varhmm/likelihood_curve.hpp"
#include "varhmm/model.hpp"
#include "varhmm/trial.hpp"

namespace varhmm {

/// One trained skill: its model, the expected cumulative log-likelihood
/// curve and training metadata.
struct SkillModel {
  std::string skill_id;
  ShdpVarModel model;
  LikelihoodCurve curve;
  int training_trials = 0;
  double mean_duration_frames = 0.0;
};

/// Ordered set of trained skills sharing one feature configuration.
class SkillLibrary {
 public:
  SkillLibrary(std::vector<SkillModel> skills, FeatureConfig features);

  const std::vector<SkillModel>& skills() const { return skills_; }
  const FeatureConfig& features() const { return features_; }
  int size() const { return static_cast<int>(skills_.size()); }
  int obs_dim() const { return skills_.front().model.obs_dim; }

  /// Index of a skill id, or -1 if absent.
  int index_of(const std::string& skill_id) const;
  const SkillModel& at(const std::string& skill_id) const;

 private:
  std::vector<SkillModel> skills_;
  FeatureConfig features_;
};

}  // namespace varhmm
