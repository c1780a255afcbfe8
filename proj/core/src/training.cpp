#include "varhmm/training.hpp"

#include <string>

#include "varhmm/errors.hpp"

namespace varhmm {

SkillTrainResult train_skill(const std::string& skill_id,
                             const std::vector<ObservationSequence>& trials,
                             const TrainOptions& options, const RngStream& base_rng) {
  if (trials.size() < 2) {
    throw InsufficientDataError("skill '" + skill_id + "' needs >= 2 training trials, got " +
                                std::to_string(trials.size()));
  }
  FitResult full = fit(trials, options.gibbs, base_rng.derive("fit"));

  LikelihoodCurve curve = [&] {
    if (options.loo_curves && trials.size() >= 3) {
      std::vector<Eigen::VectorXd> curves;
      curves.reserve(trials.size());
      for (std::size_t i = 0; i < trials.size(); ++i) {
        std::vector<ObservationSequence> rest;
        rest.reserve(trials.size() - 1);
        for (std::size_t j = 0; j < trials.size(); ++j) {
          if (j != i) {
            rest.push_back(trials[j]);
          }
        }
        const FitResult loo = fit(rest, options.gibbs, base_rng.derive("loo").derive(i));
        curves.push_back(forward_cumulative_loglik(loo.model, trials[i]));
      }
      return build_curve_from_series(curves);
    }
    return build_curve(full.model, trials);
  }();

  double mean_duration = 0.0;
  for (const auto& t : trials) {
    mean_duration += static_cast<double>(t.frames());
  }
  mean_duration /= static_cast<double>(trials.size());

  SkillTrainResult out{SkillModel{skill_id, std::move(full.model), std::move(curve),
                                  static_cast<int>(trials.size()), mean_duration},
                       std::move(full.diagnostics)};
  return out;
}

LibraryTrainResult train_library(
    const std::map<std::string, std::vector<ObservationSequence>>& per_skill,
    const FeatureConfig& features, const TrainOptions& options, const RngStream& base_rng) {
  if (per_skill.empty()) {
    throw ConfigError("no skills to train");
  }
  std::vector<SkillModel> skills;
  std::map<std::string, GibbsDiagnostics> diagnostics;
  for (const auto& [skill_id, trials] : per_skill) {
    SkillTrainResult r = train_skill(skill_id, trials, options, base_rng.derive(skill_id));
    skills.push_back(std::move(r.skill));
    diagnostics.emplace(skill_id, std::move(r.diagnostics));
  }
  return LibraryTrainResult{SkillLibrary(std::move(skills), features), std::move(diagnostics)};
}

}  // namespace varhmm
