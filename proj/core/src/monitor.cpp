#include "varhmm/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "varhmm/errors.hpp"

namespace varhmm {

SkillLibrary::SkillLibrary(std::vector<SkillModel> skills, FeatureConfig features)
    : skills_(std::move(skills)), features_(features) {
  if (skills_.empty()) {
    throw ConfigError("skill library must contain at least one skill");
  }
  validate(features_);
  const int d = skills_.front().model.obs_dim;
  for (const auto& s : skills_) {
    if (s.skill_id.empty()) {
      throw InvalidParameterError("skill_id must not be empty");
    }
    validate(s.model);
    if (s.model.obs_dim != d) {
      throw ShapeError("all skills must share the observation dimension");
    }
    if (s.training_trials < 2) {
      throw InsufficientDataError("skill '" + s.skill_id +
                                  "' needs a curve from >= 2 training trials");
    }
  }
  for (std::size_t i = 0; i < skills_.size(); ++i) {
    for (std::size_t j = i + 1; j < skills_.size(); ++j) {
      if (skills_[i].skill_id == skills_[j].skill_id) {
        throw InvalidParameterError("duplicate skill_id '" + skills_[i].skill_id + "'");
      }
    }
  }
}

int SkillLibrary::index_of(const std::string& skill_id) const {
  for (std::size_t i = 0; i < skills_.size(); ++i) {
    if (skills_[i].skill_id == skill_id) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

const SkillModel& SkillLibrary::at(const std::string& skill_id) const {
  const int i = index_of(skill_id);
  if (i < 0) {
    throw ConfigError("skill '" + skill_id + "' is not in the library");
  }
  return skills_[static_cast<std::size_t>(i)];
}

Classification classify_step(const SkillLibrary& library, const Eigen::VectorXd& skill_logliks,
                             int fsm_index) {
  if (library.size() < 1) {
    throw ConfigError("classification needs a non-empty library");
  }
  if (skill_logliks.size() != library.size()) {
    throw ShapeError("one cumulative log-likelihood per library skill is required");
  }
  Classification out;
  double best = skill_logliks[0];
  for (int s = 1; s < library.size(); ++s) {
    if (skill_logliks[s] > best) {
      best = skill_logliks[s];
      out.argmax_index = s;
    } else if (skill_logliks[s] == best) {
      out.tie = true;  // lowest index keeps the win
    }
  }
  out.correct = out.argmax_index == fsm_index;
  return out;
}

AnomalyDecision detect_anomaly_step(const SkillModel& skill, double cumulative_loglik, int t,
                                    double anomaly_k) {
  if (t < 1) {
    throw InvalidParameterError("anomaly step index must be >= 1");
  }
  AnomalyDecision out;
  out.threshold = skill.curve.mean_at(t) - anomaly_k * skill.curve.stddev_at(t);
  out.flag = cumulative_loglik < out.threshold;  // lower bound only
  return out;
}

MonitorState::MonitorState(const SkillLibrary& library, double anomaly_k)
    : library_(&library), anomaly_k_(anomaly_k) {
  if (!std::isfinite(anomaly_k)) {
    throw InvalidParameterError("anomaly_k must be finite");
  }
  recursions_.reserve(static_cast<std::size_t>(library.size()));
  for (const auto& s : library.skills()) {
    recursions_.emplace_back(s.model);
  }
}

void MonitorState::reset() {
  for (auto& rec : recursions_) {
    rec.reset();
  }
  frame_ = 0;
  current_fsm_.clear();
}

IntrospectionReport MonitorState::step(const Eigen::Ref<const Eigen::VectorXd>& y,
                                       const std::string& fsm_skill) {
  const int fsm_index = library_->index_of(fsm_skill);
  if (fsm_index < 0) {
    throw ConfigError("FSM skill '" + fsm_skill + "' is not in the library");
  }
  if (fsm_skill != current_fsm_) {
    // New skill execution: all recursion state and the frame counter reset.
    for (auto& rec : recursions_) {
      rec.reset();
    }
    frame_ = 0;
    current_fsm_ = fsm_skill;
  }
  ++frame_;

  IntrospectionReport report;
  report.frame = frame_;
  report.fsm_skill = fsm_skill;
  report.skill_logliks.resize(library_->size());
  for (int s = 0; s < library_->size(); ++s) {
    recursions_[static_cast<std::size_t>(s)].push(y);
    report.skill_logliks[s] = recursions_[static_cast<std::size_t>(s)].cumulative();
  }

  const Classification cls = classify_step(*library_, report.skill_logliks, fsm_index);
  report.argmax_index = cls.argmax_index;
  report.argmax_skill = library_->skills()[static_cast<std::size_t>(cls.argmax_index)].skill_id;
  report.tie = cls.tie;
  report.correct = cls.correct;

  const auto& fsm_rec = recursions_[static_cast<std::size_t>(fsm_index)];
  const int scored_step = fsm_rec.frames_scored();
  if (scored_step >= 1) {
    const AnomalyDecision dec =
        detect_anomaly_step(library_->skills()[static_cast<std::size_t>(fsm_index)],
                            report.skill_logliks[fsm_index], scored_step, anomaly_k_);
    report.anomaly = dec.flag;
    report.threshold = dec.threshold;
    report.scored = true;
  }
  return report;
}

std::vector<IntrospectionReport> monitor_stream(const SkillLibrary& library,
                                                const Eigen::MatrixXd& observations,
                                                const std::vector<std::string>& fsm_skills,
                                                double anomaly_k) {
  if (static_cast<Eigen::Index>(fsm_skills.size()) != observations.rows()) {
    throw ShapeError("one FSM skill id per observation frame is required");
  }
  MonitorState state(library, anomaly_k);
  std::vector<IntrospectionReport> reports;
  reports.reserve(fsm_skills.size());
  for (Eigen::Index t = 0; t < observations.rows(); ++t) {
    reports.push_back(state.step(observations.row(t).transpose(),
                                 fsm_skills[static_cast<std::size_t>(t)]));
  }
  return reports;
}

double decision_time(const std::vector<IntrospectionReport>& reports) {
  if (reports.empty()) {
    throw InvalidParameterError("decision time needs at least one report");
  }
  const auto total = static_cast<int>(reports.size());
  int stable_from = total + 1;  // 1-based start of the correct suffix
  for (int t = total; t >= 1; --t) {
    if (!reports[static_cast<std::size_t>(t - 1)].correct) {
      break;
    }
    stable_from = t;
  }
  if (stable_from > total) {
    return 1.0;
  }
  return static_cast<double>(stable_from) / static_cast<double>(total);
}

double first_correct_time(const std::vector<IntrospectionReport>& reports) {
  if (reports.empty()) {
    throw InvalidParameterError("decision time needs at least one report");
  }
  for (std::size_t t = 0; t < reports.size(); ++t) {
    if (reports[t].correct) {
      return static_cast<double>(t + 1) / static_cast<double>(reports.size());
    }
  }
  return 1.0;
}

}  // namespace varhmm
