#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "varhmm/skill_library.hpp"

namespace varhmm {

/// Per-frame introspection output: per-skill cumulative log-likelihoods,
/// the argmax skill, and the anomaly decision for the FSM-indexed skill.
struct IntrospectionReport {
  int frame = 0;  // 1-based within the current skill execution
  std::string fsm_skill;
  Eigen::VectorXd skill_logliks;  // library order; 0.0 while conditioning
  int argmax_index = -1;
  std::string argmax_skill;
  bool correct = false;
  bool tie = false;
  bool anomaly = false;
  /// mu(t) - k*sigma(t) for the FSM skill; NaN while that skill is still
  /// conditioning on its first r frames.
  double threshold = std::numeric_limits<double>::quiet_NaN();
  bool scored = false;  // FSM skill produced a cumulative value this frame
};

/// Argmax classification over per-skill cumulative log-likelihoods. Exact
/// ties go to the lowest skill index and are recorded.
struct Classification {
  int argmax_index = 0;
  bool tie = false;
  bool correct = false;
};
Classification classify_step(const SkillLibrary& library, const Eigen::VectorXd& skill_logliks,
                             int fsm_index);

/// Lower-bound anomaly test against the skill's expected curve at scored
/// step t: flag iff value < mu(t) - k*sigma(t) (hold-last beyond support).
struct AnomalyDecision {
  bool flag = false;
  double threshold = 0.0;
};
AnomalyDecision detect_anomaly_step(const SkillModel& skill, double cumulative_loglik, int t,
                                    double anomaly_k);

/// Streaming monitor over feature-vector frames. An FSM transition resets
/// every per-skill recursion and the frame counter, so post-transition
/// reports are independent of earlier observations.
class MonitorState {
 public:
  explicit MonitorState(const SkillLibrary& library, double anomaly_k = 3.0);

  IntrospectionReport step(const Eigen::Ref<const Eigen::VectorXd>& y,
                           const std::string& fsm_skill);
  void reset();
  int frame() const { return frame_; }
  double anomaly_k() const { return anomaly_k_; }

 private:
  const SkillLibrary* library_;
  std::vector<ForwardRecursion> recursions_;
  std::string current_fsm_;
  int frame_ = 0;
  double anomaly_k_;
};

/// Batch wrapper: one report per frame of `observations` (rows), with
/// per-frame FSM skill ids. Cumulative values equal forward_cumulative_loglik
/// per skill at every frame, bit-exact.
std::vector<IntrospectionReport> monitor_stream(const SkillLibrary& library,
                                                const Eigen::MatrixXd& observations,
                                                const std::vector<std::string>& fsm_skills,
                                                double anomaly_k);

/// Fraction of the skill execution elapsed before classification becomes
/// stably correct (correct from t* through the end); 1.0 if never.
double decision_time(const std::vector<IntrospectionReport>& reports);

/// Fraction elapsed before the first correct frame; 1.0 if never correct.
double first_correct_time(const std::vector<IntrospectionReport>& reports);

}  // namespace varhmm
