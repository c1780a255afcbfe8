#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace varhmm {

enum class TrialOutcome { kNominal, kAnomalous };

std::string to_string(TrialOutcome outcome);
TrialOutcome outcome_from_string(const std::string& s);

/// One skill execution within a trial; frame range is half-open [start, end).
struct SkillSegment {
  std::string skill_id;
  int start_frame = 0;
  int end_frame = 0;
};

/// A recorded (or synthesized) trial: timestamps, end-effector wrench,
/// optional pose (position + unit quaternion, scalar part first) and the
/// FSM skill boundaries. Synthetic trials may carry ground-truth mode labels
/// and injected-anomaly frames.
struct RawTrial {
  std::string trial_id;
  Eigen::VectorXd timestamps;           // seconds, strictly increasing
  Eigen::MatrixXd wrench;               // T x 6: fx fy fz tx ty tz
  std::optional<Eigen::MatrixXd> pose;  // T x 7: px py pz qw qx qy qz
  std::vector<SkillSegment> segments;
  TrialOutcome outcome = TrialOutcome::kNominal;

  std::vector<int> true_states;     // per frame, synthetic only
  std::vector<int> anomaly_frames;  // injected anomaly frames, synthetic only

  Eigen::Index frames() const { return wrench.rows(); }
};

void validate(const RawTrial& trial);

enum class DerivativeMethod { kBackward, kCentral };

std::string to_string(DerivativeMethod method);
DerivativeMethod derivative_method_from_string(const std::string& s);

/// Observation-vector construction: wrench and its first derivative, with
/// pose appended when enabled (d = 12 without pose, 19 with).
struct FeatureConfig {
  bool include_pose = false;
  DerivativeMethod derivative = DerivativeMethod::kBackward;
  int smoothing_window = 5;  // odd, >= 1; applied to wrench before differencing
};

void validate(const FeatureConfig& config);
int feature_dim(const FeatureConfig& config);

}  // namespace varhmm
