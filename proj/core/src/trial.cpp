#include "varhmm/trial.hpp"

#include <cmath>
#include <string>

#include "varhmm/errors.hpp"

namespace varhmm {

std::string to_string(TrialOutcome outcome) {
  return outcome == TrialOutcome::kNominal ? "nominal" : "anomalous";
}

TrialOutcome outcome_from_string(const std::string& s) {
  if (s == "nominal") {
    return TrialOutcome::kNominal;
  }
  if (s == "anomalous") {
    return TrialOutcome::kAnomalous;
  }
  throw ParseError("unknown outcome '" + s + "' (expected nominal|anomalous)");
}

std::string to_string(DerivativeMethod method) {
  return method == DerivativeMethod::kBackward ? "backward" : "central";
}

DerivativeMethod derivative_method_from_string(const std::string& s) {
  if (s == "backward") {
    return DerivativeMethod::kBackward;
  }
  if (s == "central") {
    return DerivativeMethod::kCentral;
  }
  throw ParseError("unknown derivative method '" + s + "' (expected backward|central)");
}

void validate(const RawTrial& trial) {
  const Eigen::Index frames = trial.wrench.rows();
  if (frames < 1) {
    throw InvalidParameterError("trial '" + trial.trial_id + "' has no frames");
  }
  if (trial.wrench.cols() != 6) {
    throw ShapeError("wrench must have 6 columns");
  }
  if (trial.timestamps.size() != frames) {
    throw ShapeError("timestamps must match the frame count");
  }
  if (!trial.wrench.allFinite() || !trial.timestamps.allFinite()) {
    throw InvalidParameterError("trial '" + trial.trial_id + "' has non-finite entries");
  }
  for (Eigen::Index t = 1; t < frames; ++t) {
    if (!(trial.timestamps[t] > trial.timestamps[t - 1])) {
      throw InvalidParameterError("trial '" + trial.trial_id +
                                  "' timestamps must be strictly increasing (frame " +
                                  std::to_string(t) + ")");
    }
  }
  if (trial.pose) {
    if (trial.pose->rows() != frames || trial.pose->cols() != 7) {
      throw ShapeError("pose must be T x 7");
    }
    if (!trial.pose->allFinite()) {
      throw InvalidParameterError("pose has non-finite entries");
    }
    for (Eigen::Index t = 0; t < frames; ++t) {
      const double norm = trial.pose->row(t).tail(4).norm();
      if (std::abs(norm - 1.0) > 1e-6) {
        throw InvalidParameterError("quaternion at frame " + std::to_string(t) +
                                    " is not unit-norm (|q| = " + std::to_string(norm) + ")");
      }
    }
  }
  int prev_end = 0;
  for (const auto& seg : trial.segments) {
    if (seg.skill_id.empty()) {
      throw InvalidParameterError("segment skill_id must not be empty");
    }
    if (seg.start_frame < prev_end || seg.end_frame <= seg.start_frame ||
        seg.end_frame > frames) {
      throw InvalidParameterError("segments of trial '" + trial.trial_id +
                                  "' must be ordered, non-overlapping and within range");
    }
    prev_end = seg.end_frame;
  }
}

void validate(const FeatureConfig& config) {
  if (config.smoothing_window < 1 || config.smoothing_window % 2 == 0) {
    throw InvalidParameterError("smoothing window must be an odd integer >= 1, got " +
                                std::to_string(config.smoothing_window));
  }
}

int feature_dim(const FeatureConfig& config) { return config.include_pose ? 19 : 12; }

}  // namespace varhmm
