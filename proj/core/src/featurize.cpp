#include "varhmm/featurize.hpp"

#include <algorithm>
#include <string>

#include "varhmm/errors.hpp"

namespace varhmm {
namespace {

Eigen::MatrixXd moving_average(const Eigen::MatrixXd& x, int window) {
  if (window <= 1) {
    return x;
  }
  const Eigen::Index frames = x.rows();
  const int half = window / 2;
  Eigen::MatrixXd out(frames, x.cols());
  for (Eigen::Index t = 0; t < frames; ++t) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, t - half);
    const Eigen::Index hi = std::min<Eigen::Index>(frames - 1, t + half);
    out.row(t) = x.middleRows(lo, hi - lo + 1).colwise().mean();
  }
  return out;
}

Eigen::MatrixXd differentiate(const Eigen::MatrixXd& x, const Eigen::VectorXd& ts,
                              DerivativeMethod method) {
  const Eigen::Index frames = x.rows();
  Eigen::MatrixXd out(frames, x.cols());
  if (method == DerivativeMethod::kBackward) {
    for (Eigen::Index t = 1; t < frames; ++t) {
      out.row(t) = (x.row(t) - x.row(t - 1)) / (ts[t] - ts[t - 1]);
    }
    out.row(0) = out.row(1);
  } else {
    for (Eigen::Index t = 1; t + 1 < frames; ++t) {
      out.row(t) = (x.row(t + 1) - x.row(t - 1)) / (ts[t + 1] - ts[t - 1]);
    }
    out.row(0) = (x.row(1) - x.row(0)) / (ts[1] - ts[0]);
    out.row(frames - 1) = (x.row(frames - 1) - x.row(frames - 2)) / (ts[frames - 1] - ts[frames - 2]);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd feature_matrix(const Eigen::VectorXd& timestamps, const Eigen::MatrixXd& wrench,
                               const Eigen::MatrixXd* pose, const FeatureConfig& config) {
  validate(config);
  const Eigen::Index frames = wrench.rows();
  if (timestamps.size() != frames) {
    throw ShapeError("timestamps must match the frame count");
  }
  if (wrench.cols() != 6) {
    throw ShapeError("wrench must have 6 columns");
  }
  if (frames <= config.smoothing_window) {
    throw InsufficientDataError("segment length " + std::to_string(frames) +
                                " must exceed the smoothing window " +
                                std::to_string(config.smoothing_window));
  }
  if (config.include_pose && pose == nullptr) {
    throw ConfigError("feature config requests pose but the trial has no pose columns");
  }

  const int d = feature_dim(config);
  Eigen::MatrixXd out(frames, d);
  out.leftCols(6) = wrench;
  out.middleCols(6, 6) =
      differentiate(moving_average(wrench, config.smoothing_window), timestamps,
                    config.derivative);
  if (config.include_pose) {
    Eigen::MatrixXd p = *pose;
    if (p.rows() != frames || p.cols() != 7) {
      throw ShapeError("pose must be T x 7");
    }
    for (Eigen::Index t = 0; t < frames; ++t) {
      if (p(t, 3) < 0.0) {
        p.row(t).tail(4) *= -1.0;
      }
    }
    out.rightCols(7) = p;
  }
  return out;
}

ObservationSequence featurize_segment(const RawTrial& trial, const SkillSegment& segment,
                                      const FeatureConfig& config) {
  const Eigen::Index len = segment.end_frame - segment.start_frame;
  if (segment.start_frame < 0 || len < 1 || segment.end_frame > trial.frames()) {
    throw InvalidParameterError("segment range [" + std::to_string(segment.start_frame) + ", " +
                                std::to_string(segment.end_frame) + ") is outside trial '" +
                                trial.trial_id + "'");
  }
  const Eigen::VectorXd ts = trial.timestamps.segment(segment.start_frame, len);
  const Eigen::MatrixXd wrench = trial.wrench.middleRows(segment.start_frame, len);
  Eigen::MatrixXd pose;
  const Eigen::MatrixXd* pose_ptr = nullptr;
  if (config.include_pose) {
    if (!trial.pose) {
      throw ConfigError("feature config requests pose but trial '" + trial.trial_id +
                        "' has no pose columns");
    }
    pose = trial.pose->middleRows(segment.start_frame, len);
    pose_ptr = &pose;
  }

  ObservationSequence seq;
  seq.data = feature_matrix(ts, wrench, pose_ptr, config);
  seq.trial_id = trial.trial_id;
  seq.skill_label = segment.skill_id;
  seq.sample_rate_hz =
      len > 1 ? static_cast<double>(len - 1) / (ts[len - 1] - ts[0]) : 200.0;
  return seq;
}

std::vector<ObservationSequence> featurize(const RawTrial& trial, const FeatureConfig& config) {
  validate(trial);
  if (trial.segments.empty()) {
    throw InvalidParameterError("trial '" + trial.trial_id + "' has no skill segments");
  }
  std::vector<ObservationSequence> out;
  out.reserve(trial.segments.size());
  for (const auto& seg : trial.segments) {
    out.push_back(featurize_segment(trial, seg, config));
  }
  return out;
}

}  // namespace varhmm
