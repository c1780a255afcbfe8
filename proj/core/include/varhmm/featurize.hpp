#pragma once

#include <Eigen/Dense>
#include <vector>

#include "varhmm/sequence.hpp"
#include "varhmm/trial.hpp"

namespace varhmm {

/// Observation matrix [wrench | d(wrench)/dt | pose?] for one frame range.
/// Derivatives are computed from the timestamps after an optional centered
/// moving average of the wrench; wrench channels themselves stay raw.
/// Quaternions are sign-canonicalized (nonnegative scalar part).
Eigen::MatrixXd feature_matrix(const Eigen::VectorXd& timestamps, const Eigen::MatrixXd& wrench,
                               const Eigen::MatrixXd* pose, const FeatureConfig& config);

/// One ObservationSequence per skill segment of the trial.
std::vector<ObservationSequence> featurize(const RawTrial& trial, const FeatureConfig& config);

ObservationSequence featurize_segment(const RawTrial& trial, const SkillSegment& segment,
                                      const FeatureConfig& config);

}  // namespace varhmm
