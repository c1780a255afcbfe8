#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace varhmm {

/// A fixed-rate multivariate time series (frames are rows).
struct ObservationSequence {
  Eigen::MatrixXd data;  // T x d, finite, T >= 1
  double sample_rate_hz = 200.0;
  std::string trial_id;
  std::optional<std::string> skill_label;

  Eigen::Index frames() const { return data.rows(); }
  Eigen::Index dim() const { return data.cols(); }
};

/// Throws unless T >= 1, entries are finite and the rate is positive.
void validate(const ObservationSequence& seq);

}  // namespace varhmm
