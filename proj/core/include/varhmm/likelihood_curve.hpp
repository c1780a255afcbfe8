#pragma once

#include <Eigen/Dense>
#include <vector>

#include "varhmm/model.hpp"
#include "varhmm/sequence.hpp"

namespace varhmm {

/// Expected cumulative log-likelihood curve: per-step mean and standard
/// deviation over training trials, indexed by scored step t = 1, 2, ...
/// Defined up to support_length (the largest step with >= 2 contributing
/// trials); lookups beyond that hold the last value.
class LikelihoodCurve {
 public:
  LikelihoodCurve(std::vector<double> mean, std::vector<double> stddev);

  int support_length() const { return static_cast<int>(mean_.size()); }
  double mean_at(int t) const;
  double stddev_at(int t) const;
  const std::vector<double>& means() const { return mean_; }
  const std::vector<double>& stddevs() const { return stddev_; }

 private:
  std::vector<double> mean_;
  std::vector<double> stddev_;
};

/// Per-step mean/std over the trials' cumulative log-likelihood curves;
/// steps past a trial's end do not contribute to that step's statistics.
/// Requires >= 2 trials.
LikelihoodCurve build_curve(const ShdpVarModel& model,
                            const std::vector<ObservationSequence>& trials);

/// Same aggregation over precomputed per-trial curves (used when each
/// trial's curve comes from its own leave-one-out model).
LikelihoodCurve build_curve_from_series(const std::vector<Eigen::VectorXd>& curves);

}  // namespace varhmm
