#include "varhmm/likelihood_curve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "varhmm/errors.hpp"

namespace varhmm {

LikelihoodCurve::LikelihoodCurve(std::vector<double> mean, std::vector<double> stddev)
    : mean_(std::move(mean)), stddev_(std::move(stddev)) {
  if (mean_.empty() || mean_.size() != stddev_.size()) {
    throw InvalidParameterError("curve needs matching non-empty mean/std vectors");
  }
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    if (!std::isfinite(mean_[i]) || !std::isfinite(stddev_[i]) || stddev_[i] < 0.0) {
      throw InvalidParameterError("curve entries must be finite with stddev >= 0 (step " +
                                  std::to_string(i + 1) + ")");
    }
  }
}

double LikelihoodCurve::mean_at(int t) const {
  if (t < 1) {
    throw InvalidParameterError("curve lookup index must be >= 1");
  }
  return mean_[static_cast<std::size_t>(std::min(t, support_length())) - 1];
}

double LikelihoodCurve::stddev_at(int t) const {
  if (t < 1) {
    throw InvalidParameterError("curve lookup index must be >= 1");
  }
  return stddev_[static_cast<std::size_t>(std::min(t, support_length())) - 1];
}

LikelihoodCurve build_curve_from_series(const std::vector<Eigen::VectorXd>& curves) {
  if (curves.size() < 2) {
    throw InsufficientDataError("expected-likelihood curve needs at least 2 trials, got " +
                                std::to_string(curves.size()));
  }
  Eigen::Index support = 0;
  for (const auto& c : curves) {
    if (c.size() < 1) {
      throw InsufficientDataError("every trial curve must have at least one scored step");
    }
  }
  // support = largest step with >= 2 active trials: the second-longest curve.
  std::vector<Eigen::Index> lengths;
  lengths.reserve(curves.size());
  for (const auto& c : curves) {
    lengths.push_back(c.size());
  }
  std::sort(lengths.begin(), lengths.end());
  support = lengths[lengths.size() - 2];

  std::vector<double> mean(static_cast<std::size_t>(support));
  std::vector<double> stddev(static_cast<std::size_t>(support));
  for (Eigen::Index t = 0; t < support; ++t) {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : curves) {
      if (c.size() > t) {
        sum += c[t];
        ++n;
      }
    }
    const double mu = sum / n;
    double ss = 0.0;
    for (const auto& c : curves) {
      if (c.size() > t) {
        ss += (c[t] - mu) * (c[t] - mu);
      }
    }
    mean[static_cast<std::size_t>(t)] = mu;
    stddev[static_cast<std::size_t>(t)] = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  }
  return LikelihoodCurve(std::move(mean), std::move(stddev));
}

LikelihoodCurve build_curve(const ShdpVarModel& model,
                            const std::vector<ObservationSequence>& trials) {
  if (trials.size() < 2) {
    throw InsufficientDataError("expected-likelihood curve needs at least 2 trials, got " +
                                std::to_string(trials.size()));
  }
  std::vector<Eigen::VectorXd> curves;
  curves.reserve(trials.size());
  for (const auto& trial : trials) {
    curves.push_back(forward_cumulative_loglik(model, trial));
  }
  return build_curve_from_series(curves);
}

}  // namespace varhmm
