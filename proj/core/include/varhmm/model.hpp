#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "varhmm/emission.hpp"
#include "varhmm/rng.hpp"
#include "varhmm/sequence.hpp"
#include "varhmm/sticky_hdp.hpp"

namespace varhmm {

/// A fitted (or hand-built) sticky HDP-VAR(r)-HMM: shared HDP state plus one
/// VAR emission per mode. Immutable after construction by convention; safe
/// to share across concurrent readers.
struct ShdpVarModel {
  StickyHdpState hdp;
  std::vector<VarEmission> emissions;  // length L, shared (d, r)
  int obs_dim = 0;
  int order = 0;
  Eigen::VectorXd initial_distribution;  // length L, sums to 1
};

void validate(const ShdpVarModel& model);

/// Incremental forward recursion over one observation stream, in the log
/// domain. The first `order` frames condition the likelihood and are not
/// scored; from then on each push returns the cumulative log-likelihood
/// log P(y_{r+1:t} | y_{1:r}, model). The batch and streaming paths share
/// this code, so their outputs are bit-identical.
class ForwardRecursion {
 public:
  explicit ForwardRecursion(const ShdpVarModel& model);

  void reset();

  /// Feed one frame. Returns the updated cumulative log-likelihood, or
  /// nullopt while the first r frames are being buffered.
  std::optional<double> push(const Eigen::Ref<const Eigen::VectorXd>& y);

  /// Cumulative log-likelihood so far (0.0 before the first scored frame).
  double cumulative() const { return cumulative_; }
  int frames_seen() const { return frames_seen_; }
  int frames_scored() const { return std::max(0, frames_seen_ - model_->order); }
  const ShdpVarModel& model() const { return *model_; }

 private:
  const ShdpVarModel* model_;
  Eigen::MatrixXd pi_floor_;        // transition matrix floored at 1e-300
  Eigen::VectorXd log_init_floor_;  // floored initial distribution, log domain
  Eigen::VectorXd log_state_;       // normalized filtered log-probabilities
  Eigen::VectorXd lag_;             // stacked history, most recent block first
  Eigen::VectorXd loglik_buf_, work_;
  double cumulative_ = 0.0;
  int frames_seen_ = 0;
};

/// Cumulative log-likelihood curve for a whole sequence; entry t (0-based)
/// holds log P(y_{r+1:r+1+t} | y_{1:r}, model). Length is T - r.
Eigen::VectorXd forward_cumulative_loglik(const ShdpVarModel& model,
                                          const ObservationSequence& seq);

struct Trajectory {
  std::vector<int> states;  // z_1..z_T
  ObservationSequence seq;
};

/// Generative roll-out: states from pi (first from the initial
/// distribution), observations from the per-mode emissions with zero history
/// padding for the first r frames.
Trajectory sample_trajectory(const ShdpVarModel& model, int frames, RngStream& rng);

}  // namespace varhmm
