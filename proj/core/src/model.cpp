#include "varhmm/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "varhmm/distributions.hpp"
#include "varhmm/errors.hpp"

namespace varhmm {

namespace {
constexpr double kProbFloor = 1e-300;
}

void validate(const ObservationSequence& seq) {
  if (seq.frames() < 1) {
    throw InvalidParameterError("observation sequence must have at least one frame");
  }
  if (!seq.data.allFinite()) {
    throw InvalidParameterError("observation sequence '" + seq.trial_id +
                                "' has non-finite entries");
  }
  if (!(seq.sample_rate_hz > 0.0)) {
    throw InvalidParameterError("sample rate must be positive");
  }
}

void validate(const StickyHdpState& state) {
  const int L = state.truncation;
  if (L < 1) {
    throw InvalidParameterError("truncation must be >= 1");
  }
  if (state.beta.size() != L || state.pi.rows() != L || state.pi.cols() != L) {
    throw ShapeError("sticky HDP state dimensions do not match the truncation");
  }
  if (!state.beta.allFinite() || !state.pi.allFinite()) {
    throw InvalidParameterError("sticky HDP state has non-finite entries");
  }
  if (state.beta.minCoeff() < 0.0 || std::abs(state.beta.sum() - 1.0) > 1e-10) {
    throw InvalidParameterError("beta must be a simplex (sum error " +
                                std::to_string(state.beta.sum() - 1.0) + ")");
  }
  for (int j = 0; j < L; ++j) {
    if (state.pi.row(j).minCoeff() < 0.0 || std::abs(state.pi.row(j).sum() - 1.0) > 1e-10) {
      throw InvalidParameterError("pi row " + std::to_string(j) + " is not a distribution");
    }
  }
  if (!(state.alpha > 0.0) || !(state.gamma > 0.0) || state.kappa < 0.0) {
    throw InvalidParameterError("hyperparameters must satisfy alpha > 0, gamma > 0, kappa >= 0");
  }
  if (std::abs(state.rho - state.kappa / (state.alpha + state.kappa)) > 1e-12) {
    throw InvalidParameterError("rho must equal kappa / (alpha + kappa)");
  }
}

void validate(const ShdpVarModel& model) {
  validate(model.hdp);
  const int L = model.hdp.truncation;
  if (static_cast<int>(model.emissions.size()) != L) {
    throw ShapeError("model must have one emission per mode");
  }
  for (const auto& e : model.emissions) {
    if (e.dim() != model.obs_dim || e.order() != model.order) {
      throw ShapeError("all emissions must share the model's (obs_dim, order)");
    }
  }
  if (model.initial_distribution.size() != L ||
      model.initial_distribution.minCoeff() < 0.0 ||
      std::abs(model.initial_distribution.sum() - 1.0) > 1e-10) {
    throw InvalidParameterError("initial distribution must be a length-L simplex");
  }
}

ForwardRecursion::ForwardRecursion(const ShdpVarModel& model) : model_(&model) {
  validate(model);
  // Probabilities are floored before entering the log domain so a zero
  // transition cannot poison log-sum-exp with -inf against all modes.
  pi_floor_ = model.hdp.pi.cwiseMax(kProbFloor);
  log_init_floor_ = model.initial_distribution.cwiseMax(kProbFloor).array().log().matrix();
  reset();
}

void ForwardRecursion::reset() {
  const int L = model_->hdp.truncation;
  log_state_ = Eigen::VectorXd::Zero(L);
  lag_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model_->obs_dim) * model_->order);
  loglik_buf_.resize(L);
  work_.resize(L);
  cumulative_ = 0.0;
  frames_seen_ = 0;
}

std::optional<double> ForwardRecursion::push(const Eigen::Ref<const Eigen::VectorXd>& y) {
  const int d = model_->obs_dim;
  const int r = model_->order;
  const int L = model_->hdp.truncation;
  if (y.size() != d) {
    throw ShapeError("frame dimension " + std::to_string(y.size()) + " does not match model " +
                     std::to_string(d));
  }
  if (!y.allFinite()) {
    throw DataError("non-finite observation at frame " + std::to_string(frames_seen_ + 1));
  }
  ++frames_seen_;

  const bool scoring = frames_seen_ > r;
  if (scoring) {
    for (int k = 0; k < L; ++k) {
      loglik_buf_[k] = model_->emissions[static_cast<std::size_t>(k)].loglik_stacked(y, lag_);
    }
    if (frames_seen_ == r + 1) {
      work_ = log_init_floor_ + loglik_buf_;
    } else {
      // One-step predictive in the linear domain against the normalized
      // filtered state: exp(log_state_) sums to 1, so the matrix-vector
      // product cannot overflow and cannot underflow to all zeros.
      const Eigen::VectorXd pred =
          (pi_floor_.transpose() * log_state_.array().exp().matrix()).array().log().matrix();
      work_ = pred + loglik_buf_;
    }
    const double step = log_sum_exp(work_);
    cumulative_ += step;
    log_state_ = (work_.array() - step).matrix();
  }

  if (r > 0) {
    if (r > 1) {
      lag_.tail(static_cast<Eigen::Index>(d) * (r - 1)) =
          lag_.head(static_cast<Eigen::Index>(d) * (r - 1)).eval();
    }
    lag_.head(d) = y;
  }
  return scoring ? std::optional<double>(cumulative_) : std::nullopt;
}

Eigen::VectorXd forward_cumulative_loglik(const ShdpVarModel& model,
                                          const ObservationSequence& seq) {
  validate(seq);
  if (seq.dim() != model.obs_dim) {
    throw ShapeError("sequence dimension does not match the model");
  }
  if (seq.frames() <= model.order) {
    throw InsufficientHistoryError("sequence has " + std::to_string(seq.frames()) +
                                   " frames; need more than the order " +
                                   std::to_string(model.order));
  }
  ForwardRecursion rec(model);
  Eigen::VectorXd out(seq.frames() - model.order);
  Eigen::Index next = 0;
  for (Eigen::Index t = 0; t < seq.frames(); ++t) {
    if (auto cum = rec.push(seq.data.row(t).transpose())) {
      out[next++] = *cum;
    }
  }
  return out;
}

Trajectory sample_trajectory(const ShdpVarModel& model, int frames, RngStream& rng) {
  validate(model);
  if (frames <= model.order) {
    throw InsufficientHistoryError("trajectory length must exceed the order");
  }
  const int d = model.obs_dim;
  const int r = model.order;

  Trajectory out;
  out.states.resize(static_cast<std::size_t>(frames));
  out.seq.data.resize(frames, d);

  Eigen::VectorXd lag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d) * r);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  for (int t = 0; t < frames; ++t) {
    const int z = (t == 0) ? sample_categorical(model.initial_distribution, rng)
                           : sample_categorical(
                                 model.hdp.pi.row(out.states[static_cast<std::size_t>(t - 1)])
                                     .transpose(),
                                 rng);
    out.states[static_cast<std::size_t>(t)] = z;
    const VarEmission& em = model.emissions[static_cast<std::size_t>(z)];
    Eigen::VectorXd noise(d);
    for (int i = 0; i < d; ++i) {
      noise[i] = unit_normal(rng);
    }
    const Eigen::VectorXd y =
        em.predict_stacked(lag) + em.noise().llt().matrixL() * noise;
    out.seq.data.row(t) = y.transpose();
    if (r > 0) {
      if (r > 1) {
        lag.tail(static_cast<Eigen::Index>(d) * (r - 1)) =
            lag.head(static_cast<Eigen::Index>(d) * (r - 1)).eval();
      }
      lag.head(d) = y;
    }
  }
  return out;
}

}  // namespace varhmm
