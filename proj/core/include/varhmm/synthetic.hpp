#pragma once

#include <string>
#include <vector>

#include "varhmm/model.hpp"
#include "varhmm/rng.hpp"
#include "varhmm/trial.hpp"

namespace varhmm {

/// Scheduled disturbance for synthetic data. Frame ranges are half-open;
/// spikes act on start_frame only. Magnitudes are in units of the active
/// mode's per-channel noise standard deviation.
struct AnomalyInjection {
  enum class Kind { kSpike, kNoiseInflation, kDynamicsSwap };
  Kind kind = Kind::kSpike;
  int start_frame = 0;
  int end_frame = 0;
  double magnitude = 10.0;
  int swap_mode = 0;  // kDynamicsSwap: emission index used inside the span
};

struct LabeledSequence {
  ObservationSequence seq;
  std::vector<int> states;          // ground-truth mode per frame
  std::vector<int> anomaly_frames;  // frames carrying an injected disturbance
};

/// Roll out the truth model with injections applied during generation, so
/// spikes propagate through the autoregressive dynamics.
LabeledSequence generate_sequence(const ShdpVarModel& truth, int frames,
                                  const std::vector<AnomalyInjection>& injections,
                                  RngStream& rng);

/// Deterministic mode schedule instead of a Markov chain.
struct ModeSpan {
  int mode = 0;
  int frames = 0;
};
LabeledSequence generate_scheduled(const std::vector<VarEmission>& emissions,
                                   const std::vector<ModeSpan>& schedule,
                                   const std::vector<AnomalyInjection>& injections,
                                   RngStream& rng);

/// Wrench-space (d = 6) task models for end-to-end benchmarks.
enum class TaskStyle {
  /// Skills with clearly distinct rotation/decay dynamics and noise scales.
  kSeparatedDynamics,
  /// Exactly two skills whose observations match in lag-0/lag-1 second
  /// moments and differ only at lag 2 (order-0 models are blind to them).
  kDynamicsOnly,
};

struct SyntheticTask {
  std::vector<std::string> skill_ids;
  std::vector<ShdpVarModel> skill_truths;  // wrench space, d = 6
};

SyntheticTask make_synthetic_task(int skills, TaskStyle style, RngStream& rng);

struct TrialSynthesisConfig {
  int frames_per_skill = 200;
  double frame_jitter_frac = 0.1;  // uniform +- length jitter per segment
  double sample_rate_hz = 200.0;
  bool include_pose = true;
  double spike_magnitude = 10.0;  // injected into anomalous trials
};

/// One full task execution: every skill in order, one segment each.
/// Anomalous trials receive a spike at the midpoint of an rng-chosen segment.
RawTrial synthesize_trial(const SyntheticTask& task, const std::string& trial_id,
                          const TrialSynthesisConfig& config, bool anomalous, RngStream& rng);

}  // namespace varhmm
