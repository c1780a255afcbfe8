#include "varhmm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "varhmm/distributions.hpp"
#include "varhmm/errors.hpp"

namespace varhmm {
namespace {

struct InjectionPlan {
  std::vector<double> noise_scale;   // per frame
  std::vector<int> mode_override;    // -1 = none
  std::vector<double> spike;         // magnitude, 0 = none
  std::vector<int> anomaly_frames;
};

InjectionPlan plan_injections(int frames, int modes,
                              const std::vector<AnomalyInjection>& injections) {
  InjectionPlan plan;
  plan.noise_scale.assign(static_cast<std::size_t>(frames), 1.0);
  plan.mode_override.assign(static_cast<std::size_t>(frames), -1);
  plan.spike.assign(static_cast<std::size_t>(frames), 0.0);
  for (const auto& inj : injections) {
    if (inj.kind == AnomalyInjection::Kind::kSpike) {
      if (inj.start_frame < 0 || inj.start_frame >= frames) {
        throw InvalidParameterError("spike frame out of range");
      }
      plan.spike[static_cast<std::size_t>(inj.start_frame)] = inj.magnitude;
      plan.anomaly_frames.push_back(inj.start_frame);
      continue;
    }
    if (inj.start_frame < 0 || inj.end_frame <= inj.start_frame || inj.end_frame > frames) {
      throw InvalidParameterError("injection span out of range");
    }
    for (int t = inj.start_frame; t < inj.end_frame; ++t) {
      if (inj.kind == AnomalyInjection::Kind::kNoiseInflation) {
        plan.noise_scale[static_cast<std::size_t>(t)] = inj.magnitude;
      } else {
        if (inj.swap_mode < 0 || inj.swap_mode >= modes) {
          throw InvalidParameterError("dynamics-swap mode out of range");
        }
        plan.mode_override[static_cast<std::size_t>(t)] = inj.swap_mode;
      }
      plan.anomaly_frames.push_back(t);
    }
  }
  std::sort(plan.anomaly_frames.begin(), plan.anomaly_frames.end());
  plan.anomaly_frames.erase(std::unique(plan.anomaly_frames.begin(), plan.anomaly_frames.end()),
                            plan.anomaly_frames.end());
  return plan;
}

LabeledSequence run_generation(const std::vector<VarEmission>& emissions, std::vector<int> states,
                               const std::vector<AnomalyInjection>& injections, RngStream& rng) {
  if (emissions.empty()) {
    throw InvalidParameterError("generation needs at least one emission");
  }
  const int d = emissions.front().dim();
  const int r = emissions.front().order();
  const int frames = static_cast<int>(states.size());
  InjectionPlan plan = plan_injections(frames, static_cast<int>(emissions.size()), injections);

  LabeledSequence out;
  out.seq.data.resize(frames, d);
  Eigen::VectorXd lag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d) * r);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  for (int t = 0; t < frames; ++t) {
    const std::size_t ti = static_cast<std::size_t>(t);
    const int mode = plan.mode_override[ti] >= 0 ? plan.mode_override[ti] : states[ti];
    const VarEmission& em = emissions[static_cast<std::size_t>(mode)];
    Eigen::VectorXd noise(d);
    for (int i = 0; i < d; ++i) {
      noise[i] = unit_normal(rng);
    }
    const Eigen::VectorXd shock = em.noise().llt().matrixL() * noise;
    Eigen::VectorXd y = em.predict_stacked(lag) + plan.noise_scale[ti] * shock;
    if (plan.spike[ti] != 0.0) {
      y += plan.spike[ti] * em.noise().matrix().diagonal().cwiseSqrt();
    }
    out.seq.data.row(t) = y.transpose();
    if (r > 0) {
      if (r > 1) {
        lag.tail(static_cast<Eigen::Index>(d) * (r - 1)) =
            lag.head(static_cast<Eigen::Index>(d) * (r - 1)).eval();
      }
      lag.head(d) = y;
    }
  }
  out.states = std::move(states);
  out.anomaly_frames = std::move(plan.anomaly_frames);
  return out;
}

Eigen::MatrixXd rotation_block_diagonal(double angle, double decay) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6, 6);
  const double c = decay * std::cos(angle);
  const double s = decay * std::sin(angle);
  for (int b = 0; b < 3; ++b) {
    a(2 * b, 2 * b) = c;
    a(2 * b, 2 * b + 1) = -s;
    a(2 * b + 1, 2 * b) = s;
    a(2 * b + 1, 2 * b + 1) = c;
  }
  return a;
}

ShdpVarModel wrench_space_model(std::vector<VarEmission> emissions, const Eigen::MatrixXd& pi) {
  const int modes = static_cast<int>(emissions.size());
  ShdpVarModel model;
  model.obs_dim = 6;
  model.order = emissions.front().order();
  model.emissions = std::move(emissions);
  model.hdp.truncation = modes;
  model.hdp.beta = Eigen::VectorXd::Constant(modes, 1.0 / modes);
  model.hdp.pi = pi;
  model.hdp.alpha = 1.0;
  model.hdp.gamma = 1.0;
  model.hdp.kappa = 0.0;
  model.hdp.rho = 0.0;
  model.initial_distribution = Eigen::VectorXd::Zero(modes);
  model.initial_distribution[0] = 1.0;  // segments start in mode 0
  validate(model);
  return model;
}

}  // namespace

LabeledSequence generate_sequence(const ShdpVarModel& truth, int frames,
                                  const std::vector<AnomalyInjection>& injections,
                                  RngStream& rng) {
  validate(truth);
  if (frames <= truth.order) {
    throw InsufficientHistoryError("sequence length must exceed the order");
  }
  std::vector<int> states(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    states[static_cast<std::size_t>(t)] =
        (t == 0)
            ? sample_categorical(truth.initial_distribution, rng)
            : sample_categorical(
                  truth.hdp.pi.row(states[static_cast<std::size_t>(t - 1)]).transpose(), rng);
  }
  return run_generation(truth.emissions, std::move(states), injections, rng);
}

LabeledSequence generate_scheduled(const std::vector<VarEmission>& emissions,
                                   const std::vector<ModeSpan>& schedule,
                                   const std::vector<AnomalyInjection>& injections,
                                   RngStream& rng) {
  std::vector<int> states;
  for (const auto& span : schedule) {
    if (span.mode < 0 || span.mode >= static_cast<int>(emissions.size()) || span.frames < 1) {
      throw InvalidParameterError("invalid mode span in schedule");
    }
    states.insert(states.end(), static_cast<std::size_t>(span.frames), span.mode);
  }
  if (states.empty()) {
    throw InvalidParameterError("schedule must cover at least one frame");
  }
  return run_generation(emissions, std::move(states), injections, rng);
}

SyntheticTask make_synthetic_task(int skills, TaskStyle style, RngStream& rng) {
  if (skills < 1) {
    throw InvalidParameterError("task needs at least one skill");
  }
  SyntheticTask task;
  if (style == TaskStyle::kDynamicsOnly) {
    if (skills != 2) {
      throw InvalidParameterError("the dynamics-only task is defined for exactly 2 skills");
    }
    // Per-channel AR(2) pairs matched in lag-0/lag-1 autocovariance
    // (gamma0 = 1, gamma1 = 0.75 for both): only lag-2 structure separates
    // the skills.
    const double params[2][3] = {{0.6, 0.2, 0.42}, {0.3, 0.6, 0.28}};
    for (int s = 0; s < 2; ++s) {
      std::vector<Eigen::MatrixXd> coeffs{params[s][0] * Eigen::MatrixXd::Identity(6, 6),
                                          params[s][1] * Eigen::MatrixXd::Identity(6, 6)};
      std::vector<VarEmission> em;
      em.emplace_back(std::move(coeffs), SpdMatrix::scaled_identity(6, params[s][2]));
      task.skill_truths.push_back(
          wrench_space_model(std::move(em), Eigen::MatrixXd::Constant(1, 1, 1.0)));
      task.skill_ids.push_back("skill_" + std::string(1, static_cast<char>('a' + s)));
    }
    return task;
  }

  // Distinct rotation/decay dynamics and noise scales per skill and mode,
  // with slight seeded jitter so replicate tasks are not identical.
  Eigen::MatrixXd pi(2, 2);
  pi << 0.97, 0.03, 0.03, 0.97;
  for (int s = 0; s < skills; ++s) {
    std::vector<VarEmission> em;
    for (int m = 0; m < 2; ++m) {
      const double angle = 0.25 + 0.45 * s + 0.30 * m + 0.02 * rng.normal();
      const double decay = 0.92 - 0.05 * m;
      const double sigma = 0.30 + 0.10 * m;
      std::vector<Eigen::MatrixXd> coeffs{rotation_block_diagonal(angle, decay)};
      em.emplace_back(std::move(coeffs), SpdMatrix::scaled_identity(6, sigma * sigma));
    }
    task.skill_truths.push_back(wrench_space_model(std::move(em), pi));
    task.skill_ids.push_back("skill_" + std::string(1, static_cast<char>('a' + s)));
  }
  return task;
}

RawTrial synthesize_trial(const SyntheticTask& task, const std::string& trial_id,
                          const TrialSynthesisConfig& config, bool anomalous, RngStream& rng) {
  if (task.skill_ids.empty() || task.skill_ids.size() != task.skill_truths.size()) {
    throw InvalidParameterError("task must pair every skill id with a truth model");
  }
  if (config.frames_per_skill < 20 || !(config.sample_rate_hz > 0.0)) {
    throw InvalidParameterError("need frames_per_skill >= 20 and a positive sample rate");
  }
  const int n_skills = static_cast<int>(task.skill_ids.size());
  const int burn = 40;  // discard the zero-history transient per segment

  const int anomaly_segment =
      anomalous ? static_cast<int>(rng() % static_cast<std::uint64_t>(n_skills)) : -1;

  RawTrial trial;
  trial.trial_id = trial_id;
  trial.outcome = anomalous ? TrialOutcome::kAnomalous : TrialOutcome::kNominal;

  std::vector<Eigen::MatrixXd> wrench_parts;
  int total_frames = 0;
  for (int s = 0; s < n_skills; ++s) {
    const int jitter_span = static_cast<int>(config.frame_jitter_frac * config.frames_per_skill);
    const int jitter =
        jitter_span > 0
            ? static_cast<int>(rng() % static_cast<std::uint64_t>(2 * jitter_span + 1)) -
                  jitter_span
            : 0;
    const int len = std::max(12, config.frames_per_skill + jitter);

    std::vector<AnomalyInjection> injections;
    if (s == anomaly_segment) {
      AnomalyInjection spike;
      spike.kind = AnomalyInjection::Kind::kSpike;
      spike.start_frame = burn + len / 2;
      spike.magnitude = config.spike_magnitude;
      injections.push_back(spike);
    }
    const LabeledSequence gen =
        generate_sequence(task.skill_truths[static_cast<std::size_t>(s)], burn + len, injections,
                          rng);
    wrench_parts.push_back(gen.seq.data.bottomRows(len));
    trial.segments.push_back(SkillSegment{task.skill_ids[static_cast<std::size_t>(s)],
                                          total_frames, total_frames + len});
    for (int t = 0; t < len; ++t) {
      trial.true_states.push_back(gen.states[static_cast<std::size_t>(burn + t)]);
    }
    for (int f : gen.anomaly_frames) {
      if (f >= burn) {
        trial.anomaly_frames.push_back(total_frames + (f - burn));
      }
    }
    total_frames += len;
  }

  trial.wrench.resize(total_frames, 6);
  int at = 0;
  for (const auto& part : wrench_parts) {
    trial.wrench.middleRows(at, part.rows()) = part;
    at += static_cast<int>(part.rows());
  }
  trial.timestamps.resize(total_frames);
  for (int t = 0; t < total_frames; ++t) {
    trial.timestamps[t] = static_cast<double>(t) / config.sample_rate_hz;
  }

  if (config.include_pose) {
    Eigen::MatrixXd pose = Eigen::MatrixXd::Zero(total_frames, 7);
    pose.col(3).setOnes();  // identity quaternion, scalar part first
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    int seg_index = 0;
    for (int t = 0; t < total_frames; ++t) {
      while (seg_index + 1 < n_skills && t >= trial.segments[seg_index].end_frame) {
        ++seg_index;
      }
      // Skill-dependent drift rate gives the pose channels identification value.
      const double rate = 0.002 * (seg_index + 1);
      position += Eigen::Vector3d(rate, -rate / 2.0, rate / 3.0) / config.sample_rate_hz;
      pose(t, 0) = position.x() + 1e-4 * rng.normal();
      pose(t, 1) = position.y() + 1e-4 * rng.normal();
      pose(t, 2) = position.z() + 1e-4 * rng.normal();
    }
    trial.pose = std::move(pose);
  }

  validate(trial);
  return trial;
}

}  // namespace varhmm
