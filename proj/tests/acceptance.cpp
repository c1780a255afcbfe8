// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 10 (the joint-distribution sampler check) is slow-ish
// and opt-in via --with-geweke.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/test_support.hpp"
#include "varhmm/csv_io.hpp"
#include "varhmm/evaluation.hpp"
#include "varhmm/featurize.hpp"
#include "varhmm/gibbs.hpp"
#include "varhmm/library_io.hpp"
#include "varhmm/monitor.hpp"
#include "varhmm/synthetic.hpp"
#include "varhmm/training.hpp"

using namespace varhmm;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& detail) {
  if (!ok) {
    throw Failure(detail);
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Exact-inference oracle.

std::string criterion_forward_oracle() {
  RngStream rng(20260809);
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int instance = 0; instance < 1000; ++instance) {
    const int modes = 1 + static_cast<int>(rng() % 3);
    const int order = static_cast<int>(rng() % 2);
    const int dim = 1 + static_cast<int>(rng() % 2);
    const int frames = order + 1 + static_cast<int>(rng() % static_cast<unsigned>(6 - order));
    const ShdpVarModel model = testsup::random_model(modes, dim, order, rng);
    const Trajectory traj = sample_trajectory(model, frames, rng);
    const Eigen::VectorXd curve = forward_cumulative_loglik(model, traj.seq);
    const double oracle =
        testsup::exhaustive_forward_loglik(model, traj.seq, static_cast<int>(curve.size()));
    worst = std::max(worst, std::abs(curve[curve.size() - 1] - oracle));
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(worst < 1e-8, "max |forward - enumeration| = " + fmt(worst));
  require(elapsed < 10.0, "runtime " + fmt(elapsed) + "s exceeds 10s");
  return "1000 instances, max error " + fmt(worst) + ", " + fmt(elapsed) + "s";
}

// ---------------------------------------------------------------------------
// 2. MNIW conjugacy against ordinary least squares.

std::string criterion_conjugacy() {
  const auto start = std::chrono::steady_clock::now();
  RngStream rng(42);
  Eigen::MatrixXd a_true(2, 2);
  a_true << 0.55, -0.25, 0.30, 0.60;
  ShdpVarModel truth = testsup::random_model(1, 2, 1, rng);
  truth.emissions.clear();
  truth.emissions.emplace_back(std::vector<Eigen::MatrixXd>{a_true},
                               SpdMatrix::scaled_identity(2, 0.4));
  const Trajectory traj = sample_trajectory(truth, 5000, rng);

  Eigen::MatrixXd sxx = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd syx = Eigen::MatrixXd::Zero(2, 2);
  for (int t = 1; t < 5000; ++t) {
    const Eigen::VectorXd x = traj.seq.data.row(t - 1).transpose();
    sxx += x * x.transpose();
    syx += traj.seq.data.row(t).transpose() * x.transpose();
  }
  const Eigen::MatrixXd ols = sxx.ldlt().solve(syx.transpose()).transpose();

  GibbsConfig cfg;
  cfg.order = 1;
  cfg.truncation = 1;
  cfg.max_iters = 10;
  cfg.burn_in = 5;
  cfg.point_estimate_window = 5;
  const std::vector<ObservationSequence> data{traj.seq};
  const std::vector<std::vector<int>> assignments{std::vector<int>(4999, 0)};
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(2, 2);
  const int draws = 400;
  for (int i = 0; i < draws; ++i) {
    mean += update_emissions(data, assignments, cfg, rng)[0].coeffs()[0];
  }
  mean /= draws;
  const double dist = (mean - ols).norm();
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(dist < 0.05, "Frobenius distance to OLS = " + fmt(dist));
  require(elapsed < 30.0, "runtime " + fmt(elapsed) + "s exceeds 30s");
  return "posterior mean vs OLS Frobenius " + fmt(dist) + ", " + fmt(elapsed) + "s";
}

// ---------------------------------------------------------------------------
// 3. Segmentation recovery with the conservative defaults (L=20, 500 sweeps).

std::string criterion_segmentation() {
  const auto start = std::chrono::steady_clock::now();
  RngStream data_rng(7);
  const ShdpVarModel truth = testsup::three_mode_var1_truth();
  const Trajectory traj = sample_trajectory(truth, 2000, data_rng);

  GibbsConfig cfg;  // defaults: order 1, truncation 20, 500 sweeps
  const FitResult out = fit({traj.seq}, cfg, RngStream(101));

  RngStream decode_rng(55);
  const std::vector<int> decoded = sample_state_sequence(out.model, traj.seq, decode_rng);
  const std::vector<int> truth_scored(traj.states.begin() + 1, traj.states.end());
  const double accuracy = label_matched_accuracy(truth_scored, decoded);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(accuracy >= 0.90, "frame accuracy after label matching = " + fmt(accuracy));
  require(elapsed < 300.0, "runtime " + fmt(elapsed) + "s exceeds 5 min");
  return "accuracy " + fmt(accuracy) + " with L=20 and 500 sweeps, " + fmt(elapsed) + "s";
}

// ---------------------------------------------------------------------------
// 4. Sticky self-transition bias lowers generative switch counts.

std::string criterion_sticky_effect() {
  const double alpha = 3.0;
  int decreased = 0;
  for (int seed = 0; seed < 100; ++seed) {
    auto switches = [&](double kappa) {
      RngStream rng(5000 + static_cast<std::uint64_t>(seed));
      const int modes = 4;
      const Eigen::VectorXd beta =
          sample_dirichlet(Eigen::VectorXd::Constant(modes, 1.0), rng);
      ShdpVarModel model = testsup::random_model(modes, 1, 0, rng);
      model.hdp.alpha = alpha;
      model.hdp.kappa = kappa;
      model.hdp.rho = kappa / (alpha + kappa);
      model.hdp.beta = beta;
      model.hdp.pi =
          update_transitions(Eigen::MatrixXd::Zero(modes, modes), beta, alpha, kappa, rng);
      const Trajectory traj = sample_trajectory(model, 500, rng);
      int count = 0;
      for (std::size_t t = 1; t < traj.states.size(); ++t) {
        count += traj.states[t] != traj.states[t - 1] ? 1 : 0;
      }
      return count;
    };
    if (switches(10.0 * alpha) < switches(0.0)) {
      ++decreased;
    }
  }
  require(decreased >= 95, "switch counts decreased in only " + std::to_string(decreased) +
                               "/100 matched seeds");
  return "switch counts decreased in " + std::to_string(decreased) + "/100 matched seeds";
}

// ---------------------------------------------------------------------------
// 5. Autoregressive orders beat the order-0 baseline when only the dynamics
//    differ.

std::string criterion_order_advantage() {
  int order_wins = 0;
  const int replicates = 20;
  double mean_r0 = 0.0, mean_r1 = 0.0;
  for (int rep = 0; rep < replicates; ++rep) {
    RngStream task_rng(900 + static_cast<std::uint64_t>(rep));
    const SyntheticTask task = make_synthetic_task(2, TaskStyle::kDynamicsOnly, task_rng);
    TrialSynthesisConfig synth;
    synth.frames_per_skill = 120;
    synth.include_pose = false;
    std::vector<RawTrial> trials;
    char buf[32];
    for (int i = 0; i < 4; ++i) {
      std::snprintf(buf, sizeof(buf), "trial_%02d", i);
      RngStream rng = RngStream(7000 + static_cast<std::uint64_t>(rep)).derive(buf);
      trials.push_back(synthesize_trial(task, buf, synth, false, rng));
    }

    EvalConfig cfg;
    cfg.orders = {0, 1};
    FeatureConfig features;
    features.smoothing_window = 1;  // derivative stays a pure lag-1 function
    cfg.feature_configs = {features};
    cfg.gibbs.truncation = 6;
    cfg.gibbs.max_iters = 75;
    cfg.gibbs.burn_in = 35;
    cfg.gibbs.point_estimate_window = 20;
    const AccuracyTable table = cross_validate(trials, cfg, RngStream(33 + rep));

    double acc0 = 0.0, acc1 = 0.0;
    int n0 = 0, n1 = 0;
    for (const auto& cell : table.cells) {
      if (cell.config_name.find("sHDP-HMM") == 0) {
        acc0 += cell.accuracy_pct;
        ++n0;
      } else {
        acc1 += cell.accuracy_pct;
        ++n1;
      }
    }
    acc0 /= n0;
    acc1 /= n1;
    mean_r0 += acc0;
    mean_r1 += acc1;
    if (acc1 > acc0) {
      ++order_wins;
    }
  }
  mean_r0 /= replicates;
  mean_r1 /= replicates;
  require(order_wins > replicates / 2,
          "VAR order won only " + std::to_string(order_wins) + "/" +
              std::to_string(replicates) + " replicates (r0 " + fmt(mean_r0) + "%, r1 " +
              fmt(mean_r1) + "%)");
  return "r>=1 beat r=0 in " + std::to_string(order_wins) + "/" + std::to_string(replicates) +
         " replicates (mean " + fmt(mean_r1) + "% vs " + fmt(mean_r0) + "%)";
}

// ---------------------------------------------------------------------------
// 6. Anomaly ROC on the injected-spike benchmark.

std::string criterion_roc() {
  RngStream task_rng(11);
  const SyntheticTask task = make_synthetic_task(2, TaskStyle::kSeparatedDynamics, task_rng);
  TrialSynthesisConfig synth;
  synth.frames_per_skill = 100;
  synth.include_pose = false;
  synth.spike_magnitude = 10.0;
  // Equal skill durations, matching the FSM-timed executions the expected
  // curves are built for; otherwise hold-last extrapolation past the curve
  // support dominates the scores of longer nominal trials.
  synth.frame_jitter_frac = 0.0;
  const int n_nominal = 10;
  const int n_anomalous = 8;
  std::vector<RawTrial> trials;
  char buf[32];
  const RngStream base(4242);
  for (int i = 0; i < n_nominal; ++i) {
    std::snprintf(buf, sizeof(buf), "trial_%02d", i);
    RngStream rng = base.derive(buf);
    trials.push_back(synthesize_trial(task, buf, synth, false, rng));
  }
  for (int i = 0; i < n_anomalous; ++i) {
    std::snprintf(buf, sizeof(buf), "anomaly_%02d", i);
    RngStream rng = base.derive(buf);
    trials.push_back(synthesize_trial(task, buf, synth, true, rng));
  }

  EvalConfig cfg;
  cfg.orders = {1};
  FeatureConfig features;
  features.smoothing_window = 1;
  cfg.feature_configs = {features};
  cfg.gibbs.truncation = 5;
  cfg.gibbs.max_iters = 60;
  cfg.gibbs.burn_in = 30;
  cfg.gibbs.point_estimate_window = 15;
  const EvaluationRun run = run_evaluation(trials, cfg, RngStream(99));
  require(run.rocs.size() == 1, "expected one ROC curve");
  const double auc = run.rocs[0].auc;
  require(auc >= 0.95, "benchmark AUC = " + fmt(auc));

  // Trapezoid AUC must equal the pairwise-ranking probability, both on
  // synthetic score sets and on real benchmark scores.
  RngStream score_rng(13);
  for (int instance = 0; instance < 300; ++instance) {
    std::vector<ScoredTrial> scored;
    bool pos = false, neg = false;
    const int n = 4 + static_cast<int>(score_rng() % 14);
    for (int i = 0; i < n; ++i) {
      ScoredTrial s;
      s.score = 0.5 * static_cast<double>(score_rng() % 7);
      s.positive = score_rng() % 2 == 0;
      pos |= s.positive;
      neg |= !s.positive;
      scored.push_back(s);
    }
    if (!pos || !neg) {
      continue;
    }
    const double diff =
        std::abs(trapezoid_auc_from_scores(scored) - testsup::pairwise_auc(scored));
    require(diff < 1e-9, "trapezoid vs pairwise mismatch " + fmt(diff));
  }

  std::map<std::string, std::vector<ObservationSequence>> per_skill;
  for (int i = 0; i < n_nominal; ++i) {
    for (auto& [skill, seq] : [&] {
           std::vector<std::pair<std::string, ObservationSequence>> out;
           for (const auto& seg : trials[static_cast<std::size_t>(i)].segments) {
             out.emplace_back(seg.skill_id,
                              featurize_segment(trials[static_cast<std::size_t>(i)], seg,
                                                features));
           }
           return out;
         }()) {
      per_skill[skill].push_back(std::move(seq));
    }
  }
  TrainOptions options;
  options.gibbs = cfg.gibbs;
  options.gibbs.order = 1;
  options.loo_curves = false;
  const SkillLibrary library =
      train_library(per_skill, features, options, RngStream(123)).library;
  std::vector<ScoredTrial> scored;
  for (const auto& trial : trials) {
    scored.push_back(ScoredTrial{trial_anomaly_score(library, trial, features),
                                 trial.outcome == TrialOutcome::kAnomalous});
  }
  const double diff =
      std::abs(trapezoid_auc_from_scores(scored) - testsup::pairwise_auc(scored));
  require(diff < 1e-9, "benchmark trapezoid vs pairwise mismatch " + fmt(diff));
  return "AUC " + fmt(auc) + ", trapezoid = pairwise within 1e-9";
}

// ---------------------------------------------------------------------------
// 7. Threshold semantics, byte-for-byte against the CLI monitor output.

#ifdef VARHMM_CLI_PATH

struct CliRun {
  int exit_code = -1;
  std::string out;
};

CliRun run_cli(const fs::path& dir, const std::string& args) {
  const fs::path out_path = dir / "cli_stdout.txt";
  const std::string cmd = std::string(VARHMM_CLI_PATH) + " " + args + " > " + out_path.string() +
                          " 2> " + (dir / "cli_stderr.txt").string();
  const int raw = std::system(cmd.c_str());
  CliRun r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream f(out_path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  r.out = ss.str();
  return r;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back("");
  }
  return out;
}

std::string criterion_threshold_semantics() {
  const fs::path dir = fs::temp_directory_path() / "varhmm_acceptance_c7";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream conf(dir / "run.conf");
  conf << "truncation = 5\nmax_iters = 40\nburn_in = 20\npoint_estimate_window = 10\n"
          "loo_curves = false\nskills = 2\ntrials_per_skill = 4\nframes_per_skill = 60\n"
          "anomaly_trials = 1\norder = 1\n";
  conf.close();

  require(run_cli(dir, "simulate --config " + (dir / "run.conf").string() +
                           " --seed 17 --output " + (dir / "data").string())
                  .exit_code == 0,
          "simulate failed");
  require(run_cli(dir, "train --config " + (dir / "run.conf").string() + " --seed 18 --data " +
                           (dir / "data").string() + " --output " + (dir / "run").string())
                  .exit_code == 0,
          "train failed");

  // Build the monitor stream for the anomalous trial.
  const auto entries = load_segments_csv(dir / "data" / "segments.csv");
  {
    std::ifstream in(dir / "data" / "anomaly_00.csv");
    std::ofstream out(dir / "stream.csv", std::ios::binary);
    std::string line;
    std::getline(in, line);
    out << line << ",fsm_skill\n";
    int frame = 0;
    while (std::getline(in, line)) {
      for (const auto& e : entries) {
        if (e.trial_id == "anomaly_00" && frame >= e.segment.start_frame &&
            frame < e.segment.end_frame) {
          out << line << ',' << e.segment.skill_id << '\n';
          break;
        }
      }
      ++frame;
    }
  }

  const SkillLibrary library = load_library(dir / "run" / "library.json");
  const double k = 2.0;
  const CliRun monitor = run_cli(dir, "monitor --library " + (dir / "run" / "library.json").string() +
                                          " --input " + (dir / "stream.csv").string() + " --k 2");
  require(monitor.exit_code == 0, "monitor failed");

  std::istringstream out(monitor.out);
  std::string line;
  std::getline(out, line);
  const std::vector<std::string> header = split_line(line);
  const std::size_t threshold_col = header.size() - 2;
  const std::size_t anomaly_col = header.size() - 1;
  std::map<std::string, std::size_t> loglik_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].rfind("loglik_", 0) == 0) {
      loglik_col[header[c].substr(7)] = c;
    }
  }

  int checked = 0;
  int flagged = 0;
  while (std::getline(out, line)) {
    const auto fields = split_line(line);
    require(fields.size() == header.size(), "row width mismatch");
    if (fields[threshold_col].empty()) {
      continue;
    }
    const int frame = std::stoi(fields[0]);
    const std::string& fsm = fields[1];
    const SkillModel& skill = library.at(fsm);
    const int step = frame - skill.model.order;
    require(step >= 1, "scored row with step < 1");

    // Reconstruct the threshold from the library curve; compare bytes.
    const double threshold = skill.curve.mean_at(step) - k * skill.curve.stddev_at(step);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", threshold);
    require(fields[threshold_col] == buf,
            "threshold bytes differ at frame " + std::to_string(frame) + ": logged '" +
                fields[threshold_col] + "' rebuilt '" + buf + "'");

    // Reconstruct the flag from the logged cumulative value.
    const double value = std::strtod(fields[loglik_col.at(fsm)].c_str(), nullptr);
    const bool flag = value < threshold;
    require(fields[anomaly_col] == (flag ? "1" : "0"),
            "flag mismatch at frame " + std::to_string(frame));
    flagged += flag ? 1 : 0;
    ++checked;
  }
  require(checked > 100, "too few scored rows");
  require(flagged >= 1, "expected at least one flag on the anomalous trial at k=2");

  // Flag sets are monotone shrinking in k.
  std::set<int> prev;
  bool first = true;
  for (const std::string k_arg : {"1", "2", "4", "8"}) {
    const CliRun rerun =
        run_cli(dir, "monitor --library " + (dir / "run" / "library.json").string() +
                         " --input " + (dir / "stream.csv").string() + " --k " + k_arg);
    require(rerun.exit_code == 0, "monitor rerun failed");
    std::istringstream rerun_out(rerun.out);
    std::getline(rerun_out, line);
    std::set<int> flags;
    int row = 0;
    while (std::getline(rerun_out, line)) {
      ++row;
      if (line.size() >= 2 && line.compare(line.size() - 2, 2, ",1") == 0) {
        flags.insert(row);
      }
    }
    if (!first) {
      for (int f : flags) {
        require(prev.count(f) == 1, "flag set at larger k is not a subset");
      }
    }
    prev = std::move(flags);
    first = false;
  }
  return std::to_string(checked) + " scored rows reproduced byte-for-byte, " +
         std::to_string(flagged) + " flags at k=2, monotone in k";
}

#else

std::string criterion_threshold_semantics() {
  throw Failure("CLI binary not built (VARHMM_BUILD_TOOLS=OFF)");
}

#endif

// ---------------------------------------------------------------------------
// 8. Monitoring throughput.

std::string criterion_throughput() {
  const int skills = 4, modes = 20, dim = 19;
  RngStream rng(3);
  std::vector<SkillModel> skill_models;
  for (int s = 0; s < skills; ++s) {
    ShdpVarModel model;
    model.obs_dim = dim;
    model.order = 1;
    model.hdp.truncation = modes;
    model.hdp.alpha = 1.0;
    model.hdp.gamma = 1.0;
    model.hdp.kappa = 0.0;
    model.hdp.rho = 0.0;
    model.hdp.beta = Eigen::VectorXd::Constant(modes, 1.0 / modes);
    model.hdp.pi = Eigen::MatrixXd::Constant(modes, modes, 0.02 / (modes - 1));
    model.hdp.pi.diagonal().setConstant(0.98);
    model.initial_distribution = model.hdp.beta;
    for (int m = 0; m < modes; ++m) {
      Eigen::MatrixXd a = 0.5 * Eigen::MatrixXd::Identity(dim, dim);
      a(0, 1) = 0.05 * (s + 1);
      a(1, 0) = -0.03 * (m + 1) / modes;
      model.emissions.emplace_back(std::vector<Eigen::MatrixXd>{a},
                                   SpdMatrix::scaled_identity(dim, 1.0 + 0.01 * m));
    }
    validate(model);
    std::vector<ObservationSequence> trials{sample_trajectory(model, 300, rng).seq,
                                            sample_trajectory(model, 320, rng).seq};
    skill_models.push_back(SkillModel{"s" + std::to_string(s), model,
                                      build_curve(model, trials), 2, 310.0});
  }
  FeatureConfig features;
  features.include_pose = true;  // d = 19
  const SkillLibrary library(std::move(skill_models), features);

  const int frames = 2000;
  const Eigen::MatrixXd stream =
      sample_trajectory(library.skills()[0].model, frames, rng).seq.data;
  MonitorState monitor(library, 3.0);
  const auto start = std::chrono::steady_clock::now();
  for (int t = 0; t < frames; ++t) {
    monitor.step(stream.row(t).transpose(), "s0");
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double fps = frames / elapsed;
  require(fps >= 200.0, "throughput " + fmt(fps) + " frames/s below 200");
  return fmt(fps) + " frames/s at S=4, L=20, d=19 (budget 200)";
}

// ---------------------------------------------------------------------------
// 9. Determinism and lossless persistence.

std::string criterion_determinism() {
  RngStream data_rng(31);
  const SyntheticTask task = make_synthetic_task(2, TaskStyle::kSeparatedDynamics, data_rng);
  TrialSynthesisConfig synth;
  synth.frames_per_skill = 60;
  synth.include_pose = false;
  std::map<std::string, std::vector<ObservationSequence>> per_skill;
  FeatureConfig features;
  features.smoothing_window = 1;
  for (int i = 0; i < 3; ++i) {
    RngStream rng = RngStream(500).derive(static_cast<std::uint64_t>(i));
    const RawTrial trial =
        synthesize_trial(task, "trial_" + std::to_string(i), synth, false, rng);
    for (const auto& seg : trial.segments) {
      per_skill[seg.skill_id].push_back(featurize_segment(trial, seg, features));
    }
  }
  TrainOptions options;
  options.gibbs.order = 1;
  options.gibbs.truncation = 5;
  options.gibbs.max_iters = 40;
  options.gibbs.burn_in = 20;
  options.gibbs.point_estimate_window = 10;
  options.loo_curves = true;

  const SkillLibrary lib_a = train_library(per_skill, features, options, RngStream(777)).library;
  const SkillLibrary lib_b = train_library(per_skill, features, options, RngStream(777)).library;
  const std::string text_a = library_to_string(lib_a);
  require(text_a == library_to_string(lib_b), "fixed-seed training is not byte-identical");

  const fs::path dir = fs::temp_directory_path() / "varhmm_acceptance_c9";
  fs::remove_all(dir);
  fs::create_directories(dir);
  save_library(lib_a, dir / "lib.json");
  const SkillLibrary loaded = load_library(dir / "lib.json");
  require(library_to_string(loaded) == text_a, "save/load round trip is not lossless");
  const SkillModel& a = lib_a.skills()[0];
  const SkillModel& b = loaded.skills()[0];
  require(a.model.hdp.pi == b.model.hdp.pi && a.curve.means() == b.curve.means() &&
              a.model.emissions[0].coeffs()[0] == b.model.emissions[0].coeffs()[0],
          "numeric fields changed across the round trip");
  return "byte-identical refit and lossless round trip (" +
         std::to_string(text_a.size()) + " bytes)";
}

// ---------------------------------------------------------------------------
// 10. Geweke-style joint-distribution check (opt-in).

struct RunningStats {
  std::vector<std::vector<double>> samples;
  explicit RunningStats(std::size_t dims) : samples(dims) {}
  void add(const std::vector<double>& g) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      samples[i].push_back(g[i]);
    }
  }
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) {
    s += x;
  }
  return s / static_cast<double>(v.size());
}

double iid_se(const std::vector<double>& v) {
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) {
    ss += (x - mu) * (x - mu);
  }
  return std::sqrt(ss / (static_cast<double>(v.size()) - 1.0) /
                   static_cast<double>(v.size()));
}

double batch_means_se(const std::vector<double>& v, int batches) {
  const std::size_t per = v.size() / static_cast<std::size_t>(batches);
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < per; ++i) {
      s += v[static_cast<std::size_t>(b) * per + i];
    }
    means.push_back(s / static_cast<double>(per));
  }
  return iid_se(means) /* se of batch means */ * std::sqrt(1.0);
}

std::vector<double> geweke_stats(const ShdpVarModel& model, const ObservationSequence& seq) {
  const int modes = model.hdp.truncation;
  double y_mean = seq.data.col(0).mean();
  double y_sq = seq.data.col(0).array().square().mean();
  double beta_sq = model.hdp.beta.squaredNorm();
  double self = model.hdp.pi.diagonal().mean();
  double log_ak = std::log(model.hdp.alpha + model.hdp.kappa);
  double log_gamma = std::log(model.hdp.gamma);
  double rho = model.hdp.rho;
  double log_sigma = 0.0;
  double weighted_mean = 0.0;
  for (int k = 0; k < modes; ++k) {
    log_sigma += std::log(model.emissions[static_cast<std::size_t>(k)].noise().matrix()(0, 0));
    weighted_mean += model.hdp.beta[k] * model.emissions[static_cast<std::size_t>(k)].mean()[0];
  }
  log_sigma /= modes;
  return {y_mean, y_sq, beta_sq, self, log_ak, log_gamma, rho, log_sigma, weighted_mean};
}

std::string criterion_geweke() {
  GibbsConfig cfg;
  cfg.order = 0;
  cfg.truncation = 2;
  cfg.max_iters = 10;
  cfg.burn_in = 5;
  cfg.point_estimate_window = 5;
  cfg.iw_scale = Eigen::MatrixXd::Constant(1, 1, 0.5);
  cfg.iw_dof_offset = 6.0;  // finite low-order moments for the comparison
  cfg.mniw_M = Eigen::MatrixXd::Zero(1, 1);
  cfg.mniw_K = Eigen::MatrixXd::Constant(1, 1, 4.0);
  cfg.gamma_prior = GammaPrior{2.0, 2.0};
  cfg.alpha_kappa_prior = GammaPrior{2.0, 2.0};
  cfg.rho_prior = BetaPrior{2.0, 2.0};
  cfg.resample_hypers = true;
  const int frames = 10;
  const int draws = 20000;

  // Marginal-conditional: iid prior-then-generate draws.
  RngStream forward_rng(2718);
  RunningStats forward(9);
  for (int i = 0; i < draws; ++i) {
    const ShdpVarModel model = sample_prior_model(cfg, 1, forward_rng);
    const Trajectory traj = sample_trajectory(model, frames, forward_rng);
    forward.add(geweke_stats(model, traj.seq));
  }

  // Successive-conditional: Gibbs sweep on (z, theta | y), then regenerate
  // (z, y) from the model.
  RngStream chain_rng(314159);
  ShdpVarModel model = sample_prior_model(cfg, 1, chain_rng);
  Trajectory traj = sample_trajectory(model, frames, chain_rng);
  GibbsSampler sampler({traj.seq}, cfg, chain_rng.derive("sampler"));
  sampler.set_state(model);
  RunningStats successive(9);
  const int burn = 2000;
  for (int i = 0; i < draws + burn; ++i) {
    sampler.sweep();
    model = sampler.model();
    traj = sample_trajectory(model, frames, chain_rng);
    sampler.set_data({traj.seq});
    if (i >= burn) {
      successive.add(geweke_stats(model, traj.seq));
    }
  }

  const char* names[9] = {"mean(y)",   "mean(y^2)",   "sum beta^2",
                          "mean pi_jj", "log(a+k)",   "log(gamma)",
                          "rho",        "mean log s2", "beta-weighted mu"};
  std::string detail;
  double worst = 0.0;
  for (std::size_t g = 0; g < 9; ++g) {
    const double mf = mean_of(forward.samples[g]);
    const double ms = mean_of(successive.samples[g]);
    const double se =
        std::sqrt(std::pow(iid_se(forward.samples[g]), 2) +
                  std::pow(batch_means_se(successive.samples[g], 100), 2));
    const double z = (mf - ms) / se;
    worst = std::max(worst, std::abs(z));
    if (std::abs(z) >= 5.0) {
      detail += std::string(names[g]) + " z=" + fmt(z) + " ";
    }
  }
  require(detail.empty(), "biased statistics: " + detail);
  return "9 label-invariant statistics agree (max |z| = " + fmt(worst) + ", N = " +
         std::to_string(draws) + ")";
}

}  // namespace

int main(int argc, char** argv) {
  bool with_geweke = false;
  int only = -1;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--with-geweke") {
      with_geweke = true;
    } else if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--with-geweke] [--only N]\n";
      return 2;
    }
  }

  struct Criterion {
    int id;
    const char* summary;
    std::function<std::string()> run;
    bool opt_in = false;
  };
  const std::vector<Criterion> criteria = {
      {1, "forward recursion matches exhaustive path enumeration", criterion_forward_oracle},
      {2, "MNIW emission posterior agrees with least squares", criterion_conjugacy},
      {3, "blocked Gibbs recovers a 3-mode switching VAR(1) segmentation",
       criterion_segmentation},
      {4, "sticky bias reduces generative switch counts", criterion_sticky_effect},
      {5, "autoregressive orders beat the order-0 baseline on dynamics-only data",
       criterion_order_advantage},
      {6, "injected-anomaly ROC reaches AUC 0.95 with exact trapezoid AUC", criterion_roc},
      {7, "anomaly thresholds reproduce byte-for-byte from monitor output",
       criterion_threshold_semantics},
      {8, "monitoring sustains 200 frames/s at S=4, L=20, d=19", criterion_throughput},
      {9, "fixed-seed training is byte-identical and persistence is lossless",
       criterion_determinism},
      {10, "joint-distribution (Geweke) check shows no sampler bias", criterion_geweke, true},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (only > 0 && criterion.id != only) {
      continue;
    }
    if (criterion.opt_in && !with_geweke) {
      std::printf("[SKIP] criterion %2d: %s (opt-in: --with-geweke)\n", criterion.id,
                  criterion.summary);
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    try {
      const std::string detail = criterion.run();
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::printf("[PASS] criterion %2d: %s -- %s (%.1fs)\n", criterion.id, criterion.summary,
                  detail.c_str(), elapsed);
    } catch (const std::exception& e) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::printf("[FAIL] criterion %2d: %s -- %s (%.1fs)\n", criterion.id, criterion.summary,
                  e.what(), elapsed);
      ++failures;
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
