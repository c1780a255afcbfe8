#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "run_config.hpp"
#include "varhmm/csv_io.hpp"
#include "varhmm/errors.hpp"
#include "varhmm/evaluation.hpp"
#include "varhmm/featurize.hpp"
#include "varhmm/library_io.hpp"
#include "varhmm/monitor.hpp"
#include "varhmm/synthetic.hpp"
#include "varhmm/training.hpp"

namespace {

using namespace varhmm;
using cli::RunConfig;

namespace fs = std::filesystem;

void require_seed(const RunConfig& config) {
  if (!config.seed) {
    throw ConfigError("this command requires a seed (config key 'seed' or --seed)");
  }
}

void ensure_output_dir(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" + config.output_dir + "'");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) {
    throw IoError("cannot write '" + path.string() + "'");
  }
}

void echo_into_output(const RunConfig& config) {
  write_text(fs::path(config.output_dir) / "run_config.txt", cli::echo_config(config));
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// All trials referenced by data_dir/segments.csv, with segments attached.
std::vector<RawTrial> load_dataset(const std::string& data_dir) {
  if (data_dir.empty()) {
    throw ConfigError("data_dir is required");
  }
  const fs::path dir(data_dir);
  const auto entries = load_segments_csv(dir / "segments.csv");
  std::set<std::string> ids;
  for (const auto& e : entries) {
    ids.insert(e.trial_id);
  }
  std::vector<RawTrial> trials;
  for (const auto& id : ids) {
    RawTrial trial = ingest_csv(dir / (id + ".csv"));
    attach_segments(trial, entries);
    trials.push_back(std::move(trial));
  }
  return trials;
}

int cmd_train(const RunConfig& config) {
  require_seed(config);
  ensure_output_dir(config);

  const FeatureConfig features = cli::feature_config(config);
  const auto trials = load_dataset(config.data_dir);

  std::map<std::string, std::vector<ObservationSequence>> per_skill;
  int used_trials = 0;
  for (const auto& trial : trials) {
    if (trial.outcome != TrialOutcome::kNominal) {
      continue;  // anomalous trials never train
    }
    ++used_trials;
    for (auto& seq : featurize(trial, features)) {
      per_skill[*seq.skill_label].push_back(std::move(seq));
    }
  }
  if (per_skill.empty()) {
    throw InsufficientDataError("no nominal trials found under '" + config.data_dir + "'");
  }

  TrainOptions options;
  options.gibbs = cli::gibbs_config(config);
  options.loo_curves = config.loo_curves;
  const LibraryTrainResult result =
      train_library(per_skill, features, options, RngStream(*config.seed));

  const fs::path library_path = config.library.empty()
                                    ? fs::path(config.output_dir) / "library.json"
                                    : fs::path(config.library);
  save_library(result.library, library_path);

  for (const auto& [skill, diag] : result.diagnostics) {
    std::string csv = "iter,joint_loglik,active_modes,alpha,gamma,kappa,rho\n";
    for (std::size_t i = 0; i < diag.joint_loglik.size(); ++i) {
      csv += std::to_string(i + 1) + ',' + format_g17(diag.joint_loglik[i]) + ',' +
             std::to_string(diag.active_modes[i]) + ',' + format_g17(diag.alpha_trace[i]) + ',' +
             format_g17(diag.gamma_trace[i]) + ',' + format_g17(diag.kappa_trace[i]) + ',' +
             format_g17(diag.rho_trace[i]) + '\n';
    }
    write_text(fs::path(config.output_dir) / ("diagnostics_" + skill + ".csv"), csv);
  }
  echo_into_output(config);

  std::cout << "trained " << result.library.size() << " skills from " << used_trials
            << " nominal trials -> " << library_path.string() << "\n";
  return 0;
}

int cmd_monitor(const RunConfig& config) {
  if (config.library.empty()) {
    throw ConfigError("monitor requires --library");
  }
  const SkillLibrary library = load_library(config.library);
  const FeatureConfig& features = library.features();

  std::ifstream file;
  std::istream* in = &std::cin;
  if (config.input != "-") {
    file.open(config.input);
    if (!file) {
      throw IoError("cannot open monitor input '" + config.input + "'");
    }
    in = &file;
  }
  const MonitorStreamData stream = read_monitor_stream(*in);
  if (features.include_pose && !stream.has_pose) {
    throw ParseError("monitor stream header row 1: library features require pose columns");
  }

  std::string header = "frame,fsm_skill,argmax_skill,correct";
  for (const auto& s : library.skills()) {
    header += ",loglik_" + s.skill_id;
  }
  header += ",threshold,anomaly";
  std::cout << header << "\n";

  MonitorState monitor(library, config.anomaly_k);
  std::size_t row = 0;
  std::size_t frames = 0;
  long anomalies = 0;
  const auto start = std::chrono::steady_clock::now();
  while (row < stream.rows.size()) {
    // One FSM segment: consecutive rows sharing the fsm_skill value.
    std::size_t end = row;
    while (end < stream.rows.size() && stream.rows[end].fsm_skill == stream.rows[row].fsm_skill) {
      ++end;
    }
    const auto len = static_cast<Eigen::Index>(end - row);
    Eigen::VectorXd ts(len);
    Eigen::MatrixXd wrench(len, 6);
    Eigen::MatrixXd pose(len, stream.has_pose ? 7 : 0);
    for (Eigen::Index i = 0; i < len; ++i) {
      const MonitorRow& r = stream.rows[row + static_cast<std::size_t>(i)];
      ts[i] = r.time_s;
      wrench.row(i) = r.wrench.transpose();
      if (stream.has_pose) {
        pose.row(i) = r.pose->transpose();
      }
    }
    const Eigen::MatrixXd feats =
        feature_matrix(ts, wrench, stream.has_pose ? &pose : nullptr, features);

    for (Eigen::Index i = 0; i < len; ++i) {
      const IntrospectionReport rep =
          monitor.step(feats.row(i).transpose(), stream.rows[row].fsm_skill);
      std::string line = std::to_string(rep.frame) + ',' + rep.fsm_skill + ',' +
                         rep.argmax_skill + ',' + (rep.correct ? "1" : "0");
      for (Eigen::Index s = 0; s < rep.skill_logliks.size(); ++s) {
        line += ',' + format_g17(rep.skill_logliks[s]);
      }
      line += ',';
      if (rep.scored) {
        line += format_g17(rep.threshold);
      }
      line += ',';
      line += rep.anomaly ? "1" : "0";
      std::cout << line << "\n";
      anomalies += rep.anomaly ? 1 : 0;
      ++frames;
    }
    row = end;
  }
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);

  const double fps = frames > 0 && elapsed.count() > 0.0
                         ? static_cast<double>(frames) / elapsed.count()
                         : 0.0;
  std::cerr << "monitored " << frames << " frames, " << anomalies << " anomaly flags, "
            << static_cast<long>(fps) << " frames/s\n";
  if (frames > 0 && fps < 200.0) {
    std::cerr << "warning: throughput below the 200 frames/s real-time budget\n";
  }
  return 0;
}

int cmd_simulate(const RunConfig& config) {
  require_seed(config);
  ensure_output_dir(config);

  TaskStyle style;
  if (config.style == "separated") {
    style = TaskStyle::kSeparatedDynamics;
  } else if (config.style == "dynamics_only") {
    style = TaskStyle::kDynamicsOnly;
  } else {
    throw ConfigError("style must be 'separated' or 'dynamics_only', got '" + config.style + "'");
  }

  const RngStream base(*config.seed);
  RngStream task_rng = base.derive("task");
  const SyntheticTask task = make_synthetic_task(config.skills, style, task_rng);

  TrialSynthesisConfig synth;
  synth.frames_per_skill = config.frames_per_skill;
  synth.sample_rate_hz = config.sample_rate_hz;
  synth.include_pose = config.include_pose;
  synth.spike_magnitude = config.spike_magnitude;
  synth.frame_jitter_frac = config.frame_jitter_frac;

  const fs::path dir(config.output_dir);
  std::vector<SegmentsEntry> all_segments;
  auto emit = [&](const std::string& trial_id, bool anomalous) {
    RngStream trial_rng = base.derive(trial_id);
    const RawTrial trial = synthesize_trial(task, trial_id, synth, anomalous, trial_rng);
    write_trial_csv(dir / (trial_id + ".csv"), trial);
    const auto segs = segments_of(trial);
    all_segments.insert(all_segments.end(), segs.begin(), segs.end());

    std::string states = "frame,true_state,anomaly\n";
    std::set<int> anomaly_set(trial.anomaly_frames.begin(), trial.anomaly_frames.end());
    for (std::size_t t = 0; t < trial.true_states.size(); ++t) {
      states += std::to_string(t) + ',' + std::to_string(trial.true_states[t]) + ',' +
                (anomaly_set.count(static_cast<int>(t)) ? "1" : "0") + '\n';
    }
    write_text(dir / (trial_id + "_states.csv"), states);
  };

  char buf[32];
  for (int i = 0; i < config.trials_per_skill; ++i) {
    std::snprintf(buf, sizeof(buf), "trial_%02d", i);
    emit(buf, false);
  }
  for (int i = 0; i < config.anomaly_trials; ++i) {
    std::snprintf(buf, sizeof(buf), "anomaly_%02d", i);
    emit(buf, true);
  }
  write_segments_csv(dir / "segments.csv", all_segments);
  echo_into_output(config);

  std::cout << "simulated " << config.trials_per_skill << " nominal and " << config.anomaly_trials
            << " anomalous trials (" << task.skill_ids.size() << " skills) -> "
            << config.output_dir << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig& config) {
  require_seed(config);
  ensure_output_dir(config);

  const auto trials = load_dataset(config.data_dir);
  const EvalConfig eval = cli::eval_config(config);
  const EvaluationRun run = run_evaluation(trials, eval, RngStream(*config.seed));
  report(run.table, run.rocs, config.output_dir);
  echo_into_output(config);

  std::cout << "evaluated " << run.table.config_names.size() << " configurations over "
            << run.table.skill_ids.size() << " skills -> " << config.output_dir
            << "/accuracy.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sticky HDP-VAR-HMM time-series segmentation and robot introspection"};
  app.require_subcommand(1);

  RunConfig config;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value run configuration file");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { overrides.emplace_back("seed", std::to_string(v)); },
        "random seed (mandatory for train/simulate/evaluate)");
    cmd->add_option_function<std::string>(
        "--output", [&](const std::string& v) { overrides.emplace_back("output_dir", v); },
        "output directory");
    cmd->add_option_function<std::string>(
        "--library", [&](const std::string& v) { overrides.emplace_back("library", v); },
        "skill library file");
    cmd->add_option_function<double>(
        "--k", [&](double v) { overrides.emplace_back("anomaly_k", std::to_string(v)); },
        "anomaly threshold constant k");
    cmd->add_option_function<int>(
        "--order", [&](int v) {
          overrides.emplace_back("order", std::to_string(v));
          overrides.emplace_back("orders", std::to_string(v));
        },
        "autoregressive order (0|1|2)");
    cmd->add_flag_function(
        "--pose",
        [&](std::int64_t) { overrides.emplace_back("include_pose", "true"); },
        "include pose features");
  };

  CLI::App* train = app.add_subcommand("train", "fit one skill model per segment skill id");
  CLI::App* monitor = app.add_subcommand("monitor", "stream introspection reports for a trial");
  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
  CLI::App* evaluate = app.add_subcommand("evaluate", "cross-validated accuracy and anomaly ROC");
  for (CLI::App* cmd : {train, monitor, simulate, evaluate}) {
    add_common(cmd);
  }
  monitor->add_option_function<std::string>(
      "--input", [&](const std::string& v) { overrides.emplace_back("input", v); },
      "monitor stream file ('-' = stdin)");
  train->add_option_function<std::string>(
      "--data", [&](const std::string& v) { overrides.emplace_back("data_dir", v); },
      "dataset directory (trial CSVs + segments.csv)");
  evaluate->add_option_function<std::string>(
      "--data", [&](const std::string& v) { overrides.emplace_back("data_dir", v); },
      "dataset directory (trial CSVs + segments.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (!config_path.empty()) {
      cli::apply_config_file(config, config_path);
    }
    for (const auto& [key, value] : overrides) {
      cli::apply_key(config, key, value);
    }
    if (stage == "train") {
      return cmd_train(config);
    }
    if (stage == "monitor") {
      return cmd_monitor(config);
    }
    if (stage == "simulate") {
      return cmd_simulate(config);
    }
    return cmd_evaluate(config);
  } catch (const ConfigError& e) {
    std::cerr << "varhmm " << stage << ": config error: " << e.what() << "\n";
    return 1;
  } catch (const InvalidParameterError& e) {
    std::cerr << "varhmm " << stage << ": config error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "varhmm " << stage << ": numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "varhmm " << stage << ": data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "varhmm " << stage << ": failure: " << e.what() << "\n";
    return 3;
  }
}
