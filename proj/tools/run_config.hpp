#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "varhmm/evaluation.hpp"
#include "varhmm/gibbs.hpp"
#include "varhmm/trial.hpp"

namespace varhmm::cli {

/// Resolved run configuration: config-file keys with command-line overrides
/// applied. Every command is a pure function of (config, input files, seed).
struct RunConfig {
  // paths
  std::string data_dir;
  std::string output_dir = "out";
  std::string library;
  std::string input = "-";  // monitor stream source; "-" = stdin

  // run
  std::optional<std::uint64_t> seed;
  double anomaly_k = 3.0;

  // features
  bool include_pose = false;
  std::string derivative_method = "backward";
  int smoothing_window = 5;

  // gibbs
  int order = 1;
  int truncation = 20;
  int max_iters = 500;
  int burn_in = 250;
  int point_estimate_window = 50;
  int hyper_inner_iters = 5;
  bool resample_hypers = true;
  bool uniform_initial = false;
  bool loo_curves = true;
  double iw_scale_factor = 0.75;
  double iw_dof_offset = 2.0;
  double mniw_k_scale = 10.0;

  // simulate
  int skills = 4;
  int trials_per_skill = 5;
  int anomaly_trials = 0;
  int frames_per_skill = 200;
  double sample_rate_hz = 200.0;
  double spike_magnitude = 10.0;
  double frame_jitter_frac = 0.1;
  std::string style = "separated";  // separated | dynamics_only

  // evaluate
  std::string orders = "0,1,2";
  bool pose_rows = false;  // add a +pose feature row next to the base one
  double k_min = 0.5;
  double k_max = 10.0;
  double k_step = 0.25;
};

/// Parses `key = value` lines ('#' comments); unknown keys are errors.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Applies a single key=value override (same keys as the file).
void apply_key(RunConfig& config, const std::string& key, const std::string& value);

/// Deterministic echo of every resolved key for the output directory.
std::string echo_config(const RunConfig& config);

FeatureConfig feature_config(const RunConfig& config);
GibbsConfig gibbs_config(const RunConfig& config);
EvalConfig eval_config(const RunConfig& config);

std::vector<int> parse_order_list(const std::string& orders);

}  // namespace varhmm::cli
