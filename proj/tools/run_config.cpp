#include "run_config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "varhmm/errors.hpp"

namespace varhmm::cli {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on") {
    return true;
  }
  if (v == "false" || v == "0" || v == "off") {
    return false;
  }
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

int parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used != v.size()) {
      throw std::invalid_argument(v);
    }
    return out;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

double parse_real(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) {
      throw std::invalid_argument(v);
    }
    return out;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const unsigned long long out = std::stoull(v, &used);
    if (used != v.size()) {
      throw std::invalid_argument(v);
    }
    return static_cast<std::uint64_t>(out);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + v + "'");
  }
}

std::string real_string(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void apply_key(RunConfig& c, const std::string& key, const std::string& value) {
  using Setter = std::function<void(RunConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"data_dir", [](RunConfig& r, const std::string& v) { r.data_dir = v; }},
      {"output_dir", [](RunConfig& r, const std::string& v) { r.output_dir = v; }},
      {"library", [](RunConfig& r, const std::string& v) { r.library = v; }},
      {"input", [](RunConfig& r, const std::string& v) { r.input = v; }},
      {"seed", [](RunConfig& r, const std::string& v) { r.seed = parse_u64(v, "seed"); }},
      {"anomaly_k",
       [](RunConfig& r, const std::string& v) { r.anomaly_k = parse_real(v, "anomaly_k"); }},
      {"include_pose",
       [](RunConfig& r, const std::string& v) { r.include_pose = parse_bool(v, "include_pose"); }},
      {"derivative_method",
       [](RunConfig& r, const std::string& v) { r.derivative_method = v; }},
      {"smoothing_window",
       [](RunConfig& r, const std::string& v) {
         r.smoothing_window = parse_int(v, "smoothing_window");
       }},
      {"order", [](RunConfig& r, const std::string& v) { r.order = parse_int(v, "order"); }},
      {"truncation",
       [](RunConfig& r, const std::string& v) { r.truncation = parse_int(v, "truncation"); }},
      {"max_iters",
       [](RunConfig& r, const std::string& v) { r.max_iters = parse_int(v, "max_iters"); }},
      {"burn_in", [](RunConfig& r, const std::string& v) { r.burn_in = parse_int(v, "burn_in"); }},
      {"point_estimate_window",
       [](RunConfig& r, const std::string& v) {
         r.point_estimate_window = parse_int(v, "point_estimate_window");
       }},
      {"hyper_inner_iters",
       [](RunConfig& r, const std::string& v) {
         r.hyper_inner_iters = parse_int(v, "hyper_inner_iters");
       }},
      {"resample_hypers",
       [](RunConfig& r, const std::string& v) {
         r.resample_hypers = parse_bool(v, "resample_hypers");
       }},
      {"uniform_initial",
       [](RunConfig& r, const std::string& v) {
         r.uniform_initial = parse_bool(v, "uniform_initial");
       }},
      {"loo_curves",
       [](RunConfig& r, const std::string& v) { r.loo_curves = parse_bool(v, "loo_curves"); }},
      {"iw_scale_factor",
       [](RunConfig& r, const std::string& v) {
         r.iw_scale_factor = parse_real(v, "iw_scale_factor");
       }},
      {"iw_dof_offset",
       [](RunConfig& r, const std::string& v) {
         r.iw_dof_offset = parse_real(v, "iw_dof_offset");
       }},
      {"mniw_k_scale",
       [](RunConfig& r, const std::string& v) { r.mniw_k_scale = parse_real(v, "mniw_k_scale"); }},
      {"skills", [](RunConfig& r, const std::string& v) { r.skills = parse_int(v, "skills"); }},
      {"trials_per_skill",
       [](RunConfig& r, const std::string& v) {
         r.trials_per_skill = parse_int(v, "trials_per_skill");
       }},
      {"anomaly_trials",
       [](RunConfig& r, const std::string& v) {
         r.anomaly_trials = parse_int(v, "anomaly_trials");
       }},
      {"frames_per_skill",
       [](RunConfig& r, const std::string& v) {
         r.frames_per_skill = parse_int(v, "frames_per_skill");
       }},
      {"sample_rate_hz",
       [](RunConfig& r, const std::string& v) {
         r.sample_rate_hz = parse_real(v, "sample_rate_hz");
       }},
      {"spike_magnitude",
       [](RunConfig& r, const std::string& v) {
         r.spike_magnitude = parse_real(v, "spike_magnitude");
       }},
      {"frame_jitter_frac",
       [](RunConfig& r, const std::string& v) {
         r.frame_jitter_frac = parse_real(v, "frame_jitter_frac");
       }},
      {"style", [](RunConfig& r, const std::string& v) { r.style = v; }},
      {"orders", [](RunConfig& r, const std::string& v) { r.orders = v; }},
      {"pose_rows",
       [](RunConfig& r, const std::string& v) { r.pose_rows = parse_bool(v, "pose_rows"); }},
      {"k_min", [](RunConfig& r, const std::string& v) { r.k_min = parse_real(v, "k_min"); }},
      {"k_max", [](RunConfig& r, const std::string& v) { r.k_max = parse_real(v, "k_max"); }},
      {"k_step", [](RunConfig& r, const std::string& v) { r.k_step = parse_real(v, "k_step"); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) {
    throw ConfigError("unknown config key '" + key + "'");
  }
  it->second(c, value);
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path.string() + "'");
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + " line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    apply_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string echo_config(const RunConfig& c) {
  std::map<std::string, std::string> kv = {
      {"anomaly_k", real_string(c.anomaly_k)},
      {"anomaly_trials", std::to_string(c.anomaly_trials)},
      {"burn_in", std::to_string(c.burn_in)},
      {"data_dir", c.data_dir},
      {"derivative_method", c.derivative_method},
      {"frame_jitter_frac", real_string(c.frame_jitter_frac)},
      {"frames_per_skill", std::to_string(c.frames_per_skill)},
      {"hyper_inner_iters", std::to_string(c.hyper_inner_iters)},
      {"include_pose", c.include_pose ? "true" : "false"},
      {"input", c.input},
      {"iw_dof_offset", real_string(c.iw_dof_offset)},
      {"iw_scale_factor", real_string(c.iw_scale_factor)},
      {"k_max", real_string(c.k_max)},
      {"k_min", real_string(c.k_min)},
      {"k_step", real_string(c.k_step)},
      {"library", c.library},
      {"loo_curves", c.loo_curves ? "true" : "false"},
      {"max_iters", std::to_string(c.max_iters)},
      {"mniw_k_scale", real_string(c.mniw_k_scale)},
      {"order", std::to_string(c.order)},
      {"orders", c.orders},
      {"output_dir", c.output_dir},
      {"point_estimate_window", std::to_string(c.point_estimate_window)},
      {"pose_rows", c.pose_rows ? "true" : "false"},
      {"resample_hypers", c.resample_hypers ? "true" : "false"},
      {"sample_rate_hz", real_string(c.sample_rate_hz)},
      {"seed", c.seed ? std::to_string(*c.seed) : ""},
      {"skills", std::to_string(c.skills)},
      {"smoothing_window", std::to_string(c.smoothing_window)},
      {"spike_magnitude", real_string(c.spike_magnitude)},
      {"style", c.style},
      {"trials_per_skill", std::to_string(c.trials_per_skill)},
      {"truncation", std::to_string(c.truncation)},
      {"uniform_initial", c.uniform_initial ? "true" : "false"},
  };
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k + " = " + v + "\n";
  }
  return out;
}

FeatureConfig feature_config(const RunConfig& c) {
  FeatureConfig f;
  f.include_pose = c.include_pose;
  f.derivative = derivative_method_from_string(c.derivative_method);
  f.smoothing_window = c.smoothing_window;
  validate(f);
  return f;
}

GibbsConfig gibbs_config(const RunConfig& c) {
  GibbsConfig g;
  g.order = c.order;
  g.truncation = c.truncation;
  g.max_iters = c.max_iters;
  g.burn_in = c.burn_in;
  g.point_estimate_window = c.point_estimate_window;
  g.hyper_inner_iters = c.hyper_inner_iters;
  g.resample_hypers = c.resample_hypers;
  g.uniform_initial_distribution = c.uniform_initial;
  g.iw_scale_factor = c.iw_scale_factor;
  g.iw_dof_offset = c.iw_dof_offset;
  g.mniw_k_scale = c.mniw_k_scale;
  validate(g);
  return g;
}

EvalConfig eval_config(const RunConfig& c) {
  EvalConfig e;
  e.orders = parse_order_list(c.orders);
  e.feature_configs = {feature_config(c)};
  if (c.pose_rows) {
    FeatureConfig with_pose = e.feature_configs.front();
    with_pose.include_pose = true;
    if (!e.feature_configs.front().include_pose) {
      e.feature_configs.push_back(with_pose);
    }
  }
  e.gibbs = gibbs_config(c);
  e.k_min = c.k_min;
  e.k_max = c.k_max;
  e.k_step = c.k_step;
  e.anomaly_k = c.anomaly_k;
  return e;
}

std::vector<int> parse_order_list(const std::string& orders) {
  std::vector<int> out;
  std::stringstream ss(orders);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      continue;
    }
    out.push_back(parse_int(item, "orders"));
  }
  if (out.empty()) {
    throw ConfigError("orders list is empty");
  }
  return out;
}

}  // namespace varhmm::cli
