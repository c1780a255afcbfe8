#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "varhmm/csv_io.hpp"

using namespace varhmm;
namespace fs = std::filesystem;

namespace {

const char* cli_path() { return VARHMM_CLI_PATH; }

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("varhmm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunResult run_cli(const fs::path& dir, const std::string& args) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(cli_path()) + " " + args + " > " + out.string() + " 2> " +
                          err.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

/// Small-but-honest sampler settings so the suite stays fast.
void write_fast_config(const fs::path& path) {
  write_file(path,
             "truncation = 5\n"
             "max_iters = 40\n"
             "burn_in = 20\n"
             "point_estimate_window = 10\n"
             "loo_curves = false\n"
             "skills = 2\n"
             "trials_per_skill = 4\n"
             "frames_per_skill = 60\n"
             "orders = 0,1\n");
}

/// Trial CSV + segments -> monitor stream with the fsm_skill column.
void make_stream(const fs::path& trial_csv, const fs::path& segments_csv,
                 const std::string& trial_id, const fs::path& out_path) {
  const auto entries = load_segments_csv(segments_csv);
  std::ifstream in(trial_csv);
  std::string line;
  std::getline(in, line);
  std::string out = line + ",fsm_skill\n";
  int frame = 0;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::string skill;
    for (const auto& e : entries) {
      if (e.trial_id == trial_id && frame >= e.segment.start_frame &&
          frame < e.segment.end_frame) {
        skill = e.segment.skill_id;
        break;
      }
    }
    REQUIRE_FALSE(skill.empty());
    out += line + "," + skill + "\n";
    ++frame;
  }
  write_file(out_path, out);
}

int count_anomaly_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  int count = 0;
  while (std::getline(in, line)) {
    if (line.size() >= 2 && line.compare(line.size() - 2, 2, ",1") == 0) {
      ++count;
    }
  }
  return count;
}

}  // namespace

TEST_CASE("simulate is deterministic and produces the declared layout") {
  const fs::path dir = scratch_dir("simulate");
  write_fast_config(dir / "run.conf");
  const std::string base = "simulate --config " + (dir / "run.conf").string() + " --seed 21";
  const RunResult a =
      run_cli(dir, base + " --output " + (dir / "data_a").string());
  REQUIRE(a.exit_code == 0);
  const RunResult b =
      run_cli(dir, base + " --output " + (dir / "data_b").string());
  REQUIRE(b.exit_code == 0);

  CHECK(fs::exists(dir / "data_a" / "segments.csv"));
  CHECK(fs::exists(dir / "data_a" / "trial_00.csv"));
  CHECK(fs::exists(dir / "data_a" / "trial_00_states.csv"));
  CHECK(slurp(dir / "data_a" / "trial_03.csv") == slurp(dir / "data_b" / "trial_03.csv"));
  CHECK(slurp(dir / "data_a" / "segments.csv") == slurp(dir / "data_b" / "segments.csv"));

  // Different seed, different data.
  const RunResult c = run_cli(dir, "simulate --config " + (dir / "run.conf").string() +
                                       " --seed 22 --output " + (dir / "data_c").string());
  REQUIRE(c.exit_code == 0);
  CHECK(slurp(dir / "data_a" / "trial_00.csv") != slurp(dir / "data_c" / "trial_00.csv"));
}

TEST_CASE("train produces a library, diagnostics and a byte-identical rerun") {
  const fs::path dir = scratch_dir("train");
  write_fast_config(dir / "run.conf");
  REQUIRE(run_cli(dir, "simulate --config " + (dir / "run.conf").string() + " --seed 3 --output " +
                           (dir / "data").string())
              .exit_code == 0);

  const std::string train = "train --config " + (dir / "run.conf").string() +
                            " --seed 11 --data " + (dir / "data").string();
  const RunResult a = run_cli(dir, train + " --output " + (dir / "run_a").string());
  REQUIRE(a.exit_code == 0);
  CHECK(fs::exists(dir / "run_a" / "library.json"));
  CHECK(fs::exists(dir / "run_a" / "diagnostics_skill_a.csv"));
  CHECK(fs::exists(dir / "run_a" / "diagnostics_skill_b.csv"));

  const std::string echo = slurp(dir / "run_a" / "run_config.txt");
  CHECK(echo.find("truncation = 5") != std::string::npos);
  CHECK(echo.find("max_iters = 40") != std::string::npos);
  CHECK(echo.find("seed = 11") != std::string::npos);

  const RunResult b = run_cli(dir, train + " --output " + (dir / "run_b").string());
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(dir / "run_a" / "library.json") == slurp(dir / "run_b" / "library.json"));

  // The sampler defaults mirror the conservative setting.
  const fs::path defaults = dir / "defaults";
  fs::create_directories(defaults);
  const RunResult d =
      run_cli(dir, "simulate --seed 5 --output " + (defaults / "probe").string() +
                       " --config " + (dir / "run.conf").string());
  REQUIRE(d.exit_code == 0);
  const std::string probe_echo = slurp(defaults / "probe" / "run_config.txt");
  CHECK(probe_echo.find("iw_scale_factor = 0.75") != std::string::npos);
  CHECK(probe_echo.find("mniw_k_scale = 10") != std::string::npos);
  CHECK(probe_echo.find("anomaly_k = 3") != std::string::npos);
}

TEST_CASE("monitor flags injected anomalies but not nominal replays") {
  const fs::path dir = scratch_dir("monitor");
  write_fast_config(dir / "run.conf");
  write_file(dir / "sim.conf", slurp(dir / "run.conf") + "anomaly_trials = 1\n");
  REQUIRE(run_cli(dir, "simulate --config " + (dir / "sim.conf").string() + " --seed 8 --output " +
                           (dir / "data").string())
              .exit_code == 0);
  REQUIRE(run_cli(dir, "train --config " + (dir / "run.conf").string() + " --seed 9 --data " +
                           (dir / "data").string() + " --output " + (dir / "run").string())
              .exit_code == 0);
  const std::string lib = (dir / "run" / "library.json").string();

  make_stream(dir / "data" / "trial_00.csv", dir / "data" / "segments.csv", "trial_00",
              dir / "nominal_stream.csv");
  const RunResult nominal = run_cli(dir, "monitor --library " + lib + " --input " +
                                             (dir / "nominal_stream.csv").string() + " --k 5");
  REQUIRE(nominal.exit_code == 0);
  CHECK(count_anomaly_rows(nominal.out) == 0);
  CHECK(nominal.out.find("frame,fsm_skill,argmax_skill,correct,loglik_skill_a,loglik_skill_b,"
                         "threshold,anomaly") == 0);

  make_stream(dir / "data" / "anomaly_00.csv", dir / "data" / "segments.csv", "anomaly_00",
              dir / "anomaly_stream.csv");
  const RunResult anomalous = run_cli(dir, "monitor --library " + lib + " --input " +
                                               (dir / "anomaly_stream.csv").string() + " --k 3");
  REQUIRE(anomalous.exit_code == 0);
  CHECK(count_anomaly_rows(anomalous.out) >= 1);

  write_file(dir / "empty_stream.csv", "time_s,fx,fy,fz,tx,ty,tz,fsm_skill\n");
  const RunResult empty = run_cli(dir, "monitor --library " + lib + " --input " +
                                           (dir / "empty_stream.csv").string());
  CHECK(empty.exit_code == 0);
  CHECK(empty.out ==
        "frame,fsm_skill,argmax_skill,correct,loglik_skill_a,loglik_skill_b,threshold,anomaly\n");
}

TEST_CASE("evaluate writes the accuracy table and ROC outputs") {
  const fs::path dir = scratch_dir("evaluate");
  write_fast_config(dir / "run.conf");
  write_file(dir / "sim.conf", slurp(dir / "run.conf") + "anomaly_trials = 2\n");
  REQUIRE(run_cli(dir, "simulate --config " + (dir / "sim.conf").string() +
                           " --seed 13 --output " + (dir / "data").string())
              .exit_code == 0);
  const RunResult eval =
      run_cli(dir, "evaluate --config " + (dir / "run.conf").string() + " --seed 14 --data " +
                       (dir / "data").string() + " --output " + (dir / "out").string());
  REQUIRE(eval.exit_code == 0);

  const std::string acc = slurp(dir / "out" / "accuracy.csv");
  CHECK(acc.find("sHDP-HMM(wrench+deriv),skill_a,") != std::string::npos);
  CHECK(acc.find("sHDP-HMM(wrench+deriv),skill_b,") != std::string::npos);
  CHECK(acc.find("sHDP-VAR(1)-HMM(wrench+deriv),skill_a,") != std::string::npos);
  CHECK(acc.find("sHDP-VAR(1)-HMM(wrench+deriv),skill_b,") != std::string::npos);
  const std::string roc = slurp(dir / "out" / "roc.csv");
  CHECK(roc.find("sHDP-VAR(1)-HMM(wrench+deriv),0.50,") != std::string::npos);
  CHECK(slurp(dir / "out" / "summary.txt").find("anomaly AUC") != std::string::npos);

  const RunResult again =
      run_cli(dir, "evaluate --config " + (dir / "run.conf").string() + " --seed 14 --data " +
                       (dir / "data").string() + " --output " + (dir / "out2").string());
  REQUIRE(again.exit_code == 0);
  CHECK(slurp(dir / "out2" / "accuracy.csv") == acc);
}

TEST_CASE("exit codes distinguish config, data and usage failures") {
  const fs::path dir = scratch_dir("exit_codes");
  CHECK(run_cli(dir, "train --config /nonexistent.conf --seed 1 --data x --output y").exit_code ==
        1);
  CHECK(run_cli(dir, "train --data " + dir.string() + " --output " + dir.string()).exit_code ==
        1);  // missing seed

  // Malformed dataset: segments present, trial csv corrupt.
  const fs::path data = dir / "data";
  fs::create_directories(data);
  write_file(data / "segments.csv",
             "trial_id,skill_id,start_frame,end_frame,outcome\nt0,a,0,3,nominal\n");
  write_file(data / "t0.csv", "time_s,fx,fy,fz,tx,ty,tz\n0,1,2,3,4,5\n");
  CHECK(run_cli(dir, "train --seed 1 --data " + data.string() + " --output " +
                         (dir / "out").string())
            .exit_code == 2);

  CHECK(run_cli(dir, "frobnicate").exit_code == 1);
  CHECK(run_cli(dir, "monitor --library /nonexistent/lib.json --input -").exit_code == 2);
}
