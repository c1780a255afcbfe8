#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "support/test_support.hpp"
#include "varhmm/csv_io.hpp"
#include "varhmm/errors.hpp"
#include "varhmm/featurize.hpp"
#include "varhmm/library_io.hpp"
#include "varhmm/monitor.hpp"
#include "varhmm/synthetic.hpp"

using namespace varhmm;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("varhmm_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

RawTrial simple_trial(int frames, RngStream& rng, bool with_pose = false) {
  RawTrial trial;
  trial.trial_id = "t0";
  trial.timestamps.resize(frames);
  trial.wrench.resize(frames, 6);
  for (int t = 0; t < frames; ++t) {
    trial.timestamps[t] = t / 200.0;
    for (int c = 0; c < 6; ++c) {
      trial.wrench(t, c) = rng.normal();
    }
  }
  if (with_pose) {
    Eigen::MatrixXd pose = Eigen::MatrixXd::Zero(frames, 7);
    pose.col(3).setOnes();
    trial.pose = pose;
  }
  trial.segments.push_back(SkillSegment{"a", 0, frames});
  return trial;
}

SkillLibrary tiny_library(RngStream& rng, const FeatureConfig& features) {
  const int d = feature_dim(features);
  ShdpVarModel model;
  model.obs_dim = d;
  model.order = 0;
  model.hdp.truncation = 2;
  model.hdp.alpha = 2.0;
  model.hdp.gamma = 1.5;
  model.hdp.kappa = 6.0;
  model.hdp.rho = 6.0 / 8.0;
  model.hdp.beta = (Eigen::VectorXd(2) << 0.6, 0.4).finished();
  model.hdp.pi.resize(2, 2);
  model.hdp.pi << 0.9, 0.1, 0.2, 0.8;
  model.initial_distribution = model.hdp.beta;
  model.emissions.emplace_back(Eigen::VectorXd::Zero(d), SpdMatrix::identity(d));
  model.emissions.emplace_back(Eigen::VectorXd::Constant(d, 0.5),
                               SpdMatrix(testsup::random_spd(d, rng)));
  validate(model);

  std::vector<ObservationSequence> trials;
  for (int i = 0; i < 3; ++i) {
    trials.push_back(sample_trajectory(model, 40 + 5 * i, rng).seq);
  }
  std::vector<SkillModel> skills;
  skills.push_back(SkillModel{"a", model, build_curve(model, trials), 3, 45.0});
  return SkillLibrary(std::move(skills), features);
}

}  // namespace

TEST_CASE("ingest: well-formed file round-trips through write_trial_csv") {
  const fs::path dir = scratch_dir("ingest_ok");
  write_file(dir / "t0.csv",
             "time_s,fx,fy,fz,tx,ty,tz\n"
             "0.0,1,2,3,4,5,6\n"
             "0.005,1.5,2.5,3.5,4.5,5.5,6.5\n"
             "0.01,-1,-2,-3,-4,-5,-6\n");
  const RawTrial trial = ingest_csv(dir / "t0.csv");
  CHECK(trial.frames() == 3);
  CHECK(trial.trial_id == "t0");
  CHECK(trial.wrench(1, 0) == 1.5);
  CHECK_FALSE(trial.pose.has_value());

  RngStream rng(1);
  RawTrial synth = simple_trial(50, rng, true);
  write_trial_csv(dir / "round.csv", synth);
  const RawTrial back = ingest_csv(dir / "round.csv");
  CHECK(back.timestamps == synth.timestamps);
  CHECK(back.wrench == synth.wrench);
  CHECK(back.pose.has_value());
  CHECK(*back.pose == *synth.pose);
}

TEST_CASE("ingest: schema and monotonicity violations name the row") {
  const fs::path dir = scratch_dir("ingest_bad");
  write_file(dir / "dup.csv",
             "time_s,fx,fy,fz,tx,ty,tz\n"
             "0.0,1,2,3,4,5,6\n"
             "0.0,1,2,3,4,5,6\n");
  CHECK_THROWS_WITH_AS(ingest_csv(dir / "dup.csv"), doctest::Contains("row 2"), ParseError);

  write_file(dir / "short.csv",
             "time_s,fx,fy,fz,tx,ty,tz\n"
             "0.0,1,2,3,4,5\n");
  CHECK_THROWS_WITH_AS(ingest_csv(dir / "short.csv"), doctest::Contains("row 1"), ParseError);

  write_file(dir / "nan.csv",
             "time_s,fx,fy,fz,tx,ty,tz\n"
             "0.0,1,nan,3,4,5,6\n");
  CHECK_THROWS_AS(ingest_csv(dir / "nan.csv"), ParseError);

  write_file(dir / "badheader.csv", "time,fx,fy,fz,tx,ty,tz\n0,1,2,3,4,5,6\n");
  CHECK_THROWS_AS(ingest_csv(dir / "badheader.csv"), ParseError);

  write_file(dir / "t.csv", "time_s,fx,fy,fz,tx,ty,tz\n0,1,2,3,4,5,6\n");
  CsvSchema expect_pose;
  expect_pose.expect_pose = true;
  CHECK_THROWS_AS(ingest_csv(dir / "t.csv", expect_pose), ParseError);
}

TEST_CASE("segments sidecar parses, attaches and validates") {
  const fs::path dir = scratch_dir("segments");
  write_file(dir / "segments.csv",
             "trial_id,skill_id,start_frame,end_frame,outcome\n"
             "t0,approach,0,20,nominal\n"
             "t0,insert,20,50,nominal\n"
             "other,x,0,5,anomalous\n");
  const auto entries = load_segments_csv(dir / "segments.csv");
  REQUIRE(entries.size() == 3);

  RngStream rng(2);
  RawTrial trial = simple_trial(50, rng);
  trial.segments.clear();
  attach_segments(trial, entries);
  REQUIRE(trial.segments.size() == 2);
  CHECK(trial.segments[0].skill_id == "approach");
  CHECK(trial.outcome == TrialOutcome::kNominal);

  write_file(dir / "overlap.csv",
             "trial_id,skill_id,start_frame,end_frame,outcome\n"
             "t0,a,0,30,nominal\n"
             "t0,b,20,50,nominal\n");
  RawTrial trial2 = simple_trial(50, rng);
  trial2.segments.clear();
  CHECK_THROWS_AS(attach_segments(trial2, load_segments_csv(dir / "overlap.csv")),
                  InvalidParameterError);

  write_file(dir / "badoutcome.csv",
             "trial_id,skill_id,start_frame,end_frame,outcome\n"
             "t0,a,0,30,weird\n");
  CHECK_THROWS_AS(load_segments_csv(dir / "badoutcome.csv"), ParseError);
}

TEST_CASE("featurize: constant wrench has zero derivatives; ramp has unit slope") {
  const int frames = 60;
  Eigen::VectorXd ts(frames);
  Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(frames, 6, 2.5);
  Eigen::MatrixXd ramp(frames, 6);
  for (int t = 0; t < frames; ++t) {
    ts[t] = t / 200.0;
    ramp.row(t).setConstant(ts[t]);
  }
  FeatureConfig cfg;  // backward, window 5
  const Eigen::MatrixXd flat = feature_matrix(ts, constant, nullptr, cfg);
  CHECK(flat.middleCols(6, 6).cwiseAbs().maxCoeff() == 0.0);
  CHECK(flat.leftCols(6) == constant);

  const Eigen::MatrixXd sloped = feature_matrix(ts, ramp, nullptr, cfg);
  for (int t = 3; t < frames - 3; ++t) {
    CHECK(sloped(t, 6) == doctest::Approx(1.0).epsilon(1e-9));
  }

  FeatureConfig central = cfg;
  central.derivative = DerivativeMethod::kCentral;
  const Eigen::MatrixXd sloped2 = feature_matrix(ts, ramp, nullptr, central);
  for (int t = 3; t < frames - 3; ++t) {
    CHECK(sloped2(t, 6) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("featurize: dimensions, pose canonicalization and error paths") {
  RngStream rng(3);
  RawTrial trial = simple_trial(80, rng, true);
  // Flip one quaternion's sign; featurization must undo it.
  trial.pose->row(10).tail(4) *= -1.0;

  FeatureConfig with_pose;
  with_pose.include_pose = true;
  const auto seqs = featurize(trial, with_pose);
  REQUIRE(seqs.size() == 1);
  CHECK(seqs[0].dim() == 19);
  CHECK(seqs[0].data(10, 15) == 1.0);  // qw restored to +1
  CHECK(*seqs[0].skill_label == "a");

  FeatureConfig no_pose;
  CHECK(featurize(trial, no_pose)[0].dim() == 12);

  RawTrial bare = simple_trial(80, rng, false);
  CHECK_THROWS_AS(featurize(bare, with_pose), ConfigError);

  RawTrial tiny = simple_trial(4, rng);
  FeatureConfig big_window;
  big_window.smoothing_window = 5;
  CHECK_THROWS_AS(featurize(tiny, big_window), InsufficientDataError);

  FeatureConfig even_window;
  even_window.smoothing_window = 4;
  CHECK_THROWS_AS(featurize(trial, even_window), InvalidParameterError);
}

TEST_CASE("featurize is deterministic and per-trial independent") {
  RngStream rng(4);
  const RawTrial t1 = simple_trial(100, rng);
  RawTrial t2 = simple_trial(100, rng);
  t2.trial_id = "t1";
  FeatureConfig cfg;
  const auto a_first = featurize(t1, cfg);
  const auto b = featurize(t2, cfg);
  const auto a_again = featurize(t1, cfg);
  CHECK(a_first[0].data == a_again[0].data);
  CHECK(a_first[0].data != b[0].data);
}

TEST_CASE("synthetic: zero dynamics produce iid standard normal frames") {
  RngStream rng(5);
  std::vector<VarEmission> em;
  em.emplace_back(std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Zero(2, 2)},
                  SpdMatrix::identity(2));
  const LabeledSequence gen =
      generate_scheduled(em, {ModeSpan{0, 100000}}, {}, rng);
  const Eigen::MatrixXd& x = gen.seq.data;
  CHECK(x.colwise().mean().cwiseAbs().maxCoeff() < 0.02);
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / (x.rows() - 1.0);
  CHECK((cov - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.02);
  double lag1 = 0.0;
  for (int t = 1; t < 100000; ++t) {
    lag1 += x(t, 0) * x(t - 1, 0);
  }
  CHECK(std::abs(lag1 / 99999.0) < 0.02);
}

TEST_CASE("synthetic: stationary covariance matches the Lyapunov solution") {
  RngStream rng(6);
  const Eigen::MatrixXd a = 0.9 * testsup::rotation2(0.7);
  const Eigen::MatrixXd q = (Eigen::MatrixXd(2, 2) << 1.0, 0.3, 0.3, 0.7).finished();
  std::vector<VarEmission> em;
  em.emplace_back(std::vector<Eigen::MatrixXd>{a}, SpdMatrix(q));
  const LabeledSequence gen =
      generate_scheduled(em, {ModeSpan{0, 120000}}, {}, rng);
  const Eigen::MatrixXd tail = gen.seq.data.bottomRows(100000);
  const Eigen::MatrixXd centered = tail.rowwise() - tail.colwise().mean();
  const Eigen::MatrixXd emp = centered.transpose() * centered / (tail.rows() - 1.0);
  const Eigen::MatrixXd expected = testsup::lyapunov_cov(a, q);
  CHECK((emp - expected).cwiseAbs().maxCoeff() < 0.05 * expected.cwiseAbs().maxCoeff());
}

TEST_CASE("synthetic: injections are recorded as ground truth") {
  RngStream rng(7);
  std::vector<VarEmission> em;
  em.emplace_back(std::vector<Eigen::MatrixXd>{0.5 * Eigen::MatrixXd::Identity(2, 2)},
                  SpdMatrix::identity(2));
  AnomalyInjection spike;
  spike.kind = AnomalyInjection::Kind::kSpike;
  spike.start_frame = 500;
  spike.magnitude = 10.0;
  const LabeledSequence gen = generate_scheduled(em, {ModeSpan{0, 1000}}, {spike}, rng);
  REQUIRE(gen.anomaly_frames.size() == 1);
  CHECK(gen.anomaly_frames[0] == 500);
  CHECK(gen.seq.data.row(500).cwiseAbs().maxCoeff() > 5.0);

  RngStream task_rng(8);
  const SyntheticTask task = make_synthetic_task(3, TaskStyle::kSeparatedDynamics, task_rng);
  TrialSynthesisConfig cfg;
  cfg.frames_per_skill = 80;
  const RawTrial bad = synthesize_trial(task, "anom", cfg, true, task_rng);
  CHECK(bad.outcome == TrialOutcome::kAnomalous);
  REQUIRE_FALSE(bad.anomaly_frames.empty());
  CHECK(bad.anomaly_frames[0] < bad.frames());
  const RawTrial good = synthesize_trial(task, "nom", cfg, false, task_rng);
  CHECK(good.outcome == TrialOutcome::kNominal);
  CHECK(good.anomaly_frames.empty());
  CHECK(good.segments.size() == 3);
  CHECK(static_cast<int>(good.true_states.size()) == good.frames());
}

TEST_CASE("synthetic generation is bit-reproducible per seed") {
  RngStream t1(9);
  RngStream t2(9);
  const SyntheticTask task1 = make_synthetic_task(2, TaskStyle::kSeparatedDynamics, t1);
  const SyntheticTask task2 = make_synthetic_task(2, TaskStyle::kSeparatedDynamics, t2);
  TrialSynthesisConfig cfg;
  cfg.frames_per_skill = 50;
  RngStream r1(10), r2(10);
  const RawTrial a = synthesize_trial(task1, "x", cfg, false, r1);
  const RawTrial b = synthesize_trial(task2, "x", cfg, false, r2);
  CHECK(a.wrench == b.wrench);
  CHECK(a.true_states == b.true_states);
}

TEST_CASE("library persistence: lossless round trip") {
  RngStream rng(11);
  FeatureConfig features;
  features.include_pose = false;
  const SkillLibrary lib = tiny_library(rng, features);
  const fs::path dir = scratch_dir("persist");
  save_library(lib, dir / "lib.json");
  const SkillLibrary back = load_library(dir / "lib.json");

  REQUIRE(back.size() == lib.size());
  const SkillModel& a = lib.skills()[0];
  const SkillModel& b = back.skills()[0];
  CHECK(b.skill_id == a.skill_id);
  CHECK(b.model.hdp.beta == a.model.hdp.beta);
  CHECK(b.model.hdp.pi == a.model.hdp.pi);
  CHECK(b.model.hdp.alpha == a.model.hdp.alpha);
  CHECK(b.model.hdp.kappa == a.model.hdp.kappa);
  CHECK(b.model.hdp.rho == a.model.hdp.rho);
  CHECK(b.model.initial_distribution == a.model.initial_distribution);
  for (std::size_t k = 0; k < a.model.emissions.size(); ++k) {
    CHECK(b.model.emissions[k].mean() == a.model.emissions[k].mean());
    CHECK(b.model.emissions[k].noise().matrix() == a.model.emissions[k].noise().matrix());
  }
  CHECK(b.curve.means() == a.curve.means());
  CHECK(b.curve.stddevs() == a.curve.stddevs());
  CHECK(b.training_trials == a.training_trials);
  CHECK(b.mean_duration_frames == a.mean_duration_frames);

  // Identical bytes when saved again.
  CHECK(library_to_string(back) == library_to_string(lib));
}

TEST_CASE("library persistence: version, checksum and truncation errors") {
  RngStream rng(12);
  const SkillLibrary lib = tiny_library(rng, FeatureConfig{});
  std::string text = library_to_string(lib);

  std::string versioned = text;
  const auto vpos = versioned.find("\"format_version\": 1");
  REQUIRE(vpos != std::string::npos);
  versioned.replace(vpos, 19, "\"format_version\": 9");
  CHECK_THROWS_WITH_AS(library_from_string(versioned), doctest::Contains("version"),
                       SerializationError);

  std::string corrupted = text;
  const auto cpos = corrupted.find("\"trials\": 3");
  REQUIRE(cpos != std::string::npos);
  corrupted.replace(cpos, 11, "\"trials\": 4");
  CHECK_THROWS_WITH_AS(library_from_string(corrupted), doctest::Contains("checksum"),
                       SerializationError);

  CHECK_THROWS_AS(library_from_string(text.substr(0, text.size() / 2)), SerializationError);
}
