#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "varhmm/gibbs.hpp"
#include "varhmm/monitor.hpp"
#include "varhmm/rng.hpp"
#include "varhmm/trial.hpp"

namespace varhmm {

struct AccuracyCell {
  std::string config_name;
  std::string skill_id;
  double accuracy_pct = 0.0;
  double mean_decision_time_pct = 0.0;  // over correctly classified trials
  int n_trials = 0;
};

struct AccuracyTable {
  std::vector<std::string> config_names;
  std::vector<std::string> skill_ids;
  std::vector<AccuracyCell> cells;  // config-major, skill-minor
};

struct RocPoint {
  double k = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::string config_name;
  std::vector<RocPoint> points;  // over the k grid, for reporting
  double auc = 0.0;              // trapezoid over the exact score-derived curve
};

struct EvalConfig {
  std::vector<int> orders{0, 1, 2};
  std::vector<FeatureConfig> feature_configs{FeatureConfig{}};
  GibbsConfig gibbs;
  double k_min = 0.5;
  double k_max = 10.0;
  double k_step = 0.25;
  double anomaly_k = 3.0;
};

/// Per-trial anomaly score: the smallest threshold constant k at which any
/// frame of the trial flags (sup over frames of (mu - value) / sigma).
double trial_anomaly_score(const SkillLibrary& library, const RawTrial& trial,
                           const FeatureConfig& features);

struct ScoredTrial {
  double score = 0.0;
  bool positive = false;
};

/// Trapezoid AUC over the ROC swept across all distinct score values.
double trapezoid_auc_from_scores(const std::vector<ScoredTrial>& scored);

struct RocFold {
  const SkillLibrary* library = nullptr;
  std::vector<const RawTrial*> test_trials;
};

/// Score every fold's test trials (a trial is positive when any frame
/// flags), emit FPR/TPR over the k grid and the exact trapezoid AUC.
RocCurve roc_sweep(const std::vector<RocFold>& folds, const FeatureConfig& features,
                   const EvalConfig& config, const std::string& config_name);

/// Leave-one-out cross-validated classification accuracy and decision time
/// for every (order, feature config) row.
AccuracyTable cross_validate(const std::vector<RawTrial>& trials, const EvalConfig& config,
                             const RngStream& rng);

struct EvaluationRun {
  AccuracyTable table;
  std::vector<RocCurve> rocs;  // empty when only one outcome class exists
};

/// Full protocol: shared fold libraries feed both the accuracy table and,
/// when anomalous trials exist, the ROC sweep.
EvaluationRun run_evaluation(const std::vector<RawTrial>& trials, const EvalConfig& config,
                             const RngStream& rng);

/// Writes accuracy.csv, roc.csv and summary.txt; byte-deterministic.
void report(const AccuracyTable& table, const std::vector<RocCurve>& curves,
            const std::filesystem::path& output_dir);

/// Best frame accuracy over all maps from predicted to ground-truth labels.
double label_matched_accuracy(const std::vector<int>& truth, const std::vector<int>& predicted);

}  // namespace varhmm
