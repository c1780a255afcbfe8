#include "varhmm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "varhmm/errors.hpp"
#include "varhmm/featurize.hpp"
#include "varhmm/training.hpp"

namespace varhmm {
namespace {

std::string config_label(int order, const FeatureConfig& features) {
  std::string name = order == 0 ? "sHDP-HMM" : "sHDP-VAR(" + std::to_string(order) + ")-HMM";
  name += features.include_pose ? "(wrench+deriv+pose)" : "(wrench+deriv)";
  return name;
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

struct FoldSet {
  std::vector<const RawTrial*> nominal;    // sorted by trial_id
  std::vector<const RawTrial*> anomalous;  // sorted by trial_id
  std::vector<std::string> skills;         // sorted union over nominal trials
};

FoldSet partition_trials(const std::vector<RawTrial>& trials) {
  FoldSet out;
  std::set<std::string> ids;
  for (const auto& t : trials) {
    validate(t);
    if (t.segments.empty()) {
      throw ConfigError("trial '" + t.trial_id + "' has no skill segments");
    }
    if (!ids.insert(t.trial_id).second) {
      throw ConfigError("duplicate trial_id '" + t.trial_id + "'");
    }
    (t.outcome == TrialOutcome::kNominal ? out.nominal : out.anomalous).push_back(&t);
  }
  auto by_id = [](const RawTrial* a, const RawTrial* b) { return a->trial_id < b->trial_id; };
  std::sort(out.nominal.begin(), out.nominal.end(), by_id);
  std::sort(out.anomalous.begin(), out.anomalous.end(), by_id);

  std::map<std::string, int> skill_counts;
  for (const auto* t : out.nominal) {
    std::set<std::string> seen;
    for (const auto& seg : t->segments) {
      seen.insert(seg.skill_id);
    }
    for (const auto& s : seen) {
      ++skill_counts[s];
    }
  }
  for (const auto& [skill, count] : skill_counts) {
    if (count < 3) {
      throw ConfigError("skill '" + skill + "' appears in only " + std::to_string(count) +
                        " nominal trials; leave-one-out needs >= 3");
    }
    out.skills.push_back(skill);
  }
  if (out.skills.empty()) {
    throw ConfigError("no skills found in the nominal trials");
  }
  return out;
}

/// Featurized segments of one trial, grouped by skill in segment order.
std::vector<std::pair<std::string, ObservationSequence>> featurized_segments(
    const RawTrial& trial, const FeatureConfig& features) {
  std::vector<std::pair<std::string, ObservationSequence>> out;
  for (const auto& seg : trial.segments) {
    out.emplace_back(seg.skill_id, featurize_segment(trial, seg, features));
  }
  return out;
}

SkillLibrary build_fold_library(const std::vector<const RawTrial*>& training,
                                const std::vector<std::string>& skills,
                                const FeatureConfig& features, const GibbsConfig& gibbs,
                                const RngStream& rng) {
  std::map<std::string, std::vector<ObservationSequence>> per_skill;
  for (const auto* t : training) {
    for (auto& [skill, seq] : featurized_segments(*t, features)) {
      per_skill[skill].push_back(std::move(seq));
    }
  }
  for (const auto& skill : skills) {
    if (per_skill[skill].size() < 2) {
      throw ConfigError("fold training set lacks >= 2 segments for skill '" + skill + "'");
    }
  }
  TrainOptions options;
  options.gibbs = gibbs;
  options.loo_curves = false;  // nested leave-one-out would need n^2 fits
  return train_library(per_skill, features, options, rng).library;
}

}  // namespace

double trial_anomaly_score(const SkillLibrary& library, const RawTrial& trial,
                           const FeatureConfig& features) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& seg : trial.segments) {
    const int idx = library.index_of(seg.skill_id);
    if (idx < 0) {
      throw ConfigError("trial '" + trial.trial_id + "' references unknown skill '" +
                        seg.skill_id + "'");
    }
    const SkillModel& skill = library.skills()[static_cast<std::size_t>(idx)];
    const ObservationSequence seq = featurize_segment(trial, seg, features);
    if (seq.frames() <= skill.model.order) {
      continue;
    }
    const Eigen::VectorXd curve = forward_cumulative_loglik(skill.model, seq);
    for (Eigen::Index t = 0; t < curve.size(); ++t) {
      const int step = static_cast<int>(t) + 1;
      const double mu = skill.curve.mean_at(step);
      const double sigma = skill.curve.stddev_at(step);
      double frame_score;
      if (sigma > 0.0) {
        frame_score = (mu - curve[t]) / sigma;
      } else {
        frame_score = curve[t] < mu ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
      }
      best = std::max(best, frame_score);
    }
  }
  return best;
}

double trapezoid_auc_from_scores(const std::vector<ScoredTrial>& scored) {
  Eigen::Index n_pos = 0, n_neg = 0;
  for (const auto& s : scored) {
    if (std::isnan(s.score)) {
      throw InvalidParameterError("anomaly scores must not be NaN");
    }
    (s.positive ? n_pos : n_neg) += 1;
  }
  if (n_pos == 0 || n_neg == 0) {
    throw ConfigError("ROC needs both outcome classes");
  }
  std::vector<double> thresholds;
  thresholds.reserve(scored.size());
  for (const auto& s : scored) {
    thresholds.push_back(s.score);
  }
  std::sort(thresholds.begin(), thresholds.end(), std::greater<double>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  double auc = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  for (double th : thresholds) {
    Eigen::Index tp = 0, fp = 0;
    for (const auto& s : scored) {
      if (s.score >= th) {
        (s.positive ? tp : fp) += 1;
      }
    }
    const double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
    const double tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
    auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  auc += (1.0 - prev_fpr) * (1.0 + prev_tpr) / 2.0;
  return auc;
}

RocCurve roc_sweep(const std::vector<RocFold>& folds, const FeatureConfig& features,
                   const EvalConfig& config, const std::string& config_name) {
  std::vector<ScoredTrial> scored;
  for (const auto& fold : folds) {
    if (fold.library == nullptr) {
      throw ConfigError("ROC fold without a library");
    }
    for (const auto* trial : fold.test_trials) {
      scored.push_back(ScoredTrial{trial_anomaly_score(*fold.library, *trial, features),
                                   trial->outcome == TrialOutcome::kAnomalous});
    }
  }
  Eigen::Index n_pos = 0, n_neg = 0;
  for (const auto& s : scored) {
    (s.positive ? n_pos : n_neg) += 1;
  }
  if (n_pos == 0 || n_neg == 0) {
    throw ConfigError("ROC sweep needs both nominal and anomalous test trials");
  }

  RocCurve curve;
  curve.config_name = config_name;
  for (double k = config.k_min; k <= config.k_max + 1e-12; k += config.k_step) {
    Eigen::Index tp = 0, fp = 0;
    for (const auto& s : scored) {
      if (s.score > k) {
        (s.positive ? tp : fp) += 1;
      }
    }
    curve.points.push_back(RocPoint{k, static_cast<double>(fp) / static_cast<double>(n_neg),
                                    static_cast<double>(tp) / static_cast<double>(n_pos)});
  }
  curve.auc = trapezoid_auc_from_scores(scored);
  return curve;
}

namespace {

EvaluationRun run_protocol(const std::vector<RawTrial>& trials, const EvalConfig& config,
                           const RngStream& rng, bool with_roc) {
  validate(config.gibbs);
  const FoldSet folds = partition_trials(trials);
  if (folds.nominal.size() < 3) {
    throw ConfigError("leave-one-out evaluation needs >= 3 nominal trials");
  }

  EvaluationRun run;
  run.table.skill_ids = folds.skills;

  for (const auto& features : config.feature_configs) {
    for (int order : config.orders) {
      const std::string name = config_label(order, features);
      run.table.config_names.push_back(name);
      GibbsConfig gibbs = config.gibbs;
      gibbs.order = order;
      const RngStream config_rng = rng.derive(name);

      struct SkillAgg {
        int n = 0;
        int correct = 0;
        double decision_time_sum = 0.0;
      };
      std::map<std::string, SkillAgg> agg;

      std::vector<SkillLibrary> libraries;
      libraries.reserve(folds.nominal.size());
      for (std::size_t f = 0; f < folds.nominal.size(); ++f) {
        std::vector<const RawTrial*> training;
        for (std::size_t j = 0; j < folds.nominal.size(); ++j) {
          if (j != f) {
            training.push_back(folds.nominal[j]);
          }
        }
        const RngStream fold_rng = config_rng.derive(folds.nominal[f]->trial_id);
        libraries.push_back(
            build_fold_library(training, folds.skills, features, gibbs, fold_rng));

        const RawTrial& held_out = *folds.nominal[f];
        for (auto& [skill, seq] : featurized_segments(held_out, features)) {
          if (seq.frames() <= order) {
            continue;
          }
          const std::vector<std::string> fsm(static_cast<std::size_t>(seq.frames()), skill);
          const auto reports =
              monitor_stream(libraries.back(), seq.data, fsm, config.anomaly_k);
          auto& a = agg[skill];
          ++a.n;
          if (reports.back().correct) {
            ++a.correct;
            a.decision_time_sum += decision_time(reports);
          }
        }
      }

      for (const auto& skill : folds.skills) {
        const SkillAgg& a = agg[skill];
        AccuracyCell cell;
        cell.config_name = name;
        cell.skill_id = skill;
        cell.n_trials = a.n;
        cell.accuracy_pct = a.n > 0 ? 100.0 * a.correct / a.n : 0.0;
        cell.mean_decision_time_pct =
            a.correct > 0 ? 100.0 * a.decision_time_sum / a.correct : 100.0;
        run.table.cells.push_back(cell);
      }

      if (with_roc && !folds.anomalous.empty()) {
        std::vector<RocFold> roc_folds(folds.nominal.size());
        for (std::size_t f = 0; f < folds.nominal.size(); ++f) {
          roc_folds[f].library = &libraries[f];
          roc_folds[f].test_trials.push_back(folds.nominal[f]);
        }
        // Anomalous trials never train; intermix them across the folds.
        for (std::size_t j = 0; j < folds.anomalous.size(); ++j) {
          roc_folds[j % roc_folds.size()].test_trials.push_back(folds.anomalous[j]);
        }
        run.rocs.push_back(roc_sweep(roc_folds, features, config, name));
      }
    }
  }
  return run;
}

}  // namespace

AccuracyTable cross_validate(const std::vector<RawTrial>& trials, const EvalConfig& config,
                             const RngStream& rng) {
  return run_protocol(trials, config, rng, /*with_roc=*/false).table;
}

EvaluationRun run_evaluation(const std::vector<RawTrial>& trials, const EvalConfig& config,
                             const RngStream& rng) {
  return run_protocol(trials, config, rng, /*with_roc=*/true);
}

void report(const AccuracyTable& table, const std::vector<RocCurve>& curves,
            const std::filesystem::path& output_dir) {
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" + output_dir.string() + "'");
  }
  auto write_file = [&](const std::string& name, const std::string& text) {
    std::ofstream f(output_dir / name, std::ios::binary);
    if (!f || !(f << text)) {
      throw IoError("cannot write '" + (output_dir / name).string() + "'");
    }
  };

  std::string acc = "config,skill,accuracy_pct,mean_decision_time_pct,n_trials\n";
  for (const auto& cell : table.cells) {
    acc += cell.config_name + ',' + cell.skill_id + ',' + format_fixed(cell.accuracy_pct, 4) +
           ',' + format_fixed(cell.mean_decision_time_pct, 4) + ',' +
           std::to_string(cell.n_trials) + '\n';
  }
  write_file("accuracy.csv", acc);

  std::string roc = "config,k,fpr,tpr\n";
  for (const auto& curve : curves) {
    for (const auto& p : curve.points) {
      roc += curve.config_name + ',' + format_fixed(p.k, 2) + ',' + format_fixed(p.fpr, 6) + ',' +
             format_fixed(p.tpr, 6) + '\n';
    }
  }
  write_file("roc.csv", roc);

  std::string summary = "evaluation summary\n==================\n";
  for (const auto& name : table.config_names) {
    double acc_sum = 0.0;
    int acc_n = 0;
    for (const auto& cell : table.cells) {
      if (cell.config_name == name) {
        acc_sum += cell.accuracy_pct;
        ++acc_n;
      }
    }
    summary += name + ": mean accuracy " +
               format_fixed(acc_n > 0 ? acc_sum / acc_n : 0.0, 2) + "%";
    for (const auto& curve : curves) {
      if (curve.config_name == name) {
        summary += ", anomaly AUC " + format_fixed(curve.auc, 4);
      }
    }
    summary += '\n';
  }
  if (curves.empty()) {
    summary += "no anomaly evaluation (single outcome class)\n";
  }
  write_file("summary.txt", summary);
}

double label_matched_accuracy(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size() || truth.empty()) {
    throw InvalidParameterError("label sequences must be non-empty and equally long");
  }
  // Optimal unconstrained label map: each predicted label goes to its
  // majority ground-truth label.
  std::map<int, std::map<int, int>> confusion;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    ++confusion[predicted[t]][truth[t]];
  }
  long matched = 0;
  for (const auto& [pred, row] : confusion) {
    int best = 0;
    for (const auto& [label, count] : row) {
      best = std::max(best, count);
    }
    matched += best;
  }
  return static_cast<double>(matched) / static_cast<double>(truth.size());
}

}  // namespace varhmm
