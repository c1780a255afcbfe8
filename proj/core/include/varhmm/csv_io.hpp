#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "varhmm/trial.hpp"

namespace varhmm {

/// Declared trial-file schema. expect_pose unset means: accept either header
/// form and record what was found.
struct CsvSchema {
  std::optional<bool> expect_pose;
};

/// Canonical trial header columns (comma separated, '.' decimal):
///   time_s,fx,fy,fz,tx,ty,tz[,px,py,pz,qw,qx,qy,qz]
RawTrial ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

/// Sidecar segments file: trial_id,skill_id,start_frame,end_frame,outcome.
struct SegmentsEntry {
  std::string trial_id;
  SkillSegment segment;
  TrialOutcome outcome = TrialOutcome::kNominal;
};

std::vector<SegmentsEntry> load_segments_csv(const std::filesystem::path& path);

/// Attach the entries matching trial.trial_id (ordered, validated).
void attach_segments(RawTrial& trial, const std::vector<SegmentsEntry>& entries);

std::vector<SegmentsEntry> segments_of(const RawTrial& trial);

void write_trial_csv(const std::filesystem::path& path, const RawTrial& trial);
void write_segments_csv(const std::filesystem::path& path,
                        const std::vector<SegmentsEntry>& entries);

/// One row of a monitor input stream: the trial schema plus a trailing
/// fsm_skill column.
struct MonitorRow {
  double time_s = 0.0;
  Eigen::VectorXd wrench;         // 6
  std::optional<Eigen::VectorXd> pose;  // 7
  std::string fsm_skill;
};

/// Reads an entire monitor stream (header + rows). Returns the rows and
/// whether the header carried pose columns.
struct MonitorStreamData {
  std::vector<MonitorRow> rows;
  bool has_pose = false;
};
MonitorStreamData read_monitor_stream(std::istream& in);

}  // namespace varhmm
