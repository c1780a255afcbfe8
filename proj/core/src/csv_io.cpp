#include "varhmm/csv_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

#include "varhmm/errors.hpp"

namespace varhmm {
namespace {

const char* const kBaseHeader = "time_s,fx,fy,fz,tx,ty,tz";
const char* const kPoseHeader = "time_s,fx,fy,fz,tx,ty,tz,px,py,pz,qw,qx,qy,qz";

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    out.push_back(trim(field));
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back("");
  }
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  if (s.empty()) {
    throw ParseError(where + ": empty numeric field");
  }
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) {
    throw ParseError(where + ": cannot parse number '" + s + "'");
  }
  if (!std::isfinite(v)) {
    throw ParseError(where + ": non-finite value '" + s + "'");
  }
  return v;
}

int parse_int(const std::string& s, const std::string& where) {
  const double v = parse_double(s, where);
  const int i = static_cast<int>(std::llround(v));
  if (static_cast<double>(i) != v) {
    throw ParseError(where + ": expected an integer, got '" + s + "'");
  }
  return i;
}

std::string normalize_header(const std::string& line) {
  const auto fields = split_csv(line);
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) {
      out += ',';
    }
    out += fields[i];
  }
  return out;
}

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

RawTrial ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open trial file '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(path.string() + ": empty file");
  }
  const std::string header = normalize_header(line);
  bool has_pose = false;
  if (header == kPoseHeader) {
    has_pose = true;
  } else if (header != kBaseHeader) {
    throw ParseError(path.string() + ": header does not match the trial schema (got '" + header +
                     "')");
  }
  if (schema.expect_pose && *schema.expect_pose != has_pose) {
    throw ParseError(path.string() + ": header " + (has_pose ? "has" : "lacks") +
                     " pose columns but the declared schema says otherwise");
  }
  const std::size_t ncols = has_pose ? 14 : 7;

  std::vector<double> times;
  std::vector<double> values;
  int row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) {
      continue;
    }
    ++row;
    const std::string where = path.string() + " row " + std::to_string(row);
    const auto fields = split_csv(line);
    if (fields.size() != ncols) {
      throw ParseError(where + ": expected " + std::to_string(ncols) + " columns, got " +
                       std::to_string(fields.size()));
    }
    const double t = parse_double(fields[0], where);
    if (!times.empty() && !(t > times.back())) {
      throw ParseError(where + ": timestamps must be strictly increasing");
    }
    times.push_back(t);
    for (std::size_t c = 1; c < ncols; ++c) {
      values.push_back(parse_double(fields[c], where));
    }
  }
  if (times.empty()) {
    throw ParseError(path.string() + ": no data rows");
  }

  RawTrial trial;
  trial.trial_id = path.stem().string();
  const auto frames = static_cast<Eigen::Index>(times.size());
  trial.timestamps = Eigen::Map<const Eigen::VectorXd>(times.data(), frames);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      body(values.data(), frames, static_cast<Eigen::Index>(ncols - 1));
  trial.wrench = body.leftCols(6);
  if (has_pose) {
    trial.pose = body.rightCols(7);
  }
  validate(trial);
  return trial;
}

std::vector<SegmentsEntry> load_segments_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open segments file '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(path.string() + ": empty file");
  }
  if (normalize_header(line) != "trial_id,skill_id,start_frame,end_frame,outcome") {
    throw ParseError(path.string() + ": header does not match the segments schema");
  }
  std::vector<SegmentsEntry> out;
  int row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) {
      continue;
    }
    ++row;
    const std::string where = path.string() + " row " + std::to_string(row);
    const auto fields = split_csv(line);
    if (fields.size() != 5) {
      throw ParseError(where + ": expected 5 columns, got " + std::to_string(fields.size()));
    }
    SegmentsEntry e;
    e.trial_id = fields[0];
    e.segment.skill_id = fields[1];
    e.segment.start_frame = parse_int(fields[2], where);
    e.segment.end_frame = parse_int(fields[3], where);
    try {
      e.outcome = outcome_from_string(fields[4]);
    } catch (const ParseError& err) {
      throw ParseError(where + ": " + err.what());
    }
    if (e.trial_id.empty() || e.segment.skill_id.empty()) {
      throw ParseError(where + ": trial_id and skill_id must not be empty");
    }
    out.push_back(std::move(e));
  }
  return out;
}

void attach_segments(RawTrial& trial, const std::vector<SegmentsEntry>& entries) {
  trial.segments.clear();
  bool outcome_set = false;
  for (const auto& e : entries) {
    if (e.trial_id != trial.trial_id) {
      continue;
    }
    trial.segments.push_back(e.segment);
    if (outcome_set && e.outcome != trial.outcome) {
      throw ParseError("conflicting outcome labels for trial '" + trial.trial_id + "'");
    }
    trial.outcome = e.outcome;
    outcome_set = true;
  }
  if (trial.segments.empty()) {
    throw ParseError("no segments found for trial '" + trial.trial_id + "'");
  }
  std::sort(trial.segments.begin(), trial.segments.end(),
            [](const SkillSegment& a, const SkillSegment& b) {
              return a.start_frame < b.start_frame;
            });
  validate(trial);
}

std::vector<SegmentsEntry> segments_of(const RawTrial& trial) {
  std::vector<SegmentsEntry> out;
  out.reserve(trial.segments.size());
  for (const auto& seg : trial.segments) {
    out.push_back(SegmentsEntry{trial.trial_id, seg, trial.outcome});
  }
  return out;
}

void write_trial_csv(const std::filesystem::path& path, const RawTrial& trial) {
  validate(trial);
  std::string out = trial.pose ? kPoseHeader : kBaseHeader;
  out += '\n';
  for (Eigen::Index t = 0; t < trial.frames(); ++t) {
    append_number(out, trial.timestamps[t]);
    for (Eigen::Index c = 0; c < 6; ++c) {
      out += ',';
      append_number(out, trial.wrench(t, c));
    }
    if (trial.pose) {
      for (Eigen::Index c = 0; c < 7; ++c) {
        out += ',';
        append_number(out, (*trial.pose)(t, c));
      }
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << out)) {
    throw IoError("cannot write trial file '" + path.string() + "'");
  }
}

void write_segments_csv(const std::filesystem::path& path,
                        const std::vector<SegmentsEntry>& entries) {
  std::string out = "trial_id,skill_id,start_frame,end_frame,outcome\n";
  for (const auto& e : entries) {
    out += e.trial_id + ',' + e.segment.skill_id + ',' + std::to_string(e.segment.start_frame) +
           ',' + std::to_string(e.segment.end_frame) + ',' + to_string(e.outcome) + '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << out)) {
    throw IoError("cannot write segments file '" + path.string() + "'");
  }
}

MonitorStreamData read_monitor_stream(std::istream& in) {
  MonitorStreamData out;
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("monitor stream: empty input (missing header)");
  }
  const std::string header = normalize_header(line);
  if (header == std::string(kPoseHeader) + ",fsm_skill") {
    out.has_pose = true;
  } else if (header != std::string(kBaseHeader) + ",fsm_skill") {
    throw ParseError("monitor stream: header does not match the trial schema plus fsm_skill");
  }
  const std::size_t ncols = (out.has_pose ? 14 : 7) + 1;
  int row = 0;
  double prev_time = 0.0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) {
      continue;
    }
    ++row;
    const std::string where = "monitor stream row " + std::to_string(row);
    const auto fields = split_csv(line);
    if (fields.size() != ncols) {
      throw ParseError(where + ": expected " + std::to_string(ncols) + " columns, got " +
                       std::to_string(fields.size()));
    }
    MonitorRow r;
    r.time_s = parse_double(fields[0], where);
    if (row > 1 && !(r.time_s > prev_time)) {
      throw ParseError(where + ": timestamps must be strictly increasing");
    }
    prev_time = r.time_s;
    r.wrench.resize(6);
    for (int c = 0; c < 6; ++c) {
      r.wrench[c] = parse_double(fields[static_cast<std::size_t>(c) + 1], where);
    }
    if (out.has_pose) {
      Eigen::VectorXd pose(7);
      for (int c = 0; c < 7; ++c) {
        pose[c] = parse_double(fields[static_cast<std::size_t>(c) + 7], where);
      }
      r.pose = std::move(pose);
    }
    r.fsm_skill = fields[ncols - 1];
    if (r.fsm_skill.empty()) {
      throw ParseError(where + ": fsm_skill must not be empty");
    }
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace varhmm
