/*
 * Copyright 2026 The terrain_hmm Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "terrain_hmm/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

#include "terrain_hmm/error.hpp"
#include "terrain_hmm/text_format.hpp"

namespace terrain_hmm {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::string_view kScanHeader = "x,y,z,label";
constexpr std::string_view kPoseHeader = "scan_index,timestamp,tx,ty,tz,qw,qx,qy,qz";

[[noreturn]] void malformed(const std::string& source, std::size_t line_no,
                            const std::string& line) {
  throw Error(ErrorCode::kMalformedRow,
              source + ":" + std::to_string(line_no) + ": " + line);
}

bool parse_label(std::string_view text, PointLabel& label) {
  text = trim(text);
  for (auto candidate : {PointLabel::kTerrain, PointLabel::kMachine,
                         PointLabel::kAgent, PointLabel::kExcluded}) {
    if (text == to_string(candidate)) {
      label = candidate;
      return true;
    }
  }
  return false;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

std::string padded(std::int64_t value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%06lld", static_cast<long long>(value));
  return buffer;
}

std::string_view to_string(sim::EventKind kind) {
  return kind == sim::EventKind::kExcavate ? "excavate" : "spill";
}

std::string_view to_string(sim::EventShape shape) {
  return shape == sim::EventShape::kFlat ? "flat" : "ramp";
}

void write_heightfield_csv(std::ostream& out, const sim::TrueTerrain& terrain) {
  out << "x_min,y_min,resolution,nx,ny\n";
  out << format_number(terrain.extent().x_min) << ','
      << format_number(terrain.extent().y_min) << ','
      << format_number(terrain.resolution()) << ',' << terrain.nx() << ','
      << terrain.ny() << '\n';
  for (std::int32_t j = 0; j < terrain.ny(); ++j) {
    for (std::int32_t i = 0; i < terrain.nx(); ++i) {
      if (i > 0) out << ',';
      out << format_number(terrain.at(i, j));
    }
    out << '\n';
  }
}

}  // namespace

std::string_view to_string(PointLabel label) {
  switch (label) {
    case PointLabel::kTerrain: return "terrain";
    case PointLabel::kMachine: return "machine";
    case PointLabel::kAgent: return "agent";
    case PointLabel::kExcluded: return "excluded";
  }
  return "terrain";
}

std::string scan_file_name(std::int64_t scan_index) {
  return padded(scan_index) + ".csv";
}

void write_scan_csv(std::ostream& out, const LabelledScan& scan) {
  out << kScanHeader << '\n';
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const auto& p = scan.points[i];
    out << format_number(p.x()) << ',' << format_number(p.y()) << ','
        << format_number(p.z()) << ',' << to_string(scan.labels[i]) << '\n';
  }
}

LabelledScan read_scan_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kScanHeader) {
    malformed(source, 1, line);
  }
  LabelledScan scan;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    Eigen::Vector3d p;
    PointLabel label{};
    if (f.size() != 4 || !parse_double(f[0], p.x()) || !parse_double(f[1], p.y()) ||
        !parse_double(f[2], p.z()) || !p.allFinite() || !parse_label(f[3], label)) {
      malformed(source, line_no, line);
    }
    scan.points.push_back(p);
    scan.labels.push_back(label);
  }
  return scan;
}

void write_poses_csv(std::ostream& out, const std::vector<SensorPose>& poses) {
  out << kPoseHeader << '\n';
  for (const auto& p : poses) {
    out << p.scan_index << ',' << format_number(p.timestamp) << ','
        << format_number(p.translation.x()) << ','
        << format_number(p.translation.y()) << ','
        << format_number(p.translation.z()) << ','
        << format_number(p.rotation.w()) << ',' << format_number(p.rotation.x())
        << ',' << format_number(p.rotation.y()) << ','
        << format_number(p.rotation.z()) << '\n';
  }
}

std::vector<SensorPose> read_poses_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kPoseHeader) {
    malformed(source, 1, line);
  }
  std::vector<SensorPose> poses;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    SensorPose p;
    double q[4];
    if (f.size() != 9 || !parse_int(f[0], p.scan_index) ||
        !parse_double(f[1], p.timestamp) ||
        !parse_double(f[2], p.translation.x()) ||
        !parse_double(f[3], p.translation.y()) ||
        !parse_double(f[4], p.translation.z()) || !parse_double(f[5], q[0]) ||
        !parse_double(f[6], q[1]) || !parse_double(f[7], q[2]) ||
        !parse_double(f[8], q[3])) {
      malformed(source, line_no, line);
    }
    // Nine significant digits do not preserve unit norm exactly.
    p.rotation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]).normalized();
    poses.push_back(p);
  }
  return poses;
}

DatasetWriter::DatasetWriter(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "scans");
}

void DatasetWriter::write(const LabelledScan& scan, const SensorPose& pose) {
  auto out = open_out(root_ / "scans" / scan_file_name(pose.scan_index));
  write_scan_csv(out, scan);
  poses_.push_back(pose);
}

void DatasetWriter::finish(const sim::TruthLog* truth) {
  {
    auto out = open_out(root_ / "poses.csv");
    write_poses_csv(out, poses_);
  }
  if (truth == nullptr) return;

  fs::create_directories(root_ / "truth");
  json doc;
  doc["format"] = "terrain_hmm.truth/1";
  doc["events"] = json::array();
  for (const auto& e : truth->events) {
    const auto& f = e.event.footprint;
    doc["events"].push_back({{"at_scan", e.event.at_scan},
                             {"kind", to_string(e.event.kind)},
                             {"footprint", {f.x0, f.y0, f.x1, f.y1}},
                             {"dh", e.event.dh},
                             {"shape", to_string(e.event.shape)},
                             {"removed_m3", e.removed_volume},
                             {"cumulative_removed_m3", e.cumulative_removed}});
  }
  doc["checkpoints"] = json::array();
  for (const auto& c : truth->checkpoints) {
    const std::string name = "truth/heightfield_" + padded(c.scan_index) + ".csv";
    auto out = open_out(root_ / name);
    write_heightfield_csv(out, c.terrain);
    doc["checkpoints"].push_back({{"scan_index", c.scan_index},
                                  {"cumulative_removed_m3", c.cumulative_removed},
                                  {"heightfield", name}});
  }
  auto out = open_out(root_ / "truth.json");
  out << doc.dump(2) << '\n';
}

Dataset Dataset::open(const fs::path& root) {
  Dataset ds;
  ds.root_ = root;
  const fs::path pose_path = root / "poses.csv";
  if (!fs::exists(pose_path)) {
    throw Error(ErrorCode::kMissingPose, "missing " + pose_path.string());
  }
  std::ifstream pose_in(pose_path);
  const auto poses = read_poses_csv(pose_in, pose_path.string());
  std::map<std::int64_t, SensorPose> by_index;
  for (const auto& p : poses) by_index[p.scan_index] = p;

  if (fs::is_directory(root / "scans")) {
    for (const auto& entry : fs::directory_iterator(root / "scans")) {
      if (entry.path().extension() != ".csv") continue;
      std::int64_t index = 0;
      if (!parse_int(entry.path().stem().string(), index)) {
        throw Error(ErrorCode::kMalformedRow,
                    "scan file name is not an index: " + entry.path().string());
      }
      ds.indices_.push_back(index);
    }
  }
  std::sort(ds.indices_.begin(), ds.indices_.end());
  for (std::size_t i = 0; i < ds.indices_.size(); ++i) {
    const auto it = by_index.find(ds.indices_[i]);
    if (it == by_index.end()) {
      throw Error(ErrorCode::kMissingPose,
                  "no pose for scan " + std::to_string(ds.indices_[i]));
    }
    ds.poses_.push_back(it->second);
    if (i > 0 && ds.indices_[i] != ds.indices_[i - 1] + 1) {
      ds.warnings_.push_back("gap in scan indices between " +
                             std::to_string(ds.indices_[i - 1]) + " and " +
                             std::to_string(ds.indices_[i]));
    }
  }
  return ds;
}

LabelledScan Dataset::load_scan(std::size_t i) const {
  const fs::path path = root_ / "scans" / scan_file_name(indices_.at(i));
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  LabelledScan scan = read_scan_csv(in, path.string());
  scan.timestamp = poses_[i].timestamp;
  return scan;
}

TruthSummary read_truth_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  TruthSummary summary;
  try {
    const json doc = json::parse(in);
    for (const auto& e : doc.at("events")) {
      summary.events.push_back({e.at("at_scan").get<std::int64_t>(),
                                e.at("kind").get<std::string>(),
                                e.at("removed_m3").get<double>(),
                                e.at("cumulative_removed_m3").get<double>()});
    }
    for (const auto& c : doc.at("checkpoints")) {
      summary.checkpoints.push_back({c.at("scan_index").get<std::int64_t>(),
                                     c.at("cumulative_removed_m3").get<double>(),
                                     c.at("heightfield").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRow, path.string() + ": " + e.what());
  }
  return summary;
}

}  // namespace terrain_hmm
