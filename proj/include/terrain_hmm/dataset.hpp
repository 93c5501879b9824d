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

#ifndef TERRAIN_HMM_DATASET_HPP
#define TERRAIN_HMM_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "terrain_hmm/observation.hpp"
#include "terrain_hmm/sim.hpp"

namespace terrain_hmm {

// Dataset directory layout:
//   scans/NNNNNN.csv   x,y,z,label        (sensor frame, one file per scan)
//   poses.csv          scan_index,timestamp,tx,ty,tz,qw,qx,qy,qz
//   truth.json         events and checkpoints (simulated datasets only)
//   truth/heightfield_NNNNNN.csv

std::string_view to_string(PointLabel label);

void write_scan_csv(std::ostream& out, const LabelledScan& scan);
/// `source` names the file in error messages. Throws kMalformedRow.
LabelledScan read_scan_csv(std::istream& in, const std::string& source);

void write_poses_csv(std::ostream& out, const std::vector<SensorPose>& poses);
std::vector<SensorPose> read_poses_csv(std::istream& in, const std::string& source);

std::string scan_file_name(std::int64_t scan_index);

/// Streams a simulated run to disk in the layout above.
class DatasetWriter {
 public:
  explicit DatasetWriter(std::filesystem::path root);

  void write(const LabelledScan& scan, const SensorPose& pose);
  /// Writes poses.csv and, when given, truth.json plus heightfields.
  void finish(const sim::TruthLog* truth);

 private:
  std::filesystem::path root_;
  std::vector<SensorPose> poses_;
};

/// Read side of the layout. Opening indexes the scan files and loads
/// poses.csv; scans are read lazily in ascending scan_index.
class Dataset {
 public:
  /// Throws kMissingPose when poses.csv is absent or lacks a scan's pose,
  /// kMalformedRow for unparsable rows.
  static Dataset open(const std::filesystem::path& root);

  std::size_t size() const { return indices_.size(); }
  std::int64_t scan_index(std::size_t i) const { return indices_[i]; }
  const SensorPose& pose(std::size_t i) const { return poses_[i]; }
  LabelledScan load_scan(std::size_t i) const;
  /// Gaps between consecutive scan indices (warnings, not errors).
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::filesystem::path root_;
  std::vector<std::int64_t> indices_;
  std::vector<SensorPose> poses_;  // aligned with indices_
  std::vector<std::string> warnings_;
};

struct TruthEventRecord {
  std::int64_t at_scan = 0;
  std::string kind;
  double removed_m3 = 0.0;
  double cumulative_removed_m3 = 0.0;
};

struct TruthCheckpointRecord {
  std::int64_t scan_index = 0;
  double cumulative_removed_m3 = 0.0;
  std::string heightfield;
};

struct TruthSummary {
  std::vector<TruthEventRecord> events;
  std::vector<TruthCheckpointRecord> checkpoints;
};

TruthSummary read_truth_json(const std::filesystem::path& path);

}  // namespace terrain_hmm

#endif  // TERRAIN_HMM_DATASET_HPP
