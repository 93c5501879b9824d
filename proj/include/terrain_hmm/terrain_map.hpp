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

#ifndef TERRAIN_HMM_TERRAIN_MAP_HPP
#define TERRAIN_HMM_TERRAIN_MAP_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "terrain_hmm/grid_config.hpp"
#include "terrain_hmm/hmm.hpp"
#include "terrain_hmm/keys.hpp"
#include "terrain_hmm/observation.hpp"

namespace terrain_hmm {

struct SurveyPoint {
  CellKey cell;
  double height = 0.0;
};

struct UpdateReport {
  std::size_t created = 0;
  std::size_t updated = 0;
  std::size_t state_changed = 0;
  std::size_t skipped_out_of_range = 0;
  std::size_t duplicate_observations = 0;
};

struct SnapshotCell {
  CellKey cell;
  double height = 0.0;
  double confidence = 0.0;

  friend bool operator==(const SnapshotCell&, const SnapshotCell&) = default;
};

/// Reported heights of every known cell at one scan, sorted by cell.
struct MapSnapshot {
  std::int64_t scan_index = 0;
  double timestamp = 0.0;
  std::vector<SnapshotCell> cells;

  friend bool operator==(const MapSnapshot&, const MapSnapshot&) = default;
};

/// Sparse height grid where every observed cell carries an HMM over the
/// discretized heights. Single writer: apply_observations calls must be
/// serialized in scan order; const accessors may run concurrently with each
/// other but not with an update.
class GlobalMap {
 public:
  /// Empty map. Throws kInvalidConfig.
  explicit GlobalMap(const GridConfig& cfg);

  /// Map whose surveyed cells start one-hot at the nearest state.
  /// Throws kOutOfRangeHeight for heights outside [h_min, h_max].
  static GlobalMap from_survey(const GridConfig& cfg,
                               std::span<const SurveyPoint> survey);

  /// Creates unseen cells from their first measurement and runs the filter
  /// on the rest. Cells without an observation are left untouched.
  /// Throws kOutOfOrderScan if scan_index < scan_counter().
  UpdateReport apply_observations(std::span<const HeightObservation> obs,
                                  std::int64_t scan_index);

  MapSnapshot snapshot(double timestamp = 0.0) const;

  /// True once scan_counter() >= m_init.
  bool is_initialized() const { return scan_counter_ >= cfg_.m_init; }

  const GridConfig& config() const { return cfg_; }
  const TransitionMatrix& transition() const { return transition_; }
  std::size_t state_count() const { return transition_.size(); }
  /// Number of sensor scans elapsed: last applied scan_index + 1.
  std::int64_t scan_counter() const { return scan_counter_; }
  std::size_t size() const { return cells_.size(); }
  const CellHmm* find(CellKey cell) const;

 private:
  GridConfig cfg_;
  TransitionMatrix transition_;
  std::unordered_map<CellKey, CellHmm, CellKeyHash> cells_;
  std::int64_t scan_counter_ = 0;
};

inline GlobalMap init_map(const GridConfig& cfg) { return GlobalMap(cfg); }

/// Writes `ix,iy,x_center,y_center,height,confidence` rows with a header.
void write_snapshot_csv(std::ostream& out, const MapSnapshot& snapshot,
                        double delta);

/// Parses the format written by write_snapshot_csv. Throws kMalformedRow.
MapSnapshot read_snapshot_csv(std::istream& in, std::int64_t scan_index = 0,
                              double timestamp = 0.0);

}  // namespace terrain_hmm

#endif  // TERRAIN_HMM_TERRAIN_MAP_HPP
