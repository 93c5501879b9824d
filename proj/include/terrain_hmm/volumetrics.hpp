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

#ifndef TERRAIN_HMM_VOLUMETRICS_HPP
#define TERRAIN_HMM_VOLUMETRICS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "terrain_hmm/keys.hpp"
#include "terrain_hmm/terrain_map.hpp"

namespace terrain_hmm {

/// Volume change between two map instances over their common cells.
/// Positive net_change means material was removed.
struct VolumeReport {
  std::int64_t k1 = 0;
  std::int64_t k2 = 0;
  std::size_t common_cell_count = 0;
  std::size_t only_in_first = 0;
  std::size_t only_in_second = 0;
  double removed_volume = 0.0;
  double added_volume = 0.0;
  double net_change = 0.0;
};

struct ChangeCell {
  CellKey cell;
  double dh = 0.0;  // h_k2 - h_k1
};

struct ChangeGrid {
  std::int64_t k1 = 0;
  std::int64_t k2 = 0;
  std::vector<ChangeCell> cells;
};

struct VolumeSample {
  std::int64_t scan_index = 0;
  double timestamp = 0.0;
  double net = 0.0;
  double removed = 0.0;
  double added = 0.0;
};

/// (h_k1 - h_k2) * delta^2.
inline double cell_volume_change(double h_k1, double h_k2, double delta) {
  return (h_k1 - h_k2) * delta * delta;
}

VolumeReport volume_between(const MapSnapshot& s1, const MapSnapshot& s2,
                            double delta);

/// Common cells whose height changed, sorted by cell.
ChangeGrid change_grid(const MapSnapshot& s1, const MapSnapshot& s2);

/// Net change of every snapshot relative to snapshots[baseline].
/// Throws kBaselineOutOfRange.
std::vector<VolumeSample> volume_timeseries(std::span<const MapSnapshot> snapshots,
                                            double delta, std::size_t baseline);

/// Index of the latest snapshot at least `window` scans older than
/// snapshots[current], or nullopt when none is old enough.
std::optional<std::size_t> receding_window_partner(
    std::span<const MapSnapshot> snapshots, std::size_t current,
    std::int64_t window);

void write_volume_csv(std::ostream& out, std::span<const VolumeSample> series);
std::vector<VolumeSample> read_volume_csv(std::istream& in);
void write_change_grid_csv(std::ostream& out, const ChangeGrid& grid);
ChangeGrid read_change_grid_csv(std::istream& in);

}  // namespace terrain_hmm

#endif  // TERRAIN_HMM_VOLUMETRICS_HPP
