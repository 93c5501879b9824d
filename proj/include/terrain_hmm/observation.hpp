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

#ifndef TERRAIN_HMM_OBSERVATION_HPP
#define TERRAIN_HMM_OBSERVATION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "terrain_hmm/grid_config.hpp"
#include "terrain_hmm/keys.hpp"

namespace terrain_hmm {

enum class PointLabel : std::uint8_t { kTerrain, kMachine, kAgent, kExcluded };

/// Map-from-sensor pose: p_map = rotation * p_sensor + translation.
struct SensorPose {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  double timestamp = 0.0;
  std::int64_t scan_index = 0;
};

struct LabelledScan {
  std::vector<Eigen::Vector3d> points;  // sensor frame
  std::vector<PointLabel> labels;
  double timestamp = 0.0;
};

/// Terrain points of one scan expressed in the map frame, plus the sensor
/// origin they were observed from.
struct MapFrameScan {
  std::vector<Eigen::Vector3d> points;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  std::int64_t scan_index = 0;
};

/// Axis-aligned box in the sensor frame: inclusive min, exclusive max.
struct ExclusionBox {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();

  bool contains(const Eigen::Vector3d& p) const {
    return (p.array() >= min.array()).all() && (p.array() < max.array()).all();
  }
};

/// Occupied voxels of a scan, each holding the member point with the largest
/// unquantized z.
using VoxelMap = std::unordered_map<VoxelKey, Eigen::Vector3d, VoxelKeyHash>;

enum class Occupancy : std::uint8_t { kFree, kOccupied };

struct ColumnEntry {
  std::int32_t iz = 0;
  Occupancy occupancy = Occupancy::kFree;
  std::optional<double> max_z;  // set for occupied entries only

  friend bool operator==(const ColumnEntry&, const ColumnEntry&) = default;
};

/// Observed voxels of one (x, y) column, strictly increasing in iz.
struct ColumnObservation {
  CellKey cell;
  std::vector<ColumnEntry> entries;
};

struct HeightObservation {
  CellKey cell;
  double height = 0.0;
};

struct ScanDiagnostics {
  std::size_t input_points = 0;
  std::size_t non_terrain_points = 0;
  std::size_t out_of_range_points = 0;
  std::size_t occupied_voxels = 0;
  std::size_t columns = 0;
  std::size_t columns_dropped_free_base = 0;
  std::size_t observations = 0;
};

/// Wall-clock seconds spent in each pipeline stage.
struct StageTimings {
  double transform = 0.0;
  double voxelize = 0.0;
  double raycast = 0.0;
  double reduce = 0.0;
  double update = 0.0;

  double total() const { return transform + voxelize + raycast + reduce + update; }
  StageTimings& operator+=(const StageTimings& other);
};

LabelledScan exclusion_filter(LabelledScan scan,
                              std::span<const ExclusionBox> boxes);

/// Keeps the terrain-labelled points and maps them into the map frame.
/// Throws kInvalidPose when the quaternion norm is off by more than 1e-9.
MapFrameScan transform_to_map(const LabelledScan& scan, const SensorPose& pose);

/// Buckets points into voxels, keeping the highest point per voxel. Points
/// with z outside [h_min, h_max) are dropped and counted in `diagnostics`.
VoxelMap voxelize(const MapFrameScan& scan, const GridConfig& cfg,
                  ScanDiagnostics* diagnostics = nullptr);

/// Casts a ray from `origin` to the stored point of every occupied voxel. The
/// voxels pierced before the terminal one are free; the terminal voxel is
/// occupied, and occupied wins over free. Only columns holding at least one
/// occupied voxel are returned, sorted by cell.
std::vector<ColumnObservation> raycast_observed(const Eigen::Vector3d& origin,
                                                const VoxelMap& occupied,
                                                double delta);

/// Per column: drop it when the lowest observation is free, otherwise return
/// the highest z of the run of consecutive occupied voxels starting at the
/// bottom. The run ends at a free voxel, an unobserved gap, or the list end.
std::vector<HeightObservation> reduce_columns(
    std::span<const ColumnObservation> columns,
    ScanDiagnostics* diagnostics = nullptr);

/// Height observation of a single column, or nullopt if it is dropped.
std::optional<double> reduce_column(const ColumnObservation& column);

/// exclusion_filter -> transform_to_map -> voxelize -> raycast_observed ->
/// reduce_columns.
std::vector<HeightObservation> process_scan(
    const LabelledScan& scan, const SensorPose& pose, const GridConfig& cfg,
    std::span<const ExclusionBox> boxes = {},
    ScanDiagnostics* diagnostics = nullptr, StageTimings* timings = nullptr);

}  // namespace terrain_hmm

#endif  // TERRAIN_HMM_OBSERVATION_HPP
