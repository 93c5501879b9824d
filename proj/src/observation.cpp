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

#include "terrain_hmm/observation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <utility>

#include <tbb/enumerable_thread_specific.h>
#include <tbb/parallel_for.h>

#include "terrain_hmm/error.hpp"
#include "terrain_hmm/voxel_traversal.hpp"

namespace terrain_hmm {

namespace {

constexpr double kQuaternionTolerance = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Free voxel found by one beam, tagged with its column slot.
struct FreeHit {
  std::uint32_t column;
  std::int32_t iz;

  friend auto operator<=>(const FreeHit&, const FreeHit&) = default;
};

}  // namespace

StageTimings& StageTimings::operator+=(const StageTimings& other) {
  transform += other.transform;
  voxelize += other.voxelize;
  raycast += other.raycast;
  reduce += other.reduce;
  update += other.update;
  return *this;
}

LabelledScan exclusion_filter(LabelledScan scan,
                              std::span<const ExclusionBox> boxes) {
  if (boxes.empty()) return scan;
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    for (const auto& box : boxes) {
      if (box.contains(scan.points[i])) {
        scan.labels[i] = PointLabel::kExcluded;
        break;
      }
    }
  }
  return scan;
}

MapFrameScan transform_to_map(const LabelledScan& scan, const SensorPose& pose) {
  if (scan.points.size() != scan.labels.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "points and labels differ in length");
  }
  if (std::abs(pose.rotation.norm() - 1.0) > kQuaternionTolerance) {
    throw Error(ErrorCode::kInvalidPose, "rotation quaternion is not unit");
  }
  if (!pose.translation.allFinite()) {
    throw Error(ErrorCode::kInvalidPose, "translation is not finite");
  }
  const Eigen::Matrix3d rotation = pose.rotation.toRotationMatrix();
  MapFrameScan out;
  out.origin = pose.translation;
  out.scan_index = pose.scan_index;
  out.points.reserve(scan.points.size());
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    if (scan.labels[i] != PointLabel::kTerrain) continue;
    out.points.push_back(rotation * scan.points[i] + pose.translation);
  }
  return out;
}

VoxelMap voxelize(const MapFrameScan& scan, const GridConfig& cfg,
                  ScanDiagnostics* diagnostics) {
  if (!(cfg.delta > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "delta must be positive");
  }
  VoxelMap voxels;
  voxels.reserve(scan.points.size());
  std::size_t dropped = 0;
  for (const auto& p : scan.points) {
    if (!p.allFinite() || p.z() < cfg.h_min || p.z() >= cfg.h_max) {
      ++dropped;
      continue;
    }
    auto [it, inserted] = voxels.try_emplace(voxel_key(p, cfg.delta), p);
    if (!inserted && p.z() > it->second.z()) it->second = p;
  }
  if (diagnostics != nullptr) {
    diagnostics->out_of_range_points += dropped;
    diagnostics->occupied_voxels += voxels.size();
  }
  return voxels;
}

std::vector<ColumnObservation> raycast_observed(const Eigen::Vector3d& origin,
                                                const VoxelMap& occupied,
                                                double delta) {
  if (occupied.empty()) return {};

  // Occupied voxels in a fixed order so column slots do not depend on hashing.
  std::vector<std::pair<VoxelKey, Eigen::Vector3d>> targets(occupied.begin(),
                                                            occupied.end());
  std::sort(targets.begin(), targets.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<ColumnObservation> columns;
  std::unordered_map<CellKey, std::uint32_t, CellKeyHash> slot_of;
  for (const auto& [key, point] : targets) {
    auto [it, inserted] = slot_of.try_emplace(
        key.cell(), static_cast<std::uint32_t>(columns.size()));
    if (inserted) columns.push_back({key.cell(), {}});
    columns[it->second].entries.push_back(
        {key.iz, Occupancy::kOccupied, point.z()});
  }

  tbb::enumerable_thread_specific<std::vector<FreeHit>> local_hits;
  tbb::parallel_for(
      tbb::blocked_range<std::size_t>(0, targets.size(), 64),
      [&](const tbb::blocked_range<std::size_t>& range) {
        auto& hits = local_hits.local();
        for (std::size_t i = range.begin(); i != range.end(); ++i) {
          const VoxelKey terminal = targets[i].first;
          CellKey cached_cell{};
          std::uint32_t cached_slot = 0;
          bool cached_known = false;
          bool have_cache = false;
          traverse_voxels(origin, targets[i].second, delta,
                          [&](const VoxelKey& v) {
                            if (v == terminal) return;
                            const CellKey cell = v.cell();
                            if (!have_cache || cell != cached_cell) {
                              const auto it = slot_of.find(cell);
                              cached_cell = cell;
                              cached_known = it != slot_of.end();
                              if (cached_known) cached_slot = it->second;
                              have_cache = true;
                            }
                            if (cached_known) hits.push_back({cached_slot, v.iz});
                          });
        }
      });

  std::vector<FreeHit> free_hits;
  for (auto& hits : local_hits) {
    free_hits.insert(free_hits.end(), hits.begin(), hits.end());
  }
  std::sort(free_hits.begin(), free_hits.end());
  free_hits.erase(std::unique(free_hits.begin(), free_hits.end()),
                  free_hits.end());

  // Merge free voxels into each column; occupied entries win on conflicts.
  std::size_t cursor = 0;
  for (std::uint32_t slot = 0; slot < columns.size(); ++slot) {
    auto& entries = columns[slot].entries;
    const std::size_t occupied_count = entries.size();
    while (cursor < free_hits.size() && free_hits[cursor].column == slot) {
      entries.push_back({free_hits[cursor].iz, Occupancy::kFree, std::nullopt});
      ++cursor;
    }
    // Occupied entries were pushed before free ones, so a stable sort keeps
    // the occupied entry first among equal iz and unique() discards the free.
    std::stable_sort(entries.begin(), entries.end(),
                     [](const ColumnEntry& a, const ColumnEntry& b) {
                       return a.iz < b.iz;
                     });
    if (entries.size() != occupied_count) {
      entries.erase(std::unique(entries.begin(), entries.end(),
                                [](const ColumnEntry& a, const ColumnEntry& b) {
                                  return a.iz == b.iz;
                                }),
                    entries.end());
    }
  }
  std::sort(columns.begin(), columns.end(),
            [](const auto& a, const auto& b) { return a.cell < b.cell; });
  return columns;
}

std::optional<double> reduce_column(const ColumnObservation& column) {
  const auto& entries = column.entries;
  if (entries.empty() || entries.front().occupancy != Occupancy::kOccupied) {
    return std::nullopt;
  }
  std::size_t top = 0;
  while (top + 1 < entries.size() &&
         entries[top + 1].occupancy == Occupancy::kOccupied &&
         entries[top + 1].iz == entries[top].iz + 1) {
    ++top;
  }
  return entries[top].max_z;
}

std::vector<HeightObservation> reduce_columns(
    std::span<const ColumnObservation> columns, ScanDiagnostics* diagnostics) {
  std::vector<std::optional<double>> heights(columns.size());
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, columns.size(), 256),
                    [&](const tbb::blocked_range<std::size_t>& range) {
                      for (std::size_t i = range.begin(); i != range.end(); ++i) {
                        heights[i] = reduce_column(columns[i]);
                      }
                    });
  std::vector<HeightObservation> out;
  out.reserve(columns.size());
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (heights[i]) out.push_back({columns[i].cell, *heights[i]});
  }
  if (diagnostics != nullptr) {
    diagnostics->columns += columns.size();
    diagnostics->columns_dropped_free_base += columns.size() - out.size();
    diagnostics->observations += out.size();
  }
  return out;
}

std::vector<HeightObservation> process_scan(const LabelledScan& scan,
                                            const SensorPose& pose,
                                            const GridConfig& cfg,
                                            std::span<const ExclusionBox> boxes,
                                            ScanDiagnostics* diagnostics,
                                            StageTimings* timings) {
  ScanDiagnostics local;
  StageTimings stage;
  local.input_points = scan.points.size();

  auto start = Clock::now();
  const MapFrameScan in_map = boxes.empty()
                                  ? transform_to_map(scan, pose)
                                  : transform_to_map(exclusion_filter(scan, boxes), pose);
  local.non_terrain_points = scan.points.size() - in_map.points.size();
  stage.transform = seconds_since(start);

  start = Clock::now();
  const VoxelMap voxels = voxelize(in_map, cfg, &local);
  stage.voxelize = seconds_since(start);

  start = Clock::now();
  const auto columns = raycast_observed(in_map.origin, voxels, cfg.delta);
  stage.raycast = seconds_since(start);

  start = Clock::now();
  auto observations = reduce_columns(columns, &local);
  stage.reduce = seconds_since(start);

  if (diagnostics != nullptr) *diagnostics = local;
  if (timings != nullptr) *timings += stage;
  return observations;
}

}  // namespace terrain_hmm
