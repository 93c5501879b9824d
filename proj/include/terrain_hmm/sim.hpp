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

#ifndef TERRAIN_HMM_SIM_HPP
#define TERRAIN_HMM_SIM_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "terrain_hmm/observation.hpp"

namespace terrain_hmm::sim {

struct Extent {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  friend bool operator==(const Extent&, const Extent&) = default;
};

/// Axis-aligned rectangle [x0, x1) x [y0, y1) in map coordinates.
struct Footprint {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double area() const { return (x1 - x0) * (y1 - y0); }
};

/// Piecewise-constant ground-truth heightfield: each cell of edge
/// `resolution` is a flat-topped column with vertical side walls.
class TrueTerrain {
 public:
  TrueTerrain(Extent extent, double resolution, double fill, double h_min,
              double h_max);

  const Extent& extent() const { return extent_; }
  double resolution() const { return resolution_; }
  std::int32_t nx() const { return nx_; }
  std::int32_t ny() const { return ny_; }
  double h_min() const { return h_min_; }
  double h_max() const { return h_max_; }

  double at(std::int32_t i, std::int32_t j) const { return heights_[index(i, j)]; }
  double& at(std::int32_t i, std::int32_t j) { return heights_[index(i, j)]; }
  std::span<const double> heights() const { return heights_; }

  /// Height under (x, y), or nullopt outside the extent.
  std::optional<double> height_at(double x, double y) const;

  /// Sum of cell heights times cell area.
  double volume() const;

  struct Hit {
    double range = 0.0;
    Eigen::Vector3d point = Eigen::Vector3d::Zero();
  };

  /// First intersection of origin + t * dir (dir unit length) with the
  /// surface for t in [0, max_range]. Computed exactly by walking the cells
  /// under the ray. Returns nullopt when the ray leaves the extent or the
  /// range limit without a hit, or when the origin is below the surface.
  ///
  /// Hits on a vertical wall are reported just inside the cell that owns the
  /// wall, so the point voxelizes into the column it physically belongs to.
  std::optional<Hit> intersect(const Eigen::Vector3d& origin,
                               const Eigen::Vector3d& dir,
                               double max_range) const;

  friend bool operator==(const TrueTerrain&, const TrueTerrain&) = default;

 private:
  std::size_t index(std::int32_t i, std::int32_t j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) +
           static_cast<std::size_t>(i);
  }

  Extent extent_;
  double resolution_;
  std::int32_t nx_;
  std::int32_t ny_;
  double h_min_;
  double h_max_;
  std::vector<double> heights_;
};

enum class TerrainKind { kFlat, kBenchFace, kRough };

struct TerrainSpec {
  TerrainKind kind = TerrainKind::kFlat;
  Extent extent{0.0, 0.0, 40.0, 40.0};
  double resolution = 0.125;
  double h_min = 0.0;
  double h_max = 20.0;
  /// Flat height, bench floor, or the mean level of rough terrain.
  double base_height = 2.0;
  /// Bench crest height; the face rises along +x starting at toe_x.
  double crest_height = 15.0;
  double face_slope_deg = 70.0;
  double toe_x = 20.0;
  /// Rough terrain amplitude and feature wavelength (meters).
  double amplitude = 1.0;
  double wavelength = 8.0;
};

/// Deterministic for a fixed seed. Throws kInvalidSpec.
TrueTerrain generate_terrain(const TerrainSpec& spec, std::uint64_t seed);

enum class EventKind { kExcavate, kSpill };
enum class EventShape { kFlat, kRamp };

struct TerrainEvent {
  std::int64_t at_scan = 0;
  EventKind kind = EventKind::kExcavate;
  Footprint footprint;
  double dh = 0.0;  // negative for excavation
  EventShape shape = EventShape::kFlat;
};

using EventScript = std::vector<TerrainEvent>;

/// Shifts every terrain cell whose center lies in the footprint by dh (flat)
/// or by dh scaled linearly from 0 at x0 to 1 at x1 (ramp).
/// Throws kInvalidSpec for a footprint outside the extent and
/// kRangeViolation if a height would leave [h_min, h_max].
TrueTerrain apply_event(TrueTerrain terrain, const TerrainEvent& event);

/// Closed-form volume removed by a flat event: -dh * footprint area.
double flat_event_removed_volume(const TerrainEvent& event);

struct VirtualSensor {
  std::vector<SensorPose> trajectory;
  std::int32_t azimuth_count = 360;
  std::vector<double> elevation_angles;  // radians, sensor frame
  double range_noise_sigma = 0.0;
  double dust_rate = 0.0;
  double max_range = 80.0;
  std::uint64_t seed = 0;
};

/// Evenly spaced elevation channels from min_deg to max_deg inclusive.
std::vector<double> elevation_fan(double min_deg, double max_deg,
                                  std::int32_t count);

std::vector<SensorPose> static_trajectory(const Eigen::Vector3d& position,
                                          std::int64_t scans, double rate_hz);
/// Circle of `radius` around `center`, one revolution every `period` scans,
/// with the sensor yawed to face along the direction of travel.
std::vector<SensorPose> orbit_trajectory(const Eigen::Vector3d& center,
                                         double radius, std::int64_t period,
                                         std::int64_t scans, double rate_hz);
/// Fixed position, yaw oscillating +-amplitude with the given period, like a
/// house-mounted sensor during a swing cycle.
std::vector<SensorPose> swing_trajectory(const Eigen::Vector3d& position,
                                         double amplitude_rad,
                                         std::int64_t period,
                                         std::int64_t scans, double rate_hz);

struct BeamReturn {
  double range = 0.0;
  double terrain_range = 0.0;
  bool dust = false;
};

struct RenderedScan {
  LabelledScan scan;
  SensorPose pose;
  std::vector<BeamReturn> returns;  // aligned with scan.points
  std::size_t beam_count = 0;
  std::size_t dust_count = 0;
};

/// One ray per (azimuth, elevation). Every returned point is labelled
/// terrain, dust included, since dust is indistinguishable at the sensor.
RenderedScan render_scan(const TrueTerrain& terrain, const VirtualSensor& sensor,
                         std::int64_t scan_index);

struct TruthEvent {
  TerrainEvent event;
  double removed_volume = 0.0;  // from the heightfield, positive = removed
  double cumulative_removed = 0.0;
};

struct TruthCheckpoint {
  std::int64_t scan_index = 0;
  double cumulative_removed = 0.0;
  TrueTerrain terrain;
};

struct TruthLog {
  std::vector<TruthEvent> events;
  /// Terrain state right before each event is applied and after the last scan.
  std::vector<TruthCheckpoint> checkpoints;
};

using ScanSink = std::function<void(const RenderedScan&)>;

/// Renders scans 0..n_scans-1, applying each event before rendering the scan
/// it is scheduled at. Throws kInvalidSpec for unordered events or a
/// trajectory shorter than n_scans.
TruthLog run_scenario(TrueTerrain terrain, const EventScript& script,
                      const VirtualSensor& sensor, std::int64_t n_scans,
                      const ScanSink& sink);

}  // namespace terrain_hmm::sim

#endif  // TERRAIN_HMM_SIM_HPP
