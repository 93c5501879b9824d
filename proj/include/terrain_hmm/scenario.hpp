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

#ifndef TERRAIN_HMM_SCENARIO_HPP
#define TERRAIN_HMM_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include <Eigen/Core>

#include "terrain_hmm/sim.hpp"

namespace terrain_hmm {

enum class TrajectoryMode { kStatic, kOrbit, kSwing };

struct SensorSpec {
  TrajectoryMode mode = TrajectoryMode::kStatic;
  Eigen::Vector3d position{20.0, 20.0, 12.0};  // orbit center for kOrbit
  double radius = 0.0;
  std::int64_t period = 100;
  double swing_amplitude_deg = 45.0;
  std::int32_t azimuth_count = 360;
  double elevation_min_deg = -80.0;
  double elevation_max_deg = -10.0;
  std::int32_t elevation_count = 32;
  double range_noise = 0.0;
  double dust_rate = 0.0;
  double max_range = 80.0;
};

/// A complete synthetic run: terrain, event script, sensor and scan count.
struct Scenario {
  sim::TerrainSpec terrain;
  sim::EventScript events;
  SensorSpec sensor;
  std::int64_t scans = 100;
  double rate_hz = 10.0;
  std::uint64_t seed = 1;
};

/// Parses the key = value scenario format (see scenarios/*.scenario).
/// Throws kInvalidSpec naming the offending key, including events whose
/// footprint leaves the terrain extent or that are out of order.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& path);

sim::VirtualSensor build_sensor(const Scenario& scenario);

/// Generates the terrain and runs the scenario, feeding each scan to `sink`.
sim::TruthLog run_scenario(const Scenario& scenario, const sim::ScanSink& sink);

}  // namespace terrain_hmm

#endif  // TERRAIN_HMM_SCENARIO_HPP
