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

#ifndef TERRAIN_HMM_COMMANDS_HPP
#define TERRAIN_HMM_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "terrain_hmm/config.hpp"
#include "terrain_hmm/dataset.hpp"
#include "terrain_hmm/observation.hpp"
#include "terrain_hmm/terrain_map.hpp"

namespace terrain_hmm {

struct MapRun {
  std::vector<MapSnapshot> snapshots;  // periodic, then the final state
  std::vector<bool> initialized;       // aligned with snapshots
  MapSnapshot final_map;
  std::size_t scans_read = 0;
  std::size_t scans_processed = 0;
  std::size_t cells_created = 0;
  std::size_t cells_updated = 0;
  std::size_t state_changes = 0;
  std::size_t skipped_out_of_range = 0;
  std::size_t duplicate_observations = 0;
  ScanDiagnostics diagnostics;  // summed over processed scans
  StageTimings timings;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

/// Feeds every stride-th scan of `dataset` through the pipeline and the map.
/// A snapshot is taken whenever scan_counter passes another multiple of
/// snapshot_every (counted from the first scan) and once at the end.
MapRun run_map(const Dataset& dataset, const RunConfig& cfg);

struct CommandResult {
  int exit_code = 0;
  std::vector<std::string> warnings;
};

/// Runs run_map on cfg.dataset and writes under cfg.out:
///   snapshots/snapshot_NNNNNN.csv, snapshots/index.csv, map.csv, metrics.json
/// On failure metrics.json is still written with "status": "failed".
CommandResult cmd_map(const RunConfig& cfg);

/// Reads snapshots/index.csv from `snapshot_dir` and writes cfg.out/volume.csv
/// plus one change_grids/change_K1_K2.csv per receding-window pair.
/// Throws kTooFewSnapshots with fewer than two snapshots.
CommandResult cmd_volume(const RunConfig& cfg,
                         const std::filesystem::path& snapshot_dir);

/// Renders a scenario file to a dataset directory. `seed` overrides the
/// scenario's own seed.
CommandResult cmd_simulate(const std::filesystem::path& scenario,
                           std::optional<std::uint64_t> seed,
                           const std::filesystem::path& out);

struct BenchPass {
  std::size_t scans = 0;
  double seconds = 0.0;
  double scans_per_sec = 0.0;
  StageTimings timings;
};

struct BenchReport {
  std::size_t points_per_scan = 0;  // mean over the scan set
  std::size_t hardware_contexts = 0;
  std::size_t parallel_contexts = 0;
  BenchPass single;
  BenchPass parallel;
};

/// Maps `total_scans` scans cycling through `scans`, once confined to one
/// context and once with `threads` contexts (0 = all). Every scan gets a
/// fresh scan_index so cycling is legal.
BenchReport bench_scans(const std::vector<std::pair<LabelledScan, SensorPose>>& scans,
                        const RunConfig& cfg, std::size_t total_scans);

/// bench_scans over cfg.dataset (at least 100 scans, cycling if short);
/// writes cfg.out/bench.json and prints a summary to stdout.
CommandResult cmd_bench(const RunConfig& cfg);

}  // namespace terrain_hmm

#endif  // TERRAIN_HMM_COMMANDS_HPP
