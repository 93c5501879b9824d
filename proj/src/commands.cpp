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

#include "terrain_hmm/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>
#include <tbb/info.h>
#include <tbb/task_arena.h>

#include "terrain_hmm/error.hpp"
#include "terrain_hmm/scenario.hpp"
#include "terrain_hmm/text_format.hpp"
#include "terrain_hmm/volumetrics.hpp"

namespace terrain_hmm {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string padded(std::int64_t value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%06lld", static_cast<long long>(value));
  return buffer;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

json timings_json(const StageTimings& t) {
  return {{"transform_s", t.transform}, {"voxelize_s", t.voxelize},
          {"raycast_s", t.raycast},     {"reduce_s", t.reduce},
          {"update_s", t.update},       {"total_s", t.total()}};
}

void accumulate(ScanDiagnostics& sum, const ScanDiagnostics& d) {
  sum.input_points += d.input_points;
  sum.non_terrain_points += d.non_terrain_points;
  sum.out_of_range_points += d.out_of_range_points;
  sum.occupied_voxels += d.occupied_voxels;
  sum.columns += d.columns;
  sum.columns_dropped_free_base += d.columns_dropped_free_base;
  sum.observations += d.observations;
}

void write_metrics(const fs::path& path, const RunConfig& cfg, const MapRun* run,
                   const std::string& status, const std::string& error) {
  const std::size_t n = num_states(cfg.grid);
  json doc;
  doc["status"] = status;
  doc["n_states"] = n;
  doc["delta_off"] = (1.0 - cfg.grid.a_self) / static_cast<double>(n - 1);
  doc["delta"] = cfg.grid.delta;
  doc["stride"] = cfg.stride;
  if (!error.empty()) doc["error"] = error;
  if (run != nullptr) {
    doc["scans_read"] = run->scans_read;
    doc["scans_processed"] = run->scans_processed;
    doc["wall_seconds"] = run->wall_seconds;
    doc["scans_per_sec"] = run->wall_seconds > 0.0
                               ? static_cast<double>(run->scans_processed) /
                                     run->wall_seconds
                               : 0.0;
    doc["cells_created"] = run->cells_created;
    doc["cells_updated"] = run->cells_updated;
    doc["state_changes"] = run->state_changes;
    doc["skipped_out_of_range"] = run->skipped_out_of_range;
    doc["duplicate_observations"] = run->duplicate_observations;
    doc["final_cells"] = run->final_map.cells.size();
    doc["snapshots"] = run->snapshots.size();
    doc["points_in"] = run->diagnostics.input_points;
    doc["points_out_of_range"] = run->diagnostics.out_of_range_points;
    doc["columns_dropped_free_base"] = run->diagnostics.columns_dropped_free_base;
    doc["stages"] = timings_json(run->timings);
    doc["warnings"] = run->warnings;
  }
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

struct IndexRow {
  std::int64_t scan_index = 0;
  double timestamp = 0.0;
  std::string file;
  bool initialized = false;
};

constexpr std::string_view kIndexHeader = "scan_index,timestamp,file,initialized";

std::vector<IndexRow> read_index(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != kIndexHeader) {
    throw Error(ErrorCode::kMalformedRow, path.string() + ":1: bad header");
  }
  std::vector<IndexRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    IndexRow row;
    std::int64_t init = 0;
    if (f.size() != 4 || !parse_int(f[0], row.scan_index) ||
        !parse_double(f[1], row.timestamp) || !parse_int(f[3], init)) {
      throw Error(ErrorCode::kMalformedRow,
                  path.string() + ":" + std::to_string(line_no) + ": " + line);
    }
    row.file = std::string(trim(f[2]));
    row.initialized = init != 0;
    rows.push_back(row);
  }
  return rows;
}

// Runs process_scan + apply_observations, adding stage times to `timings`.
UpdateReport map_one(GlobalMap& map, const LabelledScan& scan, const SensorPose& pose,
                     std::int64_t scan_index, const RunConfig& cfg,
                     ScanDiagnostics* diag, StageTimings& timings) {
  const auto obs =
      process_scan(scan, pose, cfg.grid, cfg.exclusion_boxes, diag, &timings);
  const auto start = Clock::now();
  const auto report = map.apply_observations(obs, scan_index);
  timings.update += seconds_since(start);
  return report;
}

}  // namespace

MapRun run_map(const Dataset& dataset, const RunConfig& cfg) {
  validate(cfg);
  MapRun run;
  run.warnings = dataset.warnings();
  GlobalMap map(cfg.grid);
  const auto start = Clock::now();

  if (dataset.size() == 0) run.warnings.push_back("dataset holds no scans");
  const std::int64_t first = dataset.size() > 0 ? dataset.scan_index(0) : 0;
  std::int64_t next_snapshot = first + cfg.snapshot_every;
  double last_timestamp = 0.0;
  bool dirty = false;

  for (std::size_t i = 0; i < dataset.size(); i += static_cast<std::size_t>(cfg.stride)) {
    const LabelledScan scan = dataset.load_scan(i);
    ++run.scans_read;
    ScanDiagnostics diag;
    const auto report = map_one(map, scan, dataset.pose(i), dataset.scan_index(i), cfg,
                                &diag, run.timings);
    ++run.scans_processed;
    accumulate(run.diagnostics, diag);
    run.cells_created += report.created;
    run.cells_updated += report.updated;
    run.state_changes += report.state_changed;
    run.skipped_out_of_range += report.skipped_out_of_range;
    run.duplicate_observations += report.duplicate_observations;
    last_timestamp = dataset.pose(i).timestamp;
    dirty = true;

    if (map.scan_counter() >= next_snapshot) {
      run.snapshots.push_back(map.snapshot(last_timestamp));
      run.initialized.push_back(map.is_initialized());
      while (next_snapshot <= map.scan_counter()) next_snapshot += cfg.snapshot_every;
      dirty = false;
    }
  }
  run.final_map = map.snapshot(last_timestamp);
  if (dirty) {
    run.snapshots.push_back(run.final_map);
    run.initialized.push_back(map.is_initialized());
  }
  if (run.duplicate_observations > 0) {
    run.warnings.push_back(std::to_string(run.duplicate_observations) +
                           " duplicate observations (last one kept)");
  }
  run.wall_seconds = seconds_since(start);
  return run;
}

CommandResult cmd_map(const RunConfig& cfg) {
  validate(cfg);
  fs::create_directories(cfg.out / "snapshots");
  CommandResult result;
  MapRun run;
  try {
    run = run_map(Dataset::open(cfg.dataset), cfg);
  } catch (const Error& e) {
    write_metrics(cfg.out / "metrics.json", cfg, nullptr, "failed", e.what());
    throw;
  }

  auto index = open_out(cfg.out / "snapshots" / "index.csv");
  index << kIndexHeader << '\n';
  for (std::size_t s = 0; s < run.snapshots.size(); ++s) {
    const auto& snap = run.snapshots[s];
    const std::string name = "snapshot_" + padded(snap.scan_index) + ".csv";
    auto out = open_out(cfg.out / "snapshots" / name);
    write_snapshot_csv(out, snap, cfg.grid.delta);
    index << snap.scan_index << ',' << format_number(snap.timestamp) << ',' << name
          << ',' << (run.initialized[s] ? 1 : 0) << '\n';
  }
  {
    auto out = open_out(cfg.out / "map.csv");
    write_snapshot_csv(out, run.final_map, cfg.grid.delta);
  }
  write_metrics(cfg.out / "metrics.json", cfg, &run, "ok", "");
  result.warnings = run.warnings;
  return result;
}

CommandResult cmd_volume(const RunConfig& cfg, const fs::path& snapshot_dir) {
  validate(cfg);
  CommandResult result;
  const auto rows = read_index(snapshot_dir / "index.csv");
  if (rows.size() < 2) {
    throw Error(ErrorCode::kTooFewSnapshots,
                "need at least 2 snapshots, found " + std::to_string(rows.size()));
  }
  std::vector<MapSnapshot> snapshots;
  for (const auto& row : rows) {
    std::ifstream in(snapshot_dir / row.file);
    if (!in) throw Error(ErrorCode::kIo, "cannot read " + (snapshot_dir / row.file).string());
    snapshots.push_back(read_snapshot_csv(in, row.scan_index, row.timestamp));
  }

  std::size_t baseline = 0;
  if (cfg.baseline >= 0) {
    baseline = static_cast<std::size_t>(cfg.baseline);
  } else {
    const auto it = std::find_if(rows.begin(), rows.end(),
                                 [](const IndexRow& r) { return r.initialized; });
    if (it == rows.end()) {
      result.warnings.push_back("no snapshot is past the initialization period; "
                                "baseline is the first snapshot");
    } else {
      baseline = static_cast<std::size_t>(it - rows.begin());
    }
  }
  const auto series = volume_timeseries(snapshots, cfg.grid.delta, baseline);

  fs::create_directories(cfg.out / "change_grids");
  std::size_t common_total = 0;
  for (std::size_t t = baseline + 1; t < snapshots.size(); ++t) {
    common_total += volume_between(snapshots[baseline], snapshots[t], cfg.grid.delta)
                        .common_cell_count;
  }
  if (baseline + 1 < snapshots.size() && common_total == 0) {
    result.warnings.push_back("snapshots share no common cells; volumes are zero");
  }
  {
    auto out = open_out(cfg.out / "volume.csv");
    write_volume_csv(out, series);
  }
  for (std::size_t t = 0; t < snapshots.size(); ++t) {
    const auto partner = receding_window_partner(snapshots, t, cfg.window);
    if (!partner) continue;
    const auto grid = change_grid(snapshots[*partner], snapshots[t]);
    auto out = open_out(cfg.out / "change_grids" /
                        ("change_" + padded(grid.k1) + "_" + padded(grid.k2) + ".csv"));
    write_change_grid_csv(out, grid);
  }
  return result;
}

CommandResult cmd_simulate(const fs::path& scenario_path,
                           std::optional<std::uint64_t> seed, const fs::path& out) {
  Scenario scenario = load_scenario(scenario_path);
  if (seed) scenario.seed = *seed;
  DatasetWriter writer(out);
  const auto truth = run_scenario(scenario, [&](const sim::RenderedScan& r) {
    writer.write(r.scan, r.pose);
  });
  writer.finish(&truth);
  return {};
}

BenchReport bench_scans(const std::vector<std::pair<LabelledScan, SensorPose>>& scans,
                        const RunConfig& cfg, std::size_t total_scans) {
  BenchReport report;
  report.hardware_contexts = std::max(1u, std::thread::hardware_concurrency());
  report.parallel_contexts = cfg.threads > 0
                                 ? static_cast<std::size_t>(cfg.threads)
                                 : static_cast<std::size_t>(tbb::info::default_concurrency());
  if (scans.empty()) return report;

  std::size_t points = 0;
  for (const auto& s : scans) points += s.first.points.size();
  report.points_per_scan = points / scans.size();

  auto pass = [&](int contexts) {
    BenchPass p;
    tbb::task_arena arena(contexts);
    arena.execute([&] {
      GlobalMap map(cfg.grid);
      const auto start = Clock::now();
      for (std::size_t k = 0; k < total_scans; ++k) {
        const auto& [scan, pose] = scans[k % scans.size()];
        map_one(map, scan, pose, static_cast<std::int64_t>(k), cfg, nullptr, p.timings);
      }
      p.seconds = seconds_since(start);
    });
    p.scans = total_scans;
    p.scans_per_sec = p.seconds > 0.0 ? static_cast<double>(total_scans) / p.seconds : 0.0;
    return p;
  };
  report.single = pass(1);
  report.parallel = pass(static_cast<int>(report.parallel_contexts));
  return report;
}

CommandResult cmd_bench(const RunConfig& cfg) {
  validate(cfg);
  CommandResult result;
  const Dataset dataset = Dataset::open(cfg.dataset);
  constexpr std::size_t kMinScans = 100;
  std::vector<std::pair<LabelledScan, SensorPose>> scans;
  for (std::size_t i = 0; i < std::min(dataset.size(), kMinScans); ++i) {
    scans.emplace_back(dataset.load_scan(i), dataset.pose(i));
  }
  if (scans.empty()) result.warnings.push_back("dataset holds no scans");
  const std::size_t total = scans.empty() ? 0 : std::max(kMinScans, scans.size());
  const BenchReport r = bench_scans(scans, cfg, total);

  auto pass_json = [](const BenchPass& p) {
    return json{{"scans", p.scans},
                {"seconds", p.seconds},
                {"scans_per_sec", p.scans_per_sec},
                {"stages", timings_json(p.timings)}};
  };
  json doc{{"points_per_scan", r.points_per_scan},
           {"hardware_contexts", r.hardware_contexts},
           {"parallel_contexts", r.parallel_contexts},
           {"single", pass_json(r.single)},
           {"parallel", pass_json(r.parallel)}};
  fs::create_directories(cfg.out);
  auto out = open_out(cfg.out / "bench.json");
  out << doc.dump(2) << '\n';
  std::cout << "scans " << r.parallel.scans << ", " << r.points_per_scan
            << " points/scan\n"
            << "single:   " << format_number(r.single.scans_per_sec) << " scans/s\n"
            << "parallel: " << format_number(r.parallel.scans_per_sec) << " scans/s ("
            << r.parallel_contexts << " contexts)\n";
  const auto& t = r.parallel.timings;
  std::cout << "stages (parallel, s): transform " << format_number(t.transform)
            << ", voxelize " << format_number(t.voxelize) << ", raycast "
            << format_number(t.raycast) << ", reduce " << format_number(t.reduce)
            << ", update " << format_number(t.update) << '\n';
  return result;
}

}  // namespace terrain_hmm
