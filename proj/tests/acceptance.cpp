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

// Acceptance run: one PASS/FAIL line per criterion. Exits nonzero when a hard
// criterion fails; the throughput check is reported but never fails the run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <tbb/global_control.h>

#include "oracles.hpp"
#include "terrain_hmm/commands.hpp"
#include "terrain_hmm/hmm.hpp"
#include "terrain_hmm/observation.hpp"
#include "terrain_hmm/scenario.hpp"
#include "terrain_hmm/terrain_map.hpp"
#include "terrain_hmm/volumetrics.hpp"
#include "terrain_hmm/voxel_traversal.hpp"

namespace terrain_hmm {
namespace {

namespace fs = std::filesystem;

// Frozen from oracle::scans_to_flip(0, 0.25, 81, 0.25, 0.99, 0.6, 5.0, 2.0).
constexpr int kScansToFlip = 3;

struct Outcome {
  bool pass = false;
  std::string detail;
  bool soft = false;
};

int failures = 0;

void Report(int id, const std::string& name, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("[%2d] %s %-28s %s (%.1f s)\n", id,
              o.pass ? "PASS" : (o.soft ? "FAIL (soft, recorded)" : "FAIL"), name.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass && !o.soft) ++failures;
}

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

Outcome ConfigReproduction() {
  const GridConfig cfg;
  const auto n = num_states(cfg);
  const double off = build_transition_matrix(n, cfg.a_self).off_diagonal();
  const bool pass = n == 81 && std::abs(off - 0.000125) <= 1e-18;
  return {pass, Fmt("n=%zu delta_off=%.17g", n, off)};
}

Outcome FilterOracle() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> log_b(-30.0, 0.0);
  double worst = 0.0;
  int pairs = 0;
  for (std::size_t n : {2u, 81u, 256u}) {
    const int count = n == 81 ? 3334 : 3333;
    for (int i = 0; i < count; ++i, ++pairs) {
      const double a_self = 0.5 + 0.5 * u(rng);
      std::vector<double> x(n), b(n);
      for (auto& v : x) v = u(rng);
      const double sum = std::accumulate(x.begin(), x.end(), 0.0);
      for (auto& v : x) v /= sum;
      for (auto& v : b) v = std::exp(log_b(rng));
      const auto got = hmm_filter_update(x, build_transition_matrix(n, a_self),
                                         LikelihoodMatrix::from_densities(b));
      const auto want = oracle::dense_filter_update(x, a_self, b);
      for (std::size_t l = 0; l < n; ++l) worst = std::max(worst, std::abs(got[l] - want[l]));
    }
  }
  return {worst <= 1e-12, Fmt("%d pairs, max |diff| = %.3g", pairs, worst)};
}

Outcome StochasticInvariants() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> size(2, 300);
  double worst_row = 0.0;
  double worst_post = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    GridConfig cfg;
    cfg.delta = 0.05 + 0.5 * u(rng);
    cfg.h_max = cfg.delta * static_cast<double>(size(rng) - 1);
    cfg.sigma = cfg.delta * (0.5 + 2.0 * u(rng));
    cfg.a_self = 0.5 + 0.499 * u(rng);
    const auto n = num_states(cfg);
    const auto A = build_transition_matrix(n, cfg.a_self);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      double col = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        row += A(i, j);
        col += A(j, i);
      }
      worst_row = std::max({worst_row, std::abs(row - 1.0), std::abs(col - 1.0)});
    }
    std::vector<double> x(n, 1.0 / static_cast<double>(n));
    std::uniform_real_distribution<double> h(cfg.h_min, cfg.h_max);
    for (int k = 0; k < 1000; ++k) {
      hmm_filter_update_in_place(x, A, gaussian_likelihood(cfg, h(rng)));
    }
    worst_post = std::max(worst_post, std::abs(std::accumulate(x.begin(), x.end(), 0.0) - 1.0));
  }
  const bool pass = worst_row <= 1e-12 && worst_post <= 1e-9;
  return {pass, Fmt("20 configs, row/col err %.3g, posterior err %.3g", worst_row, worst_post)};
}

Outcome RaycastOracle() {
  constexpr double kDelta = 0.25;
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  int exact = 0;
  int covered = 0;
  int slab_equal = 0;
  double max_extra_chord = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d a(u(rng), u(rng), u(rng));
    const Eigen::Vector3d b(u(rng), u(rng), u(rng));
    std::set<VoxelKey> walked;
    traverse_voxels(a, b, kDelta, [&](const VoxelKey& k) { walked.insert(k); });
    const auto sampled = oracle::sampled_voxels(a, b, kDelta, kDelta / 100.0);
    if (walked == sampled) ++exact;
    if (std::includes(walked.begin(), walked.end(), sampled.begin(), sampled.end())) {
      bool small = true;
      for (const auto& k : walked) {
        if (sampled.contains(k)) continue;
        const double chord = oracle::chord_length(a, b, k, kDelta);
        max_extra_chord = std::max(max_extra_chord, chord);
        if (chord >= kDelta / 100.0) small = false;
      }
      if (small) ++covered;
    }
    if (walked == oracle::slab_voxels(a, b, kDelta)) ++slab_equal;
  }
  // Sampling at delta/100 cannot see a voxel whose chord is shorter than the
  // step, so the traversal may legitimately list a few extra corner voxels.
  const bool pass = covered == 1000 && slab_equal == 1000;
  return {pass, Fmt("1000 beams: %d identical to sampling, %d consistent (extra chords "
                    "< %.4g m, max %.3g), %d identical to exact slab set",
                    exact, covered, kDelta / 100.0, max_extra_chord, slab_equal)};
}

ColumnObservation Column(std::initializer_list<std::pair<std::int32_t, double>> occupied,
                         std::initializer_list<std::int32_t> free) {
  ColumnObservation c;
  for (auto [iz, z] : occupied) c.entries.push_back({iz, Occupancy::kOccupied, z});
  for (auto iz : free) c.entries.push_back({iz, Occupancy::kFree, std::nullopt});
  std::sort(c.entries.begin(), c.entries.end(),
            [](const auto& l, const auto& r) { return l.iz < r.iz; });
  return c;
}

Outcome ColumnRules() {
  // Consecutive occupied voxels from the bottom: report the top one's max z.
  const auto run = Column({{4, 1.1}, {5, 1.4}, {6, 1.6}}, {7, 8});
  // Lowest observed voxel is free: nothing below can be trusted.
  const auto free_base = Column({{6, 1.6}}, {4, 5});
  // An unobserved voxel ends the run.
  const auto gap = Column({{4, 1.1}, {6, 1.6}}, {});
  const auto r1 = reduce_column(run);
  const auto r2 = reduce_column(free_base);
  const auto r3 = reduce_column(gap);
  const bool pass = r1 == 1.6 && !r2 && r3 == 1.1;
  return {pass, Fmt("run -> %s, free base -> %s, gap -> %s",
                    r1 ? std::to_string(*r1).c_str() : "dropped",
                    r2 ? std::to_string(*r2).c_str() : "dropped",
                    r3 ? std::to_string(*r3).c_str() : "dropped")};
}

struct ScenarioMap {
  std::vector<MapSnapshot> snapshots;  // before each event, then final
  sim::TruthLog truth;
};

/// Maps every scan of the scenario in-process, snapshotting right before
/// each event is applied and after the last scan.
ScenarioMap MapScenario(const Scenario& scenario, const GridConfig& cfg) {
  ScenarioMap out;
  GlobalMap map(cfg);
  std::size_t next = 0;
  out.truth = run_scenario(scenario, [&](const sim::RenderedScan& r) {
    const auto k = r.pose.scan_index;
    while (next < scenario.events.size() && scenario.events[next].at_scan == k) {
      out.snapshots.push_back(map.snapshot(r.scan.timestamp));
      ++next;
    }
    map.apply_observations(process_scan(r.scan, r.pose, cfg), k);
  });
  out.snapshots.push_back(map.snapshot());
  return out;
}

Scenario Staircase() {
  return load_scenario(fs::path(TERRAIN_HMM_SOURCE_DIR) / "scenarios/staircase.scenario");
}

std::optional<ScenarioMap> clean_staircase;

Outcome StaircaseVolumes() {
  clean_staircase = MapScenario(Staircase(), GridConfig{});
  const auto series = volume_timeseries(clean_staircase->snapshots, 0.25, 0);
  std::string detail;
  bool pass = series.size() == 5;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double want = clean_staircase->truth.events[i - 1].cumulative_removed;
    const double err = std::abs(series[i].net - want) / want;
    pass = pass && err <= 0.05;
    detail += Fmt("%s%.2f/%.0f", i > 1 ? " " : "", series[i].net, want);
  }
  return {pass, "plateaus m^3 (got/true): " + detail};
}

Outcome DustRobustness() {
  auto scenario = Staircase();
  scenario.sensor.dust_rate = 0.1;
  if (!clean_staircase) clean_staircase = MapScenario(Staircase(), GridConfig{});
  const auto dusty = MapScenario(scenario, GridConfig{});
  const auto& a = clean_staircase->snapshots.back();
  const auto& b = dusty.snapshots.back();
  const auto grid = change_grid(a, b);
  const auto report = volume_between(a, b, 0.25);
  const double clean_net =
      volume_timeseries(clean_staircase->snapshots, 0.25, 0).back().net;
  const double dusty_net = volume_timeseries(dusty.snapshots, 0.25, 0).back().net;
  const double rel = std::abs(dusty_net - clean_net) / clean_net;
  const bool pass = grid.cells.empty() && report.only_in_first == 0 &&
                    report.only_in_second == 0 && rel < 0.01;
  return {pass, Fmt("%zu cells differ (+%zu/-%zu unmatched), net %.2f vs %.2f m^3 (%.2f%%)",
                    grid.cells.size(), report.only_in_second, report.only_in_first,
                    dusty_net, clean_net, 100.0 * rel)};
}

Outcome Responsiveness() {
  const GridConfig cfg;
  const int oracle_k = oracle::scans_to_flip(0.0, 0.25, 81, 0.25, 0.99, 0.6, 5.0, 2.0);
  const std::vector<SurveyPoint> survey{{{0, 0}, 5.0}};
  auto map = GlobalMap::from_survey(cfg, survey);
  int engine_k = -1;
  for (int k = 1; k <= 100 && engine_k < 0; ++k) {
    const std::vector<HeightObservation> obs{{{0, 0}, 2.0}};
    map.apply_observations(obs, k);
    if (map.snapshot().cells[0].height == 2.0) engine_k = k;
  }
  const bool pass = oracle_k == kScansToFlip && engine_k == kScansToFlip;
  return {pass, Fmt("k*=%d, oracle %d, engine %d", kScansToFlip, oracle_k, engine_k)};
}

Outcome Throughput() {
  // Rough terrain seen from a raised sensor at ~50k points per scan.
  Scenario s;
  s.terrain.kind = sim::TerrainKind::kRough;
  s.terrain.extent = {0, 0, 60, 60};
  s.terrain.base_height = 5.0;
  s.sensor.mode = TrajectoryMode::kOrbit;
  s.sensor.position = {30, 30, 15};
  s.sensor.radius = 5;
  s.sensor.period = 10;
  s.sensor.azimuth_count = 1024;
  s.sensor.elevation_min_deg = -70;
  s.sensor.elevation_max_deg = -15;
  s.sensor.elevation_count = 50;
  s.sensor.range_noise = 0.02;
  s.scans = 10;
  std::vector<std::pair<LabelledScan, SensorPose>> scans;
  run_scenario(s, [&](const sim::RenderedScan& r) { scans.emplace_back(r.scan, r.pose); });
  RunConfig cfg;
  const auto report = bench_scans(scans, cfg, 40);
  const bool pass = report.hardware_contexts >= 4 && report.parallel.scans_per_sec >= 10.0;
  const auto& t = report.single.timings;
  const double per_scan = 1000.0 / static_cast<double>(report.single.scans);
  Outcome o{pass, Fmt("%zu points/scan, %zu hw contexts: %.1f scans/s on 1, %.1f on %zu; "
                      "ms/scan transform %.0f voxelize %.0f raycast %.0f reduce %.0f "
                      "update %.0f",
                      report.points_per_scan, report.hardware_contexts,
                      report.single.scans_per_sec, report.parallel.scans_per_sec,
                      report.parallel_contexts, t.transform * per_scan,
                      t.voxelize * per_scan, t.raycast * per_scan, t.reduce * per_scan,
                      t.update * per_scan)};
  o.soft = true;
  return o;
}

std::string ReadTree(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename() != "metrics.json") {
      files.push_back(fs::relative(e.path(), root));
    }
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) {
    std::ifstream in(root / f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    all += f.generic_string() + "\n" + ss.str();
  }
  return all;
}

Outcome Determinism() {
  const fs::path dir = fs::temp_directory_path() / "terrain_hmm_acceptance";
  fs::remove_all(dir);
  cmd_simulate(fs::path(TERRAIN_HMM_SOURCE_DIR) / "scenarios/digface.scenario", 11,
               dir / "dataset");
  std::vector<std::string> trees;
  for (int threads : {1, 2, 8}) {
    RunConfig cfg;
    cfg.stride = 2;
    cfg.snapshot_every = 50;
    cfg.threads = threads;
    cfg.dataset = dir / "dataset";
    cfg.out = dir / ("out_" + std::to_string(threads));
    tbb::global_control limit(tbb::global_control::max_allowed_parallelism,
                              static_cast<std::size_t>(threads));
    cmd_map(cfg);
    trees.push_back(ReadTree(cfg.out));
  }
  const bool pass = !trees[0].empty() && trees[0] == trees[1] && trees[1] == trees[2];
  fs::remove_all(dir);
  return {pass, Fmt("exports at 1/2/8 threads %s (%zu bytes)",
                    pass ? "identical" : "differ", trees[0].size())};
}

}  // namespace
}  // namespace terrain_hmm

int main() {
  using namespace terrain_hmm;
  Report(1, "config reproduction", ConfigReproduction);
  Report(2, "filter oracle", FilterOracle);
  Report(3, "stochastic invariants", StochasticInvariants);
  Report(4, "raycast oracle", RaycastOracle);
  Report(5, "column reduction", ColumnRules);
  Report(6, "staircase volumes", StaircaseVolumes);
  Report(7, "dust robustness", DustRobustness);
  Report(8, "responsiveness", Responsiveness);
  Report(9, "throughput", Throughput);
  Report(10, "determinism", Determinism);
  std::printf("%d hard criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
