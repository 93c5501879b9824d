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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <tbb/global_control.h>

#include "terrain_hmm/commands.hpp"
#include "terrain_hmm/config.hpp"

namespace fs = std::filesystem;
using namespace terrain_hmm;

namespace {

struct Flags {
  std::optional<fs::path> config;
  std::optional<fs::path> dataset;
  std::optional<fs::path> out;
  std::optional<std::int64_t> stride;
  std::optional<std::int64_t> window;
  std::optional<std::int64_t> baseline;
  std::optional<std::int64_t> snapshot_every;
  std::optional<std::int32_t> threads;
};

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key = value config file");
  cmd->add_option("--dataset", f.dataset, "dataset directory");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--stride", f.stride, "process every N-th scan");
  cmd->add_option("--window", f.window, "receding window in scans");
  cmd->add_option("--baseline", f.baseline, "baseline snapshot index");
  cmd->add_option("--snapshot-every", f.snapshot_every, "snapshot period in scans");
  cmd->add_option("--threads", f.threads, "worker contexts (0 = all)");
}

// Defaults, then the config file, then flags.
RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  if (f.config) cfg = load_run_config(*f.config, cfg);
  if (f.dataset) cfg.dataset = *f.dataset;
  if (f.out) cfg.out = *f.out;
  if (f.stride) cfg.stride = *f.stride;
  if (f.window) cfg.window = *f.window;
  if (f.baseline) cfg.baseline = *f.baseline;
  if (f.snapshot_every) cfg.snapshot_every = *f.snapshot_every;
  if (f.threads) cfg.threads = *f.threads;
  validate(cfg);
  return cfg;
}

int finish(const CommandResult& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic terrain height mapping from labelled LiDAR scans"};
  app.require_subcommand(1);

  Flags flags;
  auto* map = app.add_subcommand("map", "build a height map from a dataset");
  add_run_flags(map, flags);

  auto* volume = app.add_subcommand("volume", "volume timeseries and change grids");
  add_run_flags(volume, flags);
  std::optional<fs::path> snapshot_dir;
  volume->add_option("--snapshots", snapshot_dir,
                     "snapshot directory (default: <out>/snapshots)");

  auto* simulate = app.add_subcommand("simulate", "render a scenario to a dataset");
  fs::path scenario;
  std::optional<std::uint64_t> seed;
  fs::path sim_out = "dataset";
  simulate->add_option("scenario", scenario, "scenario file")->required();
  simulate->add_option("--seed", seed, "override the scenario seed");
  simulate->add_option("--out", sim_out, "dataset directory");

  auto* bench = app.add_subcommand("bench", "measure mapping throughput");
  add_run_flags(bench, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return finish(cmd_simulate(scenario, seed, sim_out));

    const RunConfig cfg = resolve(flags);
    std::unique_ptr<tbb::global_control> limit;
    if (cfg.threads > 0) {
      limit = std::make_unique<tbb::global_control>(
          tbb::global_control::max_allowed_parallelism, cfg.threads);
    }
    if (*map) return finish(cmd_map(cfg));
    if (*volume) return finish(cmd_volume(cfg, snapshot_dir.value_or(cfg.out / "snapshots")));
    if (*bench) return finish(cmd_bench(cfg));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
