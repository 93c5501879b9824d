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

#include "terrain_hmm/terrain_map.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include <tbb/parallel_for.h>

#include "terrain_hmm/error.hpp"
#include "terrain_hmm/text_format.hpp"

namespace terrain_hmm {

namespace {

const GridConfig& checked(const GridConfig& cfg) {
  validate(cfg);
  return cfg;
}

constexpr std::string_view kSnapshotHeader =
    "ix,iy,x_center,y_center,height,confidence";

}  // namespace

GlobalMap::GlobalMap(const GridConfig& cfg)
    : cfg_(checked(cfg)), transition_(num_states(cfg), cfg.a_self) {}

GlobalMap GlobalMap::from_survey(const GridConfig& cfg,
                                 std::span<const SurveyPoint> survey) {
  GlobalMap map(cfg);
  const std::size_t n = map.state_count();
  for (const auto& point : survey) {
    if (!std::isfinite(point.height) || point.height < cfg.h_min ||
        point.height > cfg.h_max) {
      throw Error(ErrorCode::kOutOfRangeHeight,
                  "survey height " + format_number(point.height) +
                      " outside [h_min, h_max]");
    }
    map.cells_.insert_or_assign(
        point.cell, CellHmm::one_hot(n, nearest_state(cfg, point.height), 0));
  }
  return map;
}

UpdateReport GlobalMap::apply_observations(std::span<const HeightObservation> obs,
                                           std::int64_t scan_index) {
  if (scan_index < scan_counter_) {
    throw Error(ErrorCode::kOutOfOrderScan,
                "scan " + std::to_string(scan_index) +
                    " arrives after scan counter " + std::to_string(scan_counter_));
  }
  UpdateReport report;

  // One observation per cell; if a cell repeats, the last occurrence wins.
  std::vector<HeightObservation> unique(obs.begin(), obs.end());
  std::stable_sort(unique.begin(), unique.end(),
                   [](const auto& a, const auto& b) { return a.cell < b.cell; });
  std::vector<HeightObservation> latest;
  latest.reserve(unique.size());
  for (const auto& o : unique) {
    if (!latest.empty() && latest.back().cell == o.cell) {
      latest.back() = o;
      ++report.duplicate_observations;
    } else {
      latest.push_back(o);
    }
  }

  const std::size_t n = state_count();
  std::vector<std::pair<CellHmm*, double>> pending;
  pending.reserve(latest.size());
  for (const auto& o : latest) {
    if (!std::isfinite(o.height) || o.height < cfg_.h_min ||
        o.height > cfg_.h_max) {
      ++report.skipped_out_of_range;
      continue;
    }
    auto it = cells_.find(o.cell);
    if (it == cells_.end()) {
      cells_.emplace(o.cell,
                     CellHmm::one_hot(n, nearest_state(cfg_, o.height), scan_index));
      ++report.created;
    } else {
      pending.emplace_back(&it->second, o.height);
    }
  }

  std::atomic<std::size_t> changed{0};
  tbb::parallel_for(
      tbb::blocked_range<std::size_t>(0, pending.size(), 128),
      [&](const tbb::blocked_range<std::size_t>& range) {
        std::size_t local_changed = 0;
        for (std::size_t i = range.begin(); i != range.end(); ++i) {
          CellHmm& cell = *pending[i].first;
          const auto likelihood = gaussian_likelihood(cfg_, pending[i].second);
          hmm_filter_update_in_place(cell.state, transition_, likelihood);
          const std::size_t before = cell.reported_state_index;
          if (report_state(cell, cfg_.p_min) != before) ++local_changed;
          cell.last_update_scan = scan_index;
          ++cell.observation_count;
        }
        changed += local_changed;
      });
  report.updated = pending.size();
  report.state_changed = changed.load();
  scan_counter_ = scan_index + 1;
  return report;
}

MapSnapshot GlobalMap::snapshot(double timestamp) const {
  MapSnapshot snap;
  snap.scan_index = scan_counter_ == 0 ? 0 : scan_counter_ - 1;
  snap.timestamp = timestamp;
  snap.cells.reserve(cells_.size());
  for (const auto& [key, cell] : cells_) {
    snap.cells.push_back(
        {key, state_center(cfg_, cell.reported_state_index), cell.confidence()});
  }
  std::sort(snap.cells.begin(), snap.cells.end(),
            [](const auto& a, const auto& b) { return a.cell < b.cell; });
  return snap;
}

const CellHmm* GlobalMap::find(CellKey cell) const {
  const auto it = cells_.find(cell);
  return it == cells_.end() ? nullptr : &it->second;
}

void write_snapshot_csv(std::ostream& out, const MapSnapshot& snapshot,
                        double delta) {
  out << kSnapshotHeader << '\n';
  for (const auto& c : snapshot.cells) {
    out << c.cell.ix << ',' << c.cell.iy << ','
        << format_number((c.cell.ix + 0.5) * delta) << ','
        << format_number((c.cell.iy + 0.5) * delta) << ','
        << format_number(c.height) << ',' << format_number(c.confidence)
        << '\n';
  }
}

MapSnapshot read_snapshot_csv(std::istream& in, std::int64_t scan_index,
                              double timestamp) {
  MapSnapshot snap;
  snap.scan_index = scan_index;
  snap.timestamp = timestamp;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || trim(line) != kSnapshotHeader) {
    throw Error(ErrorCode::kMalformedRow, "line 1: expected snapshot header");
  }
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    std::int64_t ix = 0;
    std::int64_t iy = 0;
    double x = 0.0;
    double y = 0.0;
    double h = 0.0;
    double conf = 0.0;
    if (fields.size() != 6 || !parse_int(fields[0], ix) ||
        !parse_int(fields[1], iy) || !parse_double(fields[2], x) ||
        !parse_double(fields[3], y) || !parse_double(fields[4], h) ||
        !parse_double(fields[5], conf)) {
      throw Error(ErrorCode::kMalformedRow,
                  "line " + std::to_string(line_no) + ": " + line);
    }
    snap.cells.push_back({{static_cast<std::int32_t>(ix),
                           static_cast<std::int32_t>(iy)},
                          h,
                          conf});
  }
  std::sort(snap.cells.begin(), snap.cells.end(),
            [](const auto& a, const auto& b) { return a.cell < b.cell; });
  return snap;
}

}  // namespace terrain_hmm
