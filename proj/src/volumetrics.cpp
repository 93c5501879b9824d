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

#include "terrain_hmm/volumetrics.hpp"

#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "terrain_hmm/error.hpp"
#include "terrain_hmm/text_format.hpp"

namespace terrain_hmm {

namespace {

constexpr std::string_view kVolumeHeader =
    "scan_index,timestamp,net_m3,removed_m3,added_m3";
constexpr std::string_view kChangeHeader = "ix,iy,dh";

// Walks the sorted cell lists of both snapshots in lockstep.
template <typename OnCommon, typename OnFirst, typename OnSecond>
void merge_cells(const MapSnapshot& s1, const MapSnapshot& s2,
                 OnCommon&& common, OnFirst&& first_only,
                 OnSecond&& second_only) {
  auto a = s1.cells.begin();
  auto b = s2.cells.begin();
  while (a != s1.cells.end() && b != s2.cells.end()) {
    if (a->cell < b->cell) {
      first_only(*a++);
    } else if (b->cell < a->cell) {
      second_only(*b++);
    } else {
      common(*a++, *b++);
    }
  }
  for (; a != s1.cells.end(); ++a) first_only(*a);
  for (; b != s2.cells.end(); ++b) second_only(*b);
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& line) {
  throw Error(ErrorCode::kMalformedRow,
              "line " + std::to_string(line_no) + ": " + line);
}

}  // namespace

VolumeReport volume_between(const MapSnapshot& s1, const MapSnapshot& s2,
                            double delta) {
  VolumeReport report;
  report.k1 = s1.scan_index;
  report.k2 = s2.scan_index;
  merge_cells(
      s1, s2,
      [&](const SnapshotCell& c1, const SnapshotCell& c2) {
        ++report.common_cell_count;
        const double dv = cell_volume_change(c1.height, c2.height, delta);
        if (dv > 0.0) {
          report.removed_volume += dv;
        } else {
          report.added_volume -= dv;
        }
      },
      [&](const SnapshotCell&) { ++report.only_in_first; },
      [&](const SnapshotCell&) { ++report.only_in_second; });
  report.net_change = report.removed_volume - report.added_volume;
  return report;
}

ChangeGrid change_grid(const MapSnapshot& s1, const MapSnapshot& s2) {
  ChangeGrid grid;
  grid.k1 = s1.scan_index;
  grid.k2 = s2.scan_index;
  merge_cells(
      s1, s2,
      [&](const SnapshotCell& c1, const SnapshotCell& c2) {
        const double dh = c2.height - c1.height;
        if (dh != 0.0) grid.cells.push_back({c1.cell, dh});
      },
      [](const SnapshotCell&) {}, [](const SnapshotCell&) {});
  return grid;
}

std::vector<VolumeSample> volume_timeseries(std::span<const MapSnapshot> snapshots,
                                            double delta, std::size_t baseline) {
  if (baseline >= snapshots.size()) {
    throw Error(ErrorCode::kBaselineOutOfRange,
                "baseline " + std::to_string(baseline) + " but only " +
                    std::to_string(snapshots.size()) + " snapshots");
  }
  std::vector<VolumeSample> series;
  for (std::size_t t = baseline; t < snapshots.size(); ++t) {
    const auto report = volume_between(snapshots[baseline], snapshots[t], delta);
    series.push_back({snapshots[t].scan_index, snapshots[t].timestamp,
                      report.net_change, report.removed_volume,
                      report.added_volume});
  }
  return series;
}

std::optional<std::size_t> receding_window_partner(
    std::span<const MapSnapshot> snapshots, std::size_t current,
    std::int64_t window) {
  std::optional<std::size_t> partner;
  for (std::size_t i = 0; i < current; ++i) {
    if (snapshots[current].scan_index - snapshots[i].scan_index >= window) {
      partner = i;
    }
  }
  return partner;
}

void write_volume_csv(std::ostream& out, std::span<const VolumeSample> series) {
  out << kVolumeHeader << '\n';
  for (const auto& s : series) {
    out << s.scan_index << ',' << format_number(s.timestamp) << ','
        << format_number(s.net) << ',' << format_number(s.removed) << ','
        << format_number(s.added) << '\n';
  }
}

std::vector<VolumeSample> read_volume_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kVolumeHeader) {
    malformed(1, line);
  }
  std::vector<VolumeSample> series;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    VolumeSample s;
    if (f.size() != 5 || !parse_int(f[0], s.scan_index) ||
        !parse_double(f[1], s.timestamp) || !parse_double(f[2], s.net) ||
        !parse_double(f[3], s.removed) || !parse_double(f[4], s.added)) {
      malformed(line_no, line);
    }
    series.push_back(s);
  }
  return series;
}

void write_change_grid_csv(std::ostream& out, const ChangeGrid& grid) {
  out << kChangeHeader << '\n';
  for (const auto& c : grid.cells) {
    out << c.cell.ix << ',' << c.cell.iy << ',' << format_number(c.dh) << '\n';
  }
}

ChangeGrid read_change_grid_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kChangeHeader) {
    malformed(1, line);
  }
  ChangeGrid grid;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    std::int64_t ix = 0;
    std::int64_t iy = 0;
    double dh = 0.0;
    if (f.size() != 3 || !parse_int(f[0], ix) || !parse_int(f[1], iy) ||
        !parse_double(f[2], dh)) {
      malformed(line_no, line);
    }
    grid.cells.push_back(
        {{static_cast<std::int32_t>(ix), static_cast<std::int32_t>(iy)}, dh});
  }
  return grid;
}

}  // namespace terrain_hmm
