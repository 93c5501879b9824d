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

#include "terrain_hmm/scenario.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>
#include <string>

#include "terrain_hmm/config.hpp"
#include "terrain_hmm/error.hpp"
#include "terrain_hmm/text_format.hpp"

namespace terrain_hmm {

namespace {

constexpr auto kErr = ErrorCode::kInvalidSpec;

[[noreturn]] void invalid(const KeyValue& kv, const std::string& why) {
  throw Error(kErr, "line " + std::to_string(kv.line) + ": key '" + kv.key +
                        "' " + why);
}

sim::TerrainKind parse_terrain_kind(const KeyValue& kv) {
  if (kv.value == "flat") return sim::TerrainKind::kFlat;
  if (kv.value == "bench") return sim::TerrainKind::kBenchFace;
  if (kv.value == "rough") return sim::TerrainKind::kRough;
  invalid(kv, "must be flat, bench or rough");
}

TrajectoryMode parse_mode(const KeyValue& kv) {
  if (kv.value == "static") return TrajectoryMode::kStatic;
  if (kv.value == "orbit") return TrajectoryMode::kOrbit;
  if (kv.value == "swing") return TrajectoryMode::kSwing;
  invalid(kv, "must be static, orbit or swing");
}

// event = at_scan kind x0 y0 x1 y1 dh shape
sim::TerrainEvent parse_event(const KeyValue& kv) {
  std::istringstream fields(kv.value);
  std::string tokens[8];
  for (auto& t : tokens) {
    if (!(fields >> t)) invalid(kv, "expects: at_scan kind x0 y0 x1 y1 dh shape");
  }
  std::string extra;
  if (fields >> extra) invalid(kv, "has trailing fields");

  sim::TerrainEvent e;
  double v[5];
  if (!parse_int(tokens[0], e.at_scan)) invalid(kv, "at_scan is not an integer");
  for (int i = 0; i < 5; ++i) {
    if (!parse_double(tokens[2 + i], v[i])) invalid(kv, "has a non-numeric field");
  }
  if (tokens[1] == "excavate") {
    e.kind = sim::EventKind::kExcavate;
  } else if (tokens[1] == "spill") {
    e.kind = sim::EventKind::kSpill;
  } else {
    invalid(kv, "kind must be excavate or spill");
  }
  if (tokens[7] == "flat") {
    e.shape = sim::EventShape::kFlat;
  } else if (tokens[7] == "ramp") {
    e.shape = sim::EventShape::kRamp;
  } else {
    invalid(kv, "shape must be flat or ramp");
  }
  e.footprint = {v[0], v[1], v[2], v[3]};
  e.dh = v[4];
  if (e.kind == sim::EventKind::kExcavate && e.dh > 0.0) {
    invalid(kv, "excavation needs dh <= 0");
  }
  if (e.kind == sim::EventKind::kSpill && e.dh < 0.0) {
    invalid(kv, "spill needs dh >= 0");
  }
  return e;
}

}  // namespace

Scenario parse_scenario(std::istream& in) {
  Scenario s;
  std::vector<KeyValue> event_lines;
  for (const auto& kv : parse_key_values(in)) {
    const std::string& k = kv.key;
    auto& t = s.terrain;
    auto& sensor = s.sensor;
    if (k == "scans") {
      s.scans = parse_integer(kv, kErr);
    } else if (k == "rate_hz") {
      s.rate_hz = parse_number(kv, kErr);
    } else if (k == "seed") {
      s.seed = static_cast<std::uint64_t>(parse_integer(kv, kErr));
    } else if (k == "terrain.kind") {
      t.kind = parse_terrain_kind(kv);
    } else if (k == "terrain.extent") {
      const auto v = parse_numbers(kv, 4, kErr);
      t.extent = {v[0], v[1], v[2], v[3]};
    } else if (k == "terrain.resolution") {
      t.resolution = parse_number(kv, kErr);
    } else if (k == "terrain.h_min") {
      t.h_min = parse_number(kv, kErr);
    } else if (k == "terrain.h_max") {
      t.h_max = parse_number(kv, kErr);
    } else if (k == "terrain.height") {
      t.base_height = parse_number(kv, kErr);
    } else if (k == "terrain.crest") {
      t.crest_height = parse_number(kv, kErr);
    } else if (k == "terrain.face_slope_deg") {
      t.face_slope_deg = parse_number(kv, kErr);
    } else if (k == "terrain.toe_x") {
      t.toe_x = parse_number(kv, kErr);
    } else if (k == "terrain.amplitude") {
      t.amplitude = parse_number(kv, kErr);
    } else if (k == "terrain.wavelength") {
      t.wavelength = parse_number(kv, kErr);
    } else if (k == "sensor.trajectory") {
      sensor.mode = parse_mode(kv);
    } else if (k == "sensor.position") {
      const auto v = parse_numbers(kv, 3, kErr);
      sensor.position = {v[0], v[1], v[2]};
    } else if (k == "sensor.radius") {
      sensor.radius = parse_number(kv, kErr);
    } else if (k == "sensor.period") {
      sensor.period = parse_integer(kv, kErr);
    } else if (k == "sensor.swing_amplitude_deg") {
      sensor.swing_amplitude_deg = parse_number(kv, kErr);
    } else if (k == "sensor.azimuth_count") {
      sensor.azimuth_count = static_cast<std::int32_t>(parse_integer(kv, kErr));
    } else if (k == "sensor.elevation_min_deg") {
      sensor.elevation_min_deg = parse_number(kv, kErr);
    } else if (k == "sensor.elevation_max_deg") {
      sensor.elevation_max_deg = parse_number(kv, kErr);
    } else if (k == "sensor.elevation_count") {
      sensor.elevation_count = static_cast<std::int32_t>(parse_integer(kv, kErr));
    } else if (k == "sensor.range_noise") {
      sensor.range_noise = parse_number(kv, kErr);
    } else if (k == "sensor.dust_rate") {
      sensor.dust_rate = parse_number(kv, kErr);
    } else if (k == "sensor.max_range") {
      sensor.max_range = parse_number(kv, kErr);
    } else if (k == "event") {
      s.events.push_back(parse_event(kv));
      event_lines.push_back(kv);
    } else {
      invalid(kv, "is not a known scenario key");
    }
  }

  auto require = [](bool ok, const std::string& field) {
    if (!ok) throw Error(kErr, "field '" + field + "' is out of range");
  };
  const auto& t = s.terrain;
  require(s.scans >= 0, "scans");
  require(s.rate_hz > 0.0, "rate_hz");
  require(t.resolution > 0.0, "terrain.resolution");
  require(t.extent.x_max > t.extent.x_min && t.extent.y_max > t.extent.y_min,
          "terrain.extent");
  require(t.h_max > t.h_min, "terrain.h_max");
  require(t.base_height >= t.h_min && t.base_height <= t.h_max, "terrain.height");
  require(s.sensor.azimuth_count >= 1, "sensor.azimuth_count");
  require(s.sensor.elevation_count >= 1, "sensor.elevation_count");
  require(s.sensor.period >= 1, "sensor.period");
  require(s.sensor.range_noise >= 0.0, "sensor.range_noise");
  require(s.sensor.dust_rate >= 0.0 && s.sensor.dust_rate < 1.0, "sensor.dust_rate");
  require(s.sensor.max_range > 0.0, "sensor.max_range");
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto& f = s.events[i].footprint;
    if (f.x0 < t.extent.x_min || f.y0 < t.extent.y_min || f.x1 > t.extent.x_max ||
        f.y1 > t.extent.y_max || f.x1 < f.x0 || f.y1 < f.y0) {
      invalid(event_lines[i], "footprint lies outside terrain.extent");
    }
    if (s.events[i].at_scan < 0 || s.events[i].at_scan >= s.scans) {
      invalid(event_lines[i], "at_scan is outside [0, scans)");
    }
    if (i > 0 && s.events[i].at_scan < s.events[i - 1].at_scan) {
      invalid(event_lines[i], "events must be ordered by at_scan");
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open scenario " + path.string());
  return parse_scenario(in);
}

sim::VirtualSensor build_sensor(const Scenario& scenario) {
  const SensorSpec& spec = scenario.sensor;
  sim::VirtualSensor sensor;
  switch (spec.mode) {
    case TrajectoryMode::kStatic:
      sensor.trajectory =
          sim::static_trajectory(spec.position, scenario.scans, scenario.rate_hz);
      break;
    case TrajectoryMode::kOrbit:
      sensor.trajectory = sim::orbit_trajectory(spec.position, spec.radius, spec.period,
                                                scenario.scans, scenario.rate_hz);
      break;
    case TrajectoryMode::kSwing:
      sensor.trajectory = sim::swing_trajectory(
          spec.position, spec.swing_amplitude_deg * std::numbers::pi / 180.0,
          spec.period, scenario.scans, scenario.rate_hz);
      break;
  }
  sensor.azimuth_count = spec.azimuth_count;
  sensor.elevation_angles = sim::elevation_fan(
      spec.elevation_min_deg, spec.elevation_max_deg, spec.elevation_count);
  sensor.range_noise_sigma = spec.range_noise;
  sensor.dust_rate = spec.dust_rate;
  sensor.max_range = spec.max_range;
  sensor.seed = scenario.seed;
  return sensor;
}

sim::TruthLog run_scenario(const Scenario& scenario, const sim::ScanSink& sink) {
  return sim::run_scenario(sim::generate_terrain(scenario.terrain, scenario.seed),
                           scenario.events, build_sensor(scenario), scenario.scans,
                           sink);
}

}  // namespace terrain_hmm
