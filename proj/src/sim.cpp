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

#include "terrain_hmm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Geometry>
#include <tbb/parallel_for.h>

#include "terrain_hmm/error.hpp"

namespace terrain_hmm::sim {

namespace {

// Wall and edge hits are placed this far inside the owning cell; large
// enough to survive export at 9 significant digits.
constexpr double kInsideEps = 1e-6;

std::int32_t cell_count(double span, double resolution) {
  return static_cast<std::int32_t>(std::llround(span / resolution));
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

Eigen::Quaterniond yaw_rotation(double yaw) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()));
}

}  // namespace

TrueTerrain::TrueTerrain(Extent extent, double resolution, double fill,
                         double h_min, double h_max)
    : extent_(extent),
      resolution_(resolution),
      nx_(0),
      ny_(0),
      h_min_(h_min),
      h_max_(h_max) {
  if (!(resolution > 0.0) || !(extent.x_max > extent.x_min) ||
      !(extent.y_max > extent.y_min)) {
    throw Error(ErrorCode::kInvalidSpec, "terrain extent/resolution");
  }
  nx_ = cell_count(extent.x_max - extent.x_min, resolution);
  ny_ = cell_count(extent.y_max - extent.y_min, resolution);
  if (nx_ < 1 || ny_ < 1) {
    throw Error(ErrorCode::kInvalidSpec, "terrain extent smaller than one cell");
  }
  if (!(h_max > h_min) || fill < h_min || fill > h_max) {
    throw Error(ErrorCode::kInvalidSpec, "terrain height outside [h_min, h_max]");
  }
  heights_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_),
                  fill);
}

std::optional<double> TrueTerrain::height_at(double x, double y) const {
  const auto i = static_cast<std::int64_t>(
      std::floor((x - extent_.x_min) / resolution_));
  const auto j = static_cast<std::int64_t>(
      std::floor((y - extent_.y_min) / resolution_));
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return std::nullopt;
  return at(static_cast<std::int32_t>(i), static_cast<std::int32_t>(j));
}

double TrueTerrain::volume() const {
  double sum = 0.0;
  for (double h : heights_) sum += h;
  return sum * resolution_ * resolution_;
}

std::optional<TrueTerrain::Hit> TrueTerrain::intersect(
    const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
    double max_range) const {
  if (const auto h = height_at(origin.x(), origin.y()); h && origin.z() < *h) {
    return std::nullopt;
  }

  // Clip the ray to the extent in x and y.
  const double lo[2] = {extent_.x_min, extent_.y_min};
  const double hi[2] = {extent_.x_min + nx_ * resolution_,
                        extent_.y_min + ny_ * resolution_};
  double t_enter = 0.0;
  double t_end = max_range;
  int entry_axis = -1;
  for (int a = 0; a < 2; ++a) {
    if (dir[a] == 0.0) {
      if (origin[a] < lo[a] || origin[a] >= hi[a]) return std::nullopt;
      continue;
    }
    double ta = (lo[a] - origin[a]) / dir[a];
    double tb = (hi[a] - origin[a]) / dir[a];
    if (ta > tb) std::swap(ta, tb);
    if (ta > t_enter) {
      t_enter = ta;
      entry_axis = a;
    }
    t_end = std::min(t_end, tb);
  }
  if (!(t_enter < t_end)) return std::nullopt;

  const Eigen::Vector3d start = origin + t_enter * dir;
  std::int32_t cell[2];
  std::int32_t step[2] = {0, 0};
  double t_next[2];
  double t_step[2];
  const std::int32_t limit[2] = {nx_, ny_};
  for (int a = 0; a < 2; ++a) {
    const auto idx = static_cast<std::int32_t>(
        std::floor((start[a] - lo[a]) / resolution_));
    cell[a] = std::clamp(idx, 0, limit[a] - 1);
    if (dir[a] == 0.0) {
      t_next[a] = std::numeric_limits<double>::infinity();
      t_step[a] = t_next[a];
      continue;
    }
    step[a] = dir[a] > 0.0 ? 1 : -1;
    const double boundary = lo[a] + (cell[a] + (step[a] > 0 ? 1 : 0)) * resolution_;
    t_next[a] = (boundary - origin[a]) / dir[a];
    t_step[a] = resolution_ / std::abs(dir[a]);
  }

  auto cell_point = [&](const Eigen::Vector3d& p) {
    Eigen::Vector3d q = p;
    for (int a = 0; a < 2; ++a) {
      const double c0 = lo[a] + cell[a] * resolution_;
      q[a] = std::clamp(q[a], c0 + kInsideEps, c0 + resolution_ - kInsideEps);
    }
    return q;
  };

  while (true) {
    const double t_exit = std::min({t_next[0], t_next[1], t_end});
    const double h = at(cell[0], cell[1]);
    if (entry_axis >= 0 && origin.z() + t_enter * dir.z() <= h) {
      return Hit{t_enter, cell_point(origin + t_enter * dir)};
    }
    if (dir.z() < 0.0 && origin.z() + t_exit * dir.z() <= h) {
      const double t_top = std::clamp((h - origin.z()) / dir.z(), t_enter, t_exit);
      Eigen::Vector3d p = cell_point(origin + t_top * dir);
      p.z() = h;
      return Hit{t_top, p};
    }
    if (t_exit >= t_end) return std::nullopt;
    entry_axis = t_next[0] <= t_next[1] ? 0 : 1;
    cell[entry_axis] += step[entry_axis];
    if (cell[entry_axis] < 0 || cell[entry_axis] >= limit[entry_axis]) {
      return std::nullopt;
    }
    t_enter = t_next[entry_axis];
    t_next[entry_axis] += t_step[entry_axis];
  }
}

TrueTerrain generate_terrain(const TerrainSpec& spec, std::uint64_t seed) {
  if (spec.base_height < spec.h_min || spec.base_height > spec.h_max) {
    throw Error(ErrorCode::kInvalidSpec, "terrain.height outside [h_min, h_max]");
  }
  TrueTerrain terrain(spec.extent, spec.resolution, spec.base_height, spec.h_min,
                      spec.h_max);
  const double res = spec.resolution;
  auto center_x = [&](std::int32_t i) { return spec.extent.x_min + (i + 0.5) * res; };
  auto center_y = [&](std::int32_t j) { return spec.extent.y_min + (j + 0.5) * res; };

  switch (spec.kind) {
    case TerrainKind::kFlat:
      break;
    case TerrainKind::kBenchFace: {
      if (spec.crest_height < spec.base_height || spec.crest_height > spec.h_max) {
        throw Error(ErrorCode::kInvalidSpec, "terrain.crest outside range");
      }
      if (!(spec.face_slope_deg > 0.0 && spec.face_slope_deg < 90.0)) {
        throw Error(ErrorCode::kInvalidSpec, "terrain.face_slope_deg");
      }
      const double rise = std::tan(spec.face_slope_deg * std::numbers::pi / 180.0);
      for (std::int32_t j = 0; j < terrain.ny(); ++j) {
        for (std::int32_t i = 0; i < terrain.nx(); ++i) {
          const double run = center_x(i) - spec.toe_x;
          terrain.at(i, j) = std::clamp(spec.base_height + run * rise,
                                        spec.base_height, spec.crest_height);
        }
      }
      break;
    }
    case TerrainKind::kRough: {
      if (!(spec.wavelength > 0.0) || spec.amplitude < 0.0) {
        throw Error(ErrorCode::kInvalidSpec, "terrain.wavelength/amplitude");
      }
      // Value noise: random lattice values, smoothly interpolated.
      const auto gx = static_cast<std::int32_t>(std::ceil(
                          (spec.extent.x_max - spec.extent.x_min) / spec.wavelength)) + 2;
      const auto gy = static_cast<std::int32_t>(std::ceil(
                          (spec.extent.y_max - spec.extent.y_min) / spec.wavelength)) + 2;
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> uniform(-1.0, 1.0);
      std::vector<double> lattice(static_cast<std::size_t>(gx * gy));
      for (double& v : lattice) v = uniform(rng);
      auto node = [&](std::int32_t a, std::int32_t b) {
        return lattice[static_cast<std::size_t>(b * gx + a)];
      };
      for (std::int32_t j = 0; j < terrain.ny(); ++j) {
        for (std::int32_t i = 0; i < terrain.nx(); ++i) {
          const double u = (center_x(i) - spec.extent.x_min) / spec.wavelength;
          const double v = (center_y(j) - spec.extent.y_min) / spec.wavelength;
          const auto a = static_cast<std::int32_t>(u);
          const auto b = static_cast<std::int32_t>(v);
          const double fu = smoothstep(u - a);
          const double fv = smoothstep(v - b);
          const double n0 = node(a, b) + fu * (node(a + 1, b) - node(a, b));
          const double n1 = node(a, b + 1) + fu * (node(a + 1, b + 1) - node(a, b + 1));
          terrain.at(i, j) = std::clamp(
              spec.base_height + spec.amplitude * (n0 + fv * (n1 - n0)),
              spec.h_min, spec.h_max);
        }
      }
      break;
    }
  }
  return terrain;
}

TrueTerrain apply_event(TrueTerrain terrain, const TerrainEvent& event) {
  const Footprint& f = event.footprint;
  const Extent& e = terrain.extent();
  if (!(f.x1 >= f.x0 && f.y1 >= f.y0) || f.x0 < e.x_min || f.y0 < e.y_min ||
      f.x1 > e.x_max || f.y1 > e.y_max) {
    throw Error(ErrorCode::kInvalidSpec, "event footprint outside terrain extent");
  }
  if (f.area() == 0.0) return terrain;

  const double res = terrain.resolution();
  for (std::int32_t j = 0; j < terrain.ny(); ++j) {
    const double y = e.y_min + (j + 0.5) * res;
    if (y < f.y0 || y >= f.y1) continue;
    for (std::int32_t i = 0; i < terrain.nx(); ++i) {
      const double x = e.x_min + (i + 0.5) * res;
      if (x < f.x0 || x >= f.x1) continue;
      const double scale =
          event.shape == EventShape::kFlat ? 1.0 : (x - f.x0) / (f.x1 - f.x0);
      const double h = terrain.at(i, j) + scale * event.dh;
      if (h < terrain.h_min() || h > terrain.h_max()) {
        throw Error(ErrorCode::kRangeViolation,
                    "event moves terrain outside [h_min, h_max]");
      }
      terrain.at(i, j) = h;
    }
  }
  return terrain;
}

double flat_event_removed_volume(const TerrainEvent& event) {
  return -event.dh * event.footprint.area();
}

std::vector<double> elevation_fan(double min_deg, double max_deg,
                                  std::int32_t count) {
  std::vector<double> angles;
  if (count <= 0) return angles;
  const double deg = std::numbers::pi / 180.0;
  if (count == 1) return {min_deg * deg};
  for (std::int32_t k = 0; k < count; ++k) {
    angles.push_back((min_deg + (max_deg - min_deg) * k / (count - 1)) * deg);
  }
  return angles;
}

std::vector<SensorPose> static_trajectory(const Eigen::Vector3d& position,
                                          std::int64_t scans, double rate_hz) {
  std::vector<SensorPose> poses(static_cast<std::size_t>(std::max<std::int64_t>(scans, 0)));
  for (std::int64_t k = 0; k < scans; ++k) {
    auto& p = poses[static_cast<std::size_t>(k)];
    p.translation = position;
    p.timestamp = static_cast<double>(k) / rate_hz;
    p.scan_index = k;
  }
  return poses;
}

std::vector<SensorPose> orbit_trajectory(const Eigen::Vector3d& center,
                                         double radius, std::int64_t period,
                                         std::int64_t scans, double rate_hz) {
  auto poses = static_trajectory(center, scans, rate_hz);
  for (auto& p : poses) {
    const double phase = 2.0 * std::numbers::pi *
                         static_cast<double>(p.scan_index % period) /
                         static_cast<double>(period);
    p.translation = center + radius * Eigen::Vector3d(std::cos(phase), std::sin(phase), 0.0);
    p.rotation = yaw_rotation(phase + std::numbers::pi / 2.0);
  }
  return poses;
}

std::vector<SensorPose> swing_trajectory(const Eigen::Vector3d& position,
                                         double amplitude_rad,
                                         std::int64_t period,
                                         std::int64_t scans, double rate_hz) {
  auto poses = static_trajectory(position, scans, rate_hz);
  for (auto& p : poses) {
    const double phase = 2.0 * std::numbers::pi *
                         static_cast<double>(p.scan_index % period) /
                         static_cast<double>(period);
    p.rotation = yaw_rotation(amplitude_rad * std::sin(phase));
  }
  return poses;
}

RenderedScan render_scan(const TrueTerrain& terrain, const VirtualSensor& sensor,
                         std::int64_t scan_index) {
  if (scan_index < 0 ||
      scan_index >= static_cast<std::int64_t>(sensor.trajectory.size())) {
    throw Error(ErrorCode::kIndexOutOfRange, "scan index beyond trajectory");
  }
  if (!(sensor.dust_rate >= 0.0 && sensor.dust_rate < 1.0) ||
      sensor.range_noise_sigma < 0.0 || sensor.azimuth_count < 1) {
    throw Error(ErrorCode::kInvalidSpec, "virtual sensor parameters");
  }
  const SensorPose& pose = sensor.trajectory[static_cast<std::size_t>(scan_index)];
  const Eigen::Matrix3d rotation = pose.rotation.toRotationMatrix();
  const std::size_t azimuths = static_cast<std::size_t>(sensor.azimuth_count);
  const std::size_t beams = azimuths * sensor.elevation_angles.size();

  // Three draws per beam in beam order, independent of which beams hit, so
  // the noise stream is reproducible however rendering is scheduled.
  struct BeamDraw {
    double dust_u;
    double dust_fraction;
    double noise;
  };
  std::vector<BeamDraw> draws(beams);
  std::seed_seq seq{static_cast<std::uint64_t>(sensor.seed),
                    static_cast<std::uint64_t>(scan_index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& d : draws) {
    d.dust_u = uniform(rng);
    d.dust_fraction = uniform(rng);
    d.noise = normal(rng);
  }

  struct Slot {
    bool valid = false;
    Eigen::Vector3d point;
    BeamReturn info;
  };
  std::vector<Slot> slots(beams);
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, beams, 256),
                    [&](const tbb::blocked_range<std::size_t>& range) {
    for (std::size_t b = range.begin(); b != range.end(); ++b) {
      const double azimuth = 2.0 * std::numbers::pi *
                             static_cast<double>(b % azimuths) /
                             static_cast<double>(azimuths);
      const double elevation = sensor.elevation_angles[b / azimuths];
      const Eigen::Vector3d dir_sensor(std::cos(elevation) * std::cos(azimuth),
                                       std::cos(elevation) * std::sin(azimuth),
                                       std::sin(elevation));
      const Eigen::Vector3d dir = rotation * dir_sensor;
      const auto hit = terrain.intersect(pose.translation, dir, sensor.max_range);
      if (!hit) continue;
      Slot& slot = slots[b];
      slot.valid = true;
      slot.info.terrain_range = hit->range;
      if (draws[b].dust_u < sensor.dust_rate) {
        slot.info.dust = true;
        slot.info.range = draws[b].dust_fraction * hit->range;
        slot.point = pose.translation + slot.info.range * dir;
      } else if (sensor.range_noise_sigma > 0.0) {
        slot.info.range = hit->range + sensor.range_noise_sigma * draws[b].noise;
        slot.point = pose.translation + slot.info.range * dir;
      } else {
        slot.info.range = hit->range;
        slot.point = hit->point;
      }
    }
  });

  RenderedScan out;
  out.pose = pose;
  out.beam_count = beams;
  out.scan.timestamp = pose.timestamp;
  const Eigen::Matrix3d to_sensor = rotation.transpose();
  for (const auto& slot : slots) {
    if (!slot.valid) continue;
    out.scan.points.push_back(to_sensor * (slot.point - pose.translation));
    out.scan.labels.push_back(PointLabel::kTerrain);
    out.returns.push_back(slot.info);
    if (slot.info.dust) ++out.dust_count;
  }
  return out;
}

TruthLog run_scenario(TrueTerrain terrain, const EventScript& script,
                      const VirtualSensor& sensor, std::int64_t n_scans,
                      const ScanSink& sink) {
  if (n_scans > static_cast<std::int64_t>(sensor.trajectory.size())) {
    throw Error(ErrorCode::kInvalidSpec, "trajectory shorter than scan count");
  }
  for (std::size_t i = 0; i < script.size(); ++i) {
    if (i > 0 && script[i].at_scan < script[i - 1].at_scan) {
      throw Error(ErrorCode::kInvalidSpec, "events must be ordered by at_scan");
    }
    if (script[i].at_scan < 0 || script[i].at_scan >= n_scans) {
      throw Error(ErrorCode::kInvalidSpec, "event scheduled outside the run");
    }
  }

  TruthLog log;
  double cumulative = 0.0;
  std::size_t next = 0;
  for (std::int64_t k = 0; k < n_scans; ++k) {
    while (next < script.size() && script[next].at_scan == k) {
      log.checkpoints.push_back({k - 1, cumulative, terrain});
      const double before = terrain.volume();
      terrain = apply_event(std::move(terrain), script[next]);
      const double removed = before - terrain.volume();
      cumulative += removed;
      log.events.push_back({script[next], removed, cumulative});
      ++next;
    }
    if (sink) sink(render_scan(terrain, sensor, k));
  }
  log.checkpoints.push_back({n_scans - 1, cumulative, terrain});
  return log;
}

}  // namespace terrain_hmm::sim
