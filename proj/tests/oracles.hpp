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

// Straightforward reference implementations used as test oracles. They share
// no code with the engine beyond plain data types.

#ifndef TERRAIN_HMM_TESTS_ORACLES_HPP
#define TERRAIN_HMM_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "terrain_hmm/keys.hpp"
#include "terrain_hmm/observation.hpp"

namespace terrain_hmm::oracle {

/// eta * diag(b) * A * x with A materialized as a dense n x n matrix.
inline std::vector<double> dense_filter_update(const std::vector<double>& x,
                                               double a_self,
                                               const std::vector<double>& b) {
  const auto n = static_cast<Eigen::Index>(x.size());
  const double off = (1.0 - a_self) / static_cast<double>(n - 1);
  Eigen::MatrixXd A = Eigen::MatrixXd::Constant(n, n, off);
  A.diagonal().setConstant(a_self);
  const Eigen::VectorXd prior = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
  const Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(b.data(), n);
  Eigen::VectorXd post = diag.asDiagonal() * (A * prior);
  post /= post.sum();
  return {post.data(), post.data() + n};
}

inline std::vector<double> gaussian_densities(double h_min, double delta,
                                              std::size_t n, double sigma,
                                              double h) {
  std::vector<double> b(n);
  for (std::size_t l = 0; l < n; ++l) {
    const double c = h_min + static_cast<double>(l) * delta;
    b[l] = std::exp(-(h - c) * (h - c) / (2.0 * sigma * sigma)) /
           (sigma * std::sqrt(2.0 * std::numbers::pi));
  }
  return b;
}

/// Consecutive observations at `h_to` needed before a cell that starts
/// one-hot at `h_from` reports the state of `h_to`, iterating the dense
/// filter and the threshold rule. Returns -1 if it never flips in `limit`.
inline int scans_to_flip(double h_min, double delta, std::size_t n, double sigma,
                         double a_self, double p_min, double h_from, double h_to,
                         int limit = 10000) {
  const auto from = static_cast<std::size_t>(std::lround((h_from - h_min) / delta));
  const auto to = static_cast<std::size_t>(std::lround((h_to - h_min) / delta));
  std::vector<double> x(n, 0.0);
  x[from] = 1.0;
  std::size_t reported = from;
  const auto b = gaussian_densities(h_min, delta, n, sigma, h_to);
  for (int k = 1; k <= limit; ++k) {
    x = dense_filter_update(x, a_self, b);
    std::size_t best = 0;
    for (std::size_t l = 1; l < n; ++l) {
      if (x[l] > x[best]) best = l;
    }
    if (x[best] > p_min) reported = best;
    if (reported == to) return k;
  }
  return -1;
}

inline VoxelKey key_of(const Eigen::Vector3d& p, double delta) {
  return {static_cast<std::int32_t>(std::floor(p.x() / delta)),
          static_cast<std::int32_t>(std::floor(p.y() / delta)),
          static_cast<std::int32_t>(std::floor(p.z() / delta))};
}

/// Voxels containing the points start + t * (end - start) for t sampled at
/// arc-length steps of `step`, plus the end point itself.
inline std::set<VoxelKey> sampled_voxels(const Eigen::Vector3d& start,
                                         const Eigen::Vector3d& end, double delta,
                                         double step) {
  std::set<VoxelKey> out;
  const double length = (end - start).norm();
  const auto samples = static_cast<std::int64_t>(std::floor(length / step));
  for (std::int64_t i = 0; i <= samples; ++i) {
    const double t = length > 0.0 ? static_cast<double>(i) * step / length : 0.0;
    out.insert(key_of(start + t * (end - start), delta));
  }
  out.insert(key_of(end, delta));
  return out;
}

/// Length of the part of segment start -> end inside the closed box of `key`.
inline double chord_length(const Eigen::Vector3d& start, const Eigen::Vector3d& end,
                           const VoxelKey& key, double delta) {
  const Eigen::Vector3d d = end - start;
  double t0 = 0.0;
  double t1 = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double lo = key[a] * delta;
    const double hi = (key[a] + 1) * delta;
    if (d[a] == 0.0) {
      if (start[a] < lo || start[a] >= hi) return 0.0;
      continue;
    }
    double ta = (lo - start[a]) / d[a];
    double tb = (hi - start[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t1 > t0 ? (t1 - t0) * d.norm() : 0.0;
}

/// Every voxel in the segment's bounding box that the segment crosses with a
/// chord of positive length, plus the voxels holding both end points.
inline std::set<VoxelKey> slab_voxels(const Eigen::Vector3d& start,
                                      const Eigen::Vector3d& end, double delta) {
  const VoxelKey a = key_of(start, delta);
  const VoxelKey b = key_of(end, delta);
  std::set<VoxelKey> out{a, b};
  for (std::int32_t x = std::min(a.ix, b.ix); x <= std::max(a.ix, b.ix); ++x) {
    for (std::int32_t y = std::min(a.iy, b.iy); y <= std::max(a.iy, b.iy); ++y) {
      for (std::int32_t z = std::min(a.iz, b.iz); z <= std::max(a.iz, b.iz); ++z) {
        const VoxelKey k{x, y, z};
        if (chord_length(start, end, k, delta) > 0.0) out.insert(k);
      }
    }
  }
  return out;
}

/// Column reduction written out state by state: lay the column out as a
/// dense array over its iz range, then climb from the bottom.
inline std::optional<double> reduce_column(const ColumnObservation& column) {
  if (column.entries.empty()) return std::nullopt;
  enum class Slot { kUnseen, kFree, kOccupied };
  std::map<std::int32_t, std::pair<Slot, double>> slots;
  for (const auto& e : column.entries) {
    slots[e.iz] = {e.occupancy == Occupancy::kOccupied ? Slot::kOccupied : Slot::kFree,
                   e.max_z.value_or(0.0)};
  }
  const std::int32_t lo = slots.begin()->first;
  const std::int32_t hi = slots.rbegin()->first;
  std::vector<std::pair<Slot, double>> dense(static_cast<std::size_t>(hi - lo + 1),
                                             {Slot::kUnseen, 0.0});
  for (const auto& [iz, slot] : slots) dense[static_cast<std::size_t>(iz - lo)] = slot;
  if (dense[0].first != Slot::kOccupied) return std::nullopt;
  double height = dense[0].second;
  for (std::size_t i = 1; i < dense.size() && dense[i].first == Slot::kOccupied; ++i) {
    height = dense[i].second;
  }
  return height;
}

}  // namespace terrain_hmm::oracle

#endif  // TERRAIN_HMM_TESTS_ORACLES_HPP
