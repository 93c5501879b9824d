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

#ifndef TERRAIN_HMM_KEYS_HPP
#define TERRAIN_HMM_KEYS_HPP

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>

#include <Eigen/Core>

namespace terrain_hmm {

/// (x, y) index of a grid cell: floor(x / delta), floor(y / delta).
struct CellKey {
  std::int32_t ix = 0;
  std::int32_t iy = 0;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

/// Voxel index at resolution delta; half-open [i*delta, (i+1)*delta) per axis.
struct VoxelKey {
  std::int32_t ix = 0;
  std::int32_t iy = 0;
  std::int32_t iz = 0;

  CellKey cell() const { return {ix, iy}; }
  std::int32_t operator[](int axis) const {
    return axis == 0 ? ix : (axis == 1 ? iy : iz);
  }
  std::int32_t& operator[](int axis) {
    return axis == 0 ? ix : (axis == 1 ? iy : iz);
  }

  friend auto operator<=>(const VoxelKey&, const VoxelKey&) = default;
};

inline std::int32_t voxel_index(double coordinate, double delta) {
  return static_cast<std::int32_t>(std::floor(coordinate / delta));
}

inline VoxelKey voxel_key(const Eigen::Vector3d& p, double delta) {
  return {voxel_index(p.x(), delta), voxel_index(p.y(), delta),
          voxel_index(p.z(), delta)};
}

inline CellKey cell_key(double x, double y, double delta) {
  return {voxel_index(x, delta), voxel_index(y, delta)};
}

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    const auto packed = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.ix)) << 32) |
                        static_cast<std::uint32_t>(k.iy);
    return std::hash<std::uint64_t>{}(packed * 0x9E3779B97F4A7C15ULL);
  }
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint32_t>(k.ix);
    h = h * 73856093ULL ^ static_cast<std::uint32_t>(k.iy) * 19349663ULL;
    h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(k.iz) * 83492791ULL;
    return std::hash<std::uint64_t>{}(h);
  }
};

}  // namespace terrain_hmm

#endif  // TERRAIN_HMM_KEYS_HPP
