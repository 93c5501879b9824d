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

#ifndef TERRAIN_HMM_VOXEL_TRAVERSAL_HPP
#define TERRAIN_HMM_VOXEL_TRAVERSAL_HPP

#include <array>
#include <cstdint>
#include <cstdlib>
#include <limits>

#include <Eigen/Core>

#include "terrain_hmm/keys.hpp"

namespace terrain_hmm {

/// Walks the voxels pierced by the segment start -> end (Amanatides & Woo),
/// calling visit(key) for each in order, start voxel first and the voxel
/// containing `end` last.
///
/// The step budget per axis is fixed by the index difference between the two
/// end voxels, so the walk always terminates exactly in voxel_key(end) even
/// when rounding makes a boundary crossing ambiguous. Returns the number of
/// voxels visited.
template <typename Visitor>
std::size_t traverse_voxels(const Eigen::Vector3d& start,
                            const Eigen::Vector3d& end, double delta,
                            Visitor&& visit) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  VoxelKey current = voxel_key(start, delta);
  const VoxelKey last = voxel_key(end, delta);
  const Eigen::Vector3d dir = end - start;

  std::array<std::int32_t, 3> step{};
  std::array<std::int64_t, 3> remaining{};
  std::array<double, 3> t_max{kInf, kInf, kInf};
  std::array<double, 3> t_delta{kInf, kInf, kInf};
  for (int a = 0; a < 3; ++a) {
    const std::int64_t diff =
        static_cast<std::int64_t>(last[a]) - static_cast<std::int64_t>(current[a]);
    remaining[a] = std::llabs(diff);
    if (diff == 0) continue;
    step[a] = diff > 0 ? 1 : -1;
    const double boundary =
        static_cast<double>(current[a] + (step[a] > 0 ? 1 : 0)) * delta;
    t_max[a] = (boundary - start[a]) / dir[a];
    t_delta[a] = delta / std::abs(dir[a]);
  }

  std::size_t visited = 1;
  visit(current);
  while (remaining[0] + remaining[1] + remaining[2] > 0) {
    int axis = 0;
    if (t_max[1] < t_max[axis]) axis = 1;
    if (t_max[2] < t_max[axis]) axis = 2;
    current[axis] += step[axis];
    if (--remaining[axis] == 0) {
      t_max[axis] = kInf;
    } else {
      t_max[axis] += t_delta[axis];
    }
    visit(current);
    ++visited;
  }
  return visited;
}

}  // namespace terrain_hmm

#endif  // TERRAIN_HMM_VOXEL_TRAVERSAL_HPP
