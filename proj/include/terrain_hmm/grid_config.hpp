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

#ifndef TERRAIN_HMM_GRID_CONFIG_HPP
#define TERRAIN_HMM_GRID_CONFIG_HPP

#include <cstddef>
#include <cstdint>

namespace terrain_hmm {

/// Discretization and filter parameters shared by every cell of a map.
///
/// A single resolution `delta` is used for the (x, y) cell size, the voxel
/// edge length and the spacing of the height states. Defaults reproduce a
/// 0..20 m range at 0.25 m, i.e. 81 states with sigma equal to delta.
struct GridConfig {
  double h_min = 0.0;
  double h_max = 20.0;
  double delta = 0.25;
  double sigma = 0.25;
  double a_self = 0.99;
  double p_min = 0.6;
  std::int64_t m_init = 1000;
};

/// Throws Error{kInvalidConfig} describing the first violated constraint.
void validate(const GridConfig& cfg);

/// floor((h_max - h_min) / delta) + 1.
std::size_t num_states(const GridConfig& cfg);

/// Height of state `index`: h_min + index * delta.
double state_center(const GridConfig& cfg, std::size_t index);

/// Index of the state center closest to `h`, clamped into [0, n). Half-way
/// heights resolve to the lower index.
std::size_t nearest_state(const GridConfig& cfg, double h);

}  // namespace terrain_hmm

#endif  // TERRAIN_HMM_GRID_CONFIG_HPP
