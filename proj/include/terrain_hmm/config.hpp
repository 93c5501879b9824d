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

#ifndef TERRAIN_HMM_CONFIG_HPP
#define TERRAIN_HMM_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "terrain_hmm/error.hpp"
#include "terrain_hmm/grid_config.hpp"
#include "terrain_hmm/observation.hpp"

namespace terrain_hmm {

/// One `key = value` line. `#` starts a comment; keys may repeat.
struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Throws kInvalidSpec for lines without '='.
std::vector<KeyValue> parse_key_values(std::istream& in);

/// Whitespace-separated numbers of `kv.value`, exactly `count` of them.
/// Throws `error` naming the key.
std::vector<double> parse_numbers(const KeyValue& kv, std::size_t count,
                                  ErrorCode error);
double parse_number(const KeyValue& kv, ErrorCode error);
std::int64_t parse_integer(const KeyValue& kv, ErrorCode error);

struct RunConfig {
  GridConfig grid;
  std::int64_t stride = 10;
  std::int64_t snapshot_every = 100;
  std::int64_t window = 1000;
  std::int64_t baseline = -1;  // snapshot index; -1 picks the first initialized
  std::int32_t threads = 0;    // 0 leaves the scheduler default
  std::vector<ExclusionBox> exclusion_boxes;
  std::filesystem::path dataset;
  std::filesystem::path out = "out";
};

/// Applies the keys of a config file on top of `base`. Throws kInvalidConfig
/// naming the offending key.
RunConfig parse_run_config(std::istream& in, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// Checks stride/window/snapshot_every and the grid. Throws kInvalidConfig.
void validate(const RunConfig& cfg);

}  // namespace terrain_hmm

#endif  // TERRAIN_HMM_CONFIG_HPP
