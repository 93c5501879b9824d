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

#ifndef TERRAIN_HMM_TEXT_FORMAT_HPP
#define TERRAIN_HMM_TEXT_FORMAT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace terrain_hmm {

/// Locale-independent shortest form with at most 9 significant digits.
std::string format_number(double value);

/// Splits on `delimiter` without trimming.
std::vector<std::string_view> split(std::string_view line, char delimiter = ',');

std::string_view trim(std::string_view text);

/// Strict parsers: the whole (trimmed) field must be consumed.
bool parse_double(std::string_view field, double& value);
bool parse_int(std::string_view field, std::int64_t& value);

}  // namespace terrain_hmm

#endif  // TERRAIN_HMM_TEXT_FORMAT_HPP
