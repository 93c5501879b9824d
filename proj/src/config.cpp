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

#include "terrain_hmm/config.hpp"

#include <fstream>
#include <istream>
#include <sstream>

#include "terrain_hmm/text_format.hpp"

namespace terrain_hmm {

namespace {

[[noreturn]] void bad_value(const KeyValue& kv, ErrorCode error,
                            const std::string& why) {
  throw Error(error, "line " + std::to_string(kv.line) + ": key '" + kv.key +
                         "' " + why + " (got '" + kv.value + "')");
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::istream& in) {
  std::vector<KeyValue> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidSpec,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    out.push_back({std::string(trim(line.substr(0, eq))),
                   std::string(trim(line.substr(eq + 1))), line_no});
  }
  return out;
}

std::vector<double> parse_numbers(const KeyValue& kv, std::size_t count,
                                  ErrorCode error) {
  std::istringstream fields(kv.value);
  std::vector<double> values;
  std::string token;
  while (fields >> token) {
    double v = 0.0;
    if (!parse_double(token, v)) bad_value(kv, error, "expects numbers");
    values.push_back(v);
  }
  if (values.size() != count) {
    bad_value(kv, error, "expects " + std::to_string(count) + " numbers");
  }
  return values;
}

double parse_number(const KeyValue& kv, ErrorCode error) {
  return parse_numbers(kv, 1, error).front();
}

std::int64_t parse_integer(const KeyValue& kv, ErrorCode error) {
  std::int64_t v = 0;
  if (!parse_int(kv.value, v)) bad_value(kv, error, "expects an integer");
  return v;
}

RunConfig parse_run_config(std::istream& in, RunConfig cfg) {
  constexpr auto kErr = ErrorCode::kInvalidConfig;
  for (const auto& kv : parse_key_values(in)) {
    const std::string& k = kv.key;
    if (k == "h_min") {
      cfg.grid.h_min = parse_number(kv, kErr);
    } else if (k == "h_max") {
      cfg.grid.h_max = parse_number(kv, kErr);
    } else if (k == "delta") {
      cfg.grid.delta = parse_number(kv, kErr);
    } else if (k == "sigma") {
      cfg.grid.sigma = parse_number(kv, kErr);
    } else if (k == "a_self") {
      cfg.grid.a_self = parse_number(kv, kErr);
    } else if (k == "p_min") {
      cfg.grid.p_min = parse_number(kv, kErr);
    } else if (k == "m_init") {
      cfg.grid.m_init = parse_integer(kv, kErr);
    } else if (k == "stride") {
      cfg.stride = parse_integer(kv, kErr);
    } else if (k == "snapshot_every") {
      cfg.snapshot_every = parse_integer(kv, kErr);
    } else if (k == "window") {
      cfg.window = parse_integer(kv, kErr);
    } else if (k == "baseline") {
      cfg.baseline = parse_integer(kv, kErr);
    } else if (k == "threads") {
      cfg.threads = static_cast<std::int32_t>(parse_integer(kv, kErr));
    } else if (k == "exclusion_box") {
      const auto v = parse_numbers(kv, 6, kErr);
      cfg.exclusion_boxes.push_back(
          {Eigen::Vector3d(v[0], v[1], v[2]), Eigen::Vector3d(v[3], v[4], v[5])});
    } else if (k == "dataset") {
      cfg.dataset = kv.value;
    } else if (k == "out") {
      cfg.out = kv.value;
    } else {
      bad_value(kv, kErr, "is not a known setting");
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  }
  return parse_run_config(in, std::move(base));
}

void validate(const RunConfig& cfg) {
  validate(cfg.grid);
  if (cfg.stride < 1) throw Error(ErrorCode::kInvalidConfig, "stride must be >= 1");
  if (cfg.window < 1) throw Error(ErrorCode::kInvalidConfig, "window must be >= 1");
  if (cfg.snapshot_every < 1) {
    throw Error(ErrorCode::kInvalidConfig, "snapshot_every must be >= 1");
  }
  for (const auto& box : cfg.exclusion_boxes) {
    if ((box.min.array() > box.max.array()).any()) {
      throw Error(ErrorCode::kInvalidConfig, "exclusion_box min exceeds max");
    }
  }
}

}  // namespace terrain_hmm
