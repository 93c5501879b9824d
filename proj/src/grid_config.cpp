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

#include "terrain_hmm/grid_config.hpp"

#include <cmath>
#include <string>

#include "terrain_hmm/error.hpp"

namespace terrain_hmm {

namespace {

// Absorbs representation error in ratios such as 0.3 / 0.1.
constexpr double kRatioSlack = 1e-9;

double state_span(const GridConfig& cfg) {
  return (cfg.h_max - cfg.h_min) / cfg.delta;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kIndexOutOfRange: return "index-out-of-range";
    case ErrorCode::kNonFiniteInput: return "non-finite-input";
    case ErrorCode::kDegenerateLikelihood: return "degenerate-likelihood";
    case ErrorCode::kInvalidPose: return "invalid-pose";
    case ErrorCode::kOutOfRangeHeight: return "out-of-range-height";
    case ErrorCode::kOutOfOrderScan: return "out-of-order-scan";
    case ErrorCode::kBaselineOutOfRange: return "baseline-out-of-range";
    case ErrorCode::kTooFewSnapshots: return "too-few-snapshots";
    case ErrorCode::kInvalidSpec: return "invalid-spec";
    case ErrorCode::kRangeViolation: return "range-violation";
    case ErrorCode::kMissingPose: return "missing-pose";
    case ErrorCode::kMalformedRow: return "malformed-row";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

void validate(const GridConfig& cfg) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidConfig, what);
  };
  if (!std::isfinite(cfg.h_min) || !std::isfinite(cfg.h_max) ||
      !(cfg.h_max > cfg.h_min)) {
    fail("h_max must be greater than h_min");
  }
  if (!(cfg.delta > 0.0) || !std::isfinite(cfg.delta)) {
    fail("delta must be positive");
  }
  if (!(cfg.sigma > 0.0) || !std::isfinite(cfg.sigma)) {
    fail("sigma must be positive");
  }
  if (!(cfg.a_self > 0.0 && cfg.a_self < 1.0)) {
    fail("a_self must lie in (0, 1)");
  }
  if (!(cfg.p_min > 0.0 && cfg.p_min < 1.0)) {
    fail("p_min must lie in (0, 1)");
  }
  if (cfg.m_init < 0) {
    fail("m_init must be non-negative");
  }
  if (std::floor(state_span(cfg) + kRatioSlack) < 1.0) {
    fail("height range must hold at least two states");
  }
}

std::size_t num_states(const GridConfig& cfg) {
  if (!(cfg.h_max > cfg.h_min)) {
    throw Error(ErrorCode::kInvalidConfig, "h_max must be greater than h_min");
  }
  if (!(cfg.delta > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "delta must be positive");
  }
  return static_cast<std::size_t>(std::floor(state_span(cfg) + kRatioSlack)) +
         1;
}

double state_center(const GridConfig& cfg, std::size_t index) {
  if (index >= num_states(cfg)) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "state index " + std::to_string(index) + " out of range");
  }
  return cfg.h_min + static_cast<double>(index) * cfg.delta;
}

std::size_t nearest_state(const GridConfig& cfg, double h) {
  const std::size_t n = num_states(cfg);
  const double q = std::ceil((h - cfg.h_min) / cfg.delta - 0.5);
  if (!(q > 0.0)) return 0;  // also catches NaN
  if (q >= static_cast<double>(n - 1)) return n - 1;
  return static_cast<std::size_t>(q);
}

}  // namespace terrain_hmm
