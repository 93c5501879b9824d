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

#include "terrain_hmm/terrain_map.hpp"

#include <numeric>
#include <random>
#include <sstream>

#include <tbb/global_control.h>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "test_helpers.hpp"

namespace terrain_hmm {
namespace {

// Observations at 2.0 m needed to move a cell that sits one-hot at 5.0 m,
// from the dense filter oracle with a_self 0.99, sigma = delta = 0.25 m,
// p_min 0.6.
constexpr int kScansToFlip = 3;

std::vector<HeightObservation> Obs(std::initializer_list<HeightObservation> list) {
  return list;
}

TEST(GlobalMapTest, InitMap) {
  const GlobalMap map = init_map(GridConfig{});
  EXPECT_EQ(map.state_count(), 81u);
  EXPECT_DOUBLE_EQ(map.transition().off_diagonal(), 0.000125);
  EXPECT_TRUE(map.snapshot().cells.empty());
  GridConfig bad;
  bad.h_max = bad.h_min;
  EXPECT_EQ(CodeOf([&] { init_map(bad); }), ErrorCode::kInvalidConfig);
}

TEST(GlobalMapTest, Survey) {
  const GridConfig cfg;
  const std::vector<SurveyPoint> survey{{{0, 0}, 5.0}, {{1, 0}, 5.10}};
  const auto map = GlobalMap::from_survey(cfg, survey);
  EXPECT_EQ(map.find({0, 0})->reported_state_index, 20u);
  EXPECT_EQ(map.find({1, 0})->reported_state_index, 20u);
  EXPECT_DOUBLE_EQ(map.find({0, 0})->state[20], 1.0);
  EXPECT_EQ(GlobalMap::from_survey(cfg, {}).size(), 0u);
  const std::vector<SurveyPoint> bad{{{0, 0}, 20.5}};
  EXPECT_EQ(CodeOf([&] { GlobalMap::from_survey(cfg, bad); }),
            ErrorCode::kOutOfRangeHeight);
}

TEST(GlobalMapTest, FirstObservationCreatesCell) {
  GlobalMap map(GridConfig{});
  const auto report = map.apply_observations(Obs({{{4, 7}, 2.9}}), 0);
  EXPECT_EQ(report.created, 1u);
  EXPECT_EQ(report.updated, 0u);
  const auto snap = map.snapshot();
  ASSERT_EQ(snap.cells.size(), 1u);
  EXPECT_DOUBLE_EQ(snap.cells[0].height, 3.0);
  EXPECT_DOUBLE_EQ(snap.cells[0].confidence, 1.0);
}

TEST(GlobalMapTest, ConsistentEvidenceHolds) {
  GlobalMap map(GridConfig{});
  // From one-hot the mass leaks to the other states until it settles at the
  // filter's fixed point, well above p_min.
  double previous = 1.0;
  for (int k = 0; k < 50; ++k) {
    map.apply_observations(Obs({{{0, 0}, 3.0}}), k);
    EXPECT_DOUBLE_EQ(map.snapshot().cells[0].height, 3.0);
    const double p = map.find({0, 0})->state[12];
    EXPECT_LE(p, previous + 1e-15);
    EXPECT_GT(p, 0.999);
    previous = p;
  }
}

TEST(GlobalMapTest, ResponsivenessOracleIsFrozen) {
  EXPECT_EQ(oracle::scans_to_flip(0, 0.25, 81, 0.25, 0.99, 0.6, 5.0, 2.0), kScansToFlip);
}

TEST(GlobalMapTest, ResponsivenessMatchesOracle) {
  const GridConfig cfg;
  const std::vector<SurveyPoint> survey{{{0, 0}, 5.0}};
  auto map = GlobalMap::from_survey(cfg, survey);
  int flipped_after = -1;
  for (int k = 1; k <= 50 && flipped_after < 0; ++k) {
    map.apply_observations(Obs({{{0, 0}, 2.0}}), k);
    const double h = map.snapshot().cells[0].height;
    if (h == 2.0) flipped_after = k;
    else EXPECT_DOUBLE_EQ(h, 5.0);
  }
  EXPECT_EQ(flipped_after, kScansToFlip);
}

TEST(GlobalMapTest, HeldStateBelowThreshold) {
  GridConfig cfg;
  // The filter's fixed point stays below this threshold, so the argmax can
  // move without the report following it.
  cfg.p_min = 0.99995;
  GlobalMap map(cfg);
  map.apply_observations(Obs({{{0, 0}, 3.0}}), 0);
  for (int k = 1; k <= 50; ++k) map.apply_observations(Obs({{{0, 0}, 3.25}}), k);
  const CellHmm* cell = map.find({0, 0});
  EXPECT_EQ(argmax(cell->state), 13u);
  EXPECT_LT(cell->confidence(), cfg.p_min);
  EXPECT_DOUBLE_EQ(map.snapshot().cells[0].height, 3.0);
}

TEST(GlobalMapTest, OutOfRangeSkipped) {
  GlobalMap map(GridConfig{});
  const auto report =
      map.apply_observations(Obs({{{0, 0}, -0.5}, {{1, 0}, 20.5}, {{2, 0}, 1.0}}), 0);
  EXPECT_EQ(report.skipped_out_of_range, 2u);
  EXPECT_EQ(map.size(), 1u);
}

TEST(GlobalMapTest, DuplicatesLastWins) {
  GlobalMap map(GridConfig{});
  const auto report = map.apply_observations(Obs({{{0, 0}, 1.0}, {{0, 0}, 4.0}}), 0);
  EXPECT_EQ(report.duplicate_observations, 1u);
  EXPECT_DOUBLE_EQ(map.snapshot().cells[0].height, 4.0);
}

TEST(GlobalMapTest, ScanOrderAndInitialization) {
  GridConfig cfg;
  cfg.m_init = 1000;
  GlobalMap map(cfg);
  map.apply_observations({}, 998);
  EXPECT_EQ(map.scan_counter(), 999);
  EXPECT_FALSE(map.is_initialized());
  map.apply_observations({}, 999);
  EXPECT_TRUE(map.is_initialized());
  EXPECT_EQ(CodeOf([&] { map.apply_observations({}, 5); }), ErrorCode::kOutOfOrderScan);
  cfg.m_init = 0;
  EXPECT_TRUE(GlobalMap(cfg).is_initialized());
}

TEST(GlobalMapTest, UnobservedCellsUntouchedAndNormalized) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> h(0.0, 20.0);
  std::uniform_int_distribution<int> cell(0, 30);
  GlobalMap map(GridConfig{});
  for (int k = 0; k < 100; ++k) {
    std::vector<HeightObservation> obs;
    for (int i = 0; i < 10; ++i) obs.push_back({{cell(rng), cell(rng)}, h(rng)});
    std::map<CellKey, StateVector> before;
    for (int x = 0; x <= 30; ++x) {
      for (int y = 0; y <= 30; ++y) {
        if (const auto* c = map.find({x, y})) before[{x, y}] = c->state;
      }
    }
    map.apply_observations(obs, k);
    for (const auto& [key, state] : before) {
      const bool observed = std::any_of(obs.begin(), obs.end(),
                                        [&](const auto& o) { return o.cell == key; });
      const auto& now = map.find(key)->state;
      if (!observed) EXPECT_EQ(now, state);
      EXPECT_NEAR(std::accumulate(now.begin(), now.end(), 0.0), 1.0, 1e-9);
    }
  }
}

TEST(GlobalMapTest, DeterministicAcrossParallelism) {
  auto run = [](int threads) {
    tbb::global_control limit(tbb::global_control::max_allowed_parallelism, threads);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> h(1.0, 4.0);
    GlobalMap map(GridConfig{});
    for (int k = 0; k < 20; ++k) {
      std::vector<HeightObservation> obs;
      for (int x = 0; x < 40; ++x) {
        for (int y = 0; y < 40; ++y) obs.push_back({{x, y}, h(rng)});
      }
      map.apply_observations(obs, k);
    }
    return map.snapshot();
  };
  EXPECT_EQ(run(1), run(4));
}

TEST(SnapshotTest, PureAndSorted) {
  GlobalMap map(GridConfig{});
  map.apply_observations(Obs({{{2, 0}, 1.0}, {{0, 5}, 2.0}, {{0, 1}, 3.0}}), 0);
  const auto a = map.snapshot(1.5);
  EXPECT_EQ(a, map.snapshot(1.5));
  ASSERT_EQ(a.cells.size(), 3u);
  EXPECT_EQ(a.cells[0].cell, (CellKey{0, 1}));
  EXPECT_EQ(a.cells[1].cell, (CellKey{0, 5}));
  EXPECT_EQ(a.cells[2].cell, (CellKey{2, 0}));
}

TEST(SnapshotTest, CsvRoundTrip) {
  GlobalMap map(GridConfig{});
  map.apply_observations(Obs({{{-3, 2}, 1.1}, {{4, 0}, 7.3}}), 0);
  map.apply_observations(Obs({{{4, 0}, 7.0}}), 1);
  const auto snap = map.snapshot(0.1);
  std::stringstream ss;
  write_snapshot_csv(ss, snap, 0.25);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "ix,iy,x_center,y_center,height,confidence");
  EXPECT_NE(ss.str().find("\n-3,2,-0.625,0.625,1,1\n"), std::string::npos);
  const auto back = read_snapshot_csv(ss, snap.scan_index, 0.1);
  ASSERT_EQ(back.cells.size(), snap.cells.size());
  for (std::size_t i = 0; i < back.cells.size(); ++i) {
    EXPECT_EQ(back.cells[i].cell, snap.cells[i].cell);
    EXPECT_EQ(back.cells[i].height, snap.cells[i].height);
    EXPECT_NEAR(back.cells[i].confidence, snap.cells[i].confidence, 1e-8);
  }
  std::stringstream bad("ix,iy,x_center,y_center,height,confidence\n1,2,3,4,x,1\n");
  EXPECT_EQ(CodeOf([&] { read_snapshot_csv(bad); }), ErrorCode::kMalformedRow);
}

}  // namespace
}  // namespace terrain_hmm
