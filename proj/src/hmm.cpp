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

#include "terrain_hmm/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "terrain_hmm/error.hpp"

namespace terrain_hmm {

namespace {

constexpr double kMinMass = 1e-300;

}  // namespace

TransitionMatrix::TransitionMatrix(std::size_t n, double a_self)
    : n_(n), a_self_(a_self) {
  if (n < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "transition matrix needs at least two states");
  }
  if (!(a_self > 0.0 && a_self < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "a_self must lie in (0, 1)");
  }
  delta_off_ = (1.0 - a_self) / static_cast<double>(n - 1);
}

void TransitionMatrix::apply(std::span<const double> x,
                             std::span<double> out) const {
  if (x.size() != n_ || out.size() != n_) {
    throw Error(ErrorCode::kInvalidArgument, "dimension mismatch");
  }
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  const double diag = a_self_ - delta_off_;
  const double shared = delta_off_ * total;
  for (std::size_t l = 0; l < n_; ++l) out[l] = diag * x[l] + shared;
}

TransitionMatrix build_transition_matrix(std::size_t n, double a_self) {
  return TransitionMatrix(n, a_self);
}

LikelihoodMatrix LikelihoodMatrix::from_densities(
    std::span<const double> densities) {
  std::vector<double> logs(densities.size());
  for (std::size_t l = 0; l < densities.size(); ++l) {
    if (!(densities[l] > 0.0) || !std::isfinite(densities[l])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "likelihood densities must be positive and finite");
    }
    logs[l] = std::log(densities[l]);
  }
  return LikelihoodMatrix(std::move(logs));
}

double LikelihoodMatrix::density(std::size_t l) const {
  return std::exp(log_density_.at(l));
}

std::size_t LikelihoodMatrix::argmax() const {
  return terrain_hmm::argmax(log_density_);
}

LikelihoodMatrix gaussian_likelihood(const GridConfig& cfg, double h) {
  if (!std::isfinite(h)) {
    throw Error(ErrorCode::kNonFiniteInput, "observed height is not finite");
  }
  const std::size_t n = num_states(cfg);
  const double log_norm =
      -std::log(cfg.sigma * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> logs(n);
  for (std::size_t l = 0; l < n; ++l) {
    const double z = (h - state_center(cfg, l)) / cfg.sigma;
    logs[l] = log_norm - 0.5 * z * z;
  }
  return LikelihoodMatrix(std::move(logs));
}

void hmm_filter_update_in_place(std::span<double> state,
                                const TransitionMatrix& transition,
                                const LikelihoodMatrix& likelihood) {
  const std::size_t n = transition.size();
  if (state.size() != n || likelihood.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "dimension mismatch");
  }
  const auto logs = likelihood.log_density();
  const double peak = *std::max_element(logs.begin(), logs.end());

  const double total = std::accumulate(state.begin(), state.end(), 0.0);
  const double diag = transition.a_self() - transition.off_diagonal();
  const double shared = transition.off_diagonal() * total;

  double mass = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    const double predicted = diag * state[l] + shared;
    state[l] = predicted * std::exp(logs[l] - peak);
    mass += state[l];
  }
  if (!(mass > kMinMass)) {
    throw Error(ErrorCode::kDegenerateLikelihood,
                "posterior mass vanished during update");
  }
  const double eta = 1.0 / mass;
  for (double& p : state) p *= eta;
}

StateVector hmm_filter_update(std::span<const double> prior,
                              const TransitionMatrix& transition,
                              const LikelihoodMatrix& likelihood) {
  StateVector out(prior.begin(), prior.end());
  hmm_filter_update_in_place(out, transition, likelihood);
  return out;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "argmax of empty vector");
  }
  // max_element returns the first maximum, which is the lowest index.
  return static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
}

CellHmm CellHmm::one_hot(std::size_t n, std::size_t index,
                         std::int64_t scan_index) {
  if (index >= n) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "state index " + std::to_string(index) + " out of range");
  }
  CellHmm cell;
  cell.state.assign(n, 0.0);
  cell.state[index] = 1.0;
  cell.reported_state_index = index;
  cell.last_update_scan = scan_index;
  cell.observation_count = 1;
  return cell;
}

double CellHmm::confidence() const {
  return state.empty() ? 0.0 : *std::max_element(state.begin(), state.end());
}

std::size_t report_state(CellHmm& cell, double p_min) {
  const std::size_t best = argmax(cell.state);
  if (cell.state[best] > p_min) cell.reported_state_index = best;
  return cell.reported_state_index;
}

}  // namespace terrain_hmm
