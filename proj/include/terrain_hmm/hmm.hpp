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

#ifndef TERRAIN_HMM_HMM_HPP
#define TERRAIN_HMM_HMM_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "terrain_hmm/grid_config.hpp"

namespace terrain_hmm {

/// Posterior over the n discrete height states of one cell.
using StateVector = std::vector<double>;

/// The n x n transition matrix with `a_self` on the diagonal and
/// (1 - a_self) / (n - 1) everywhere else. Symmetric and doubly stochastic,
/// so only the two distinct values are stored.
class TransitionMatrix {
 public:
  TransitionMatrix(std::size_t n, double a_self);

  std::size_t size() const { return n_; }
  double a_self() const { return a_self_; }
  double off_diagonal() const { return delta_off_; }
  double operator()(std::size_t row, std::size_t col) const {
    return row == col ? a_self_ : delta_off_;
  }

  /// out = A * x in O(n) using A x = (a_self - delta) x + delta * sum(x).
  void apply(std::span<const double> x, std::span<double> out) const;

 private:
  std::size_t n_;
  double a_self_;
  double delta_off_;
};

TransitionMatrix build_transition_matrix(std::size_t n, double a_self);

/// Diagonal of the observation likelihood matrix B.
///
/// Densities are held as logarithms: with sigma = 0.25 m the states at the far
/// end of a 20 m range sit thousands of sigma away and their densities do not
/// fit in a double. The filter rescales by the maximum before exponentiating.
class LikelihoodMatrix {
 public:
  LikelihoodMatrix() = default;
  explicit LikelihoodMatrix(std::vector<double> log_density)
      : log_density_(std::move(log_density)) {}

  /// Builds from plain densities; every entry must be > 0 and finite.
  static LikelihoodMatrix from_densities(std::span<const double> densities);

  std::size_t size() const { return log_density_.size(); }
  std::span<const double> log_density() const { return log_density_; }
  /// May underflow to 0 for far states; use log_density() for comparisons.
  double density(std::size_t l) const;
  /// Lowest index among the maximal entries.
  std::size_t argmax() const;

 private:
  std::vector<double> log_density_;
};

/// diag[l] = N(h | state_center(l), sigma). Throws kNonFiniteInput.
LikelihoodMatrix gaussian_likelihood(const GridConfig& cfg, double h);

/// x_k = eta * B * A * x_{k-1}. Returns the normalized posterior.
StateVector hmm_filter_update(std::span<const double> prior,
                              const TransitionMatrix& transition,
                              const LikelihoodMatrix& likelihood);

/// In-place form of hmm_filter_update; `state` is overwritten.
void hmm_filter_update_in_place(std::span<double> state,
                                const TransitionMatrix& transition,
                                const LikelihoodMatrix& likelihood);

/// Index of the maximum entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

struct CellHmm {
  StateVector state;
  std::size_t reported_state_index = 0;
  std::int64_t last_update_scan = 0;
  std::int64_t observation_count = 0;

  /// A cell created from its first measurement: all mass on `index`.
  static CellHmm one_hot(std::size_t n, std::size_t index,
                         std::int64_t scan_index);

  double confidence() const;
};

/// Moves the reported state to argmax(state) only when max(state) > p_min,
/// otherwise keeps the previous report. Returns the (possibly new) report.
std::size_t report_state(CellHmm& cell, double p_min);

}  // namespace terrain_hmm

#endif  // TERRAIN_HMM_HMM_HPP
