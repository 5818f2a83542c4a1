// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bbrt/engine.hpp"

namespace bbrt {

struct RankCorrelation {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided, Student-t approximation with n - 2 dof
};

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

// Spearman rho as the Pearson correlation of average ranks. rho is NaN and
// p is 1 when either side is constant. Throws LengthMismatch / TooFewItems.
RankCorrelation rank_correlation(std::span<const double> xs, std::span<const double> ys);

// Token edit distances along a trace: winner vs its source, and the mean
// over all candidates vs the source.
struct EditDistanceStats {
  std::size_t iteration = 0;
  std::size_t winner_distance = 0;
  double mean_candidate_distance = 0.0;
};

std::vector<EditDistanceStats> edit_distance_series(const SeedTrace& trace);

}  // namespace bbrt
