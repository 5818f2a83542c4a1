// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "bbrt/error.hpp"
#include "bbrt/metrics.hpp"

namespace bbrt {

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

RankCorrelation rank_correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "rank_correlation: " + std::to_string(xs.size()) + " vs " + std::to_string(ys.size()) + " values");
  }
  if (xs.size() < 3) throw Error(ErrorCode::kTooFewItems, "rank_correlation needs at least 3 pairs");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  RankCorrelation out;
  if (sxx == 0.0 || syy == 0.0) {
    out.rho = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double dof = n - 2.0;
  if (std::abs(out.rho) >= 1.0) {
    out.p_value = 0.0;
  } else if (dof > 0.0) {
    const double t = out.rho * std::sqrt(dof / (1.0 - out.rho * out.rho));
    boost::math::students_t dist(dof);
    out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  }
  return out;
}

std::vector<EditDistanceStats> edit_distance_series(const SeedTrace& trace) {
  std::vector<EditDistanceStats> out;
  for (const auto& step : trace.steps) {
    const auto& b = step.batch;
    EditDistanceStats s;
    s.iteration = b.iteration;
    s.winner_distance = levenshtein(b.source, step.winner().seq.tokens);
    double sum = 0.0;
    for (const auto& c : b.candidates) sum += static_cast<double>(levenshtein(b.source, c.seq.tokens));
    s.mean_candidate_distance = b.candidates.empty() ? 0.0 : sum / static_cast<double>(b.candidates.size());
    out.push_back(s);
  }
  return out;
}

}  // namespace bbrt
