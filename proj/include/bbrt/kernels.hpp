// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

// Data-parallel inner loops. Each kernel exists twice: a plain serial loop
// kept as the reference and an OpenMP version. Both accumulate in the same
// order (per-row partials, rows summed serially), so their results are
// bit-identical regardless of thread count.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bbrt/metrics.hpp"
#include "bbrt/mol_graph.hpp"
#include "bbrt/oracle.hpp"
#include "bbrt/selfies.hpp"

namespace bbrt::kernels {

namespace serial {

std::vector<Fingerprint> fingerprints(std::span<const MolGraph> graphs, int radius);
std::vector<MolGraph> decode_all(std::span<const TokenSequence> seqs);
std::vector<double> evaluate(const PropertyOracle& oracle, std::span<const MolGraph> graphs);
std::vector<double> similarities_to(const Fingerprint& query, std::span<const Fingerprint> fps);
// Sum over unordered pairs i < j of (1 - tanimoto).
double pairwise_distance_sum(std::span<const Fingerprint> fps);
// min_dist[i] = min(min_dist[i], 1 - tanimoto(picked, fps[i])).
void update_min_distance(const Fingerprint& picked, std::span<const Fingerprint> fps, std::span<double> min_dist);

}  // namespace serial

namespace parallel {

std::vector<Fingerprint> fingerprints(std::span<const MolGraph> graphs, int radius);
std::vector<MolGraph> decode_all(std::span<const TokenSequence> seqs);
std::vector<double> evaluate(const PropertyOracle& oracle, std::span<const MolGraph> graphs);
std::vector<double> similarities_to(const Fingerprint& query, std::span<const Fingerprint> fps);
double pairwise_distance_sum(std::span<const Fingerprint> fps);
void update_min_distance(const Fingerprint& picked, std::span<const Fingerprint> fps, std::span<double> min_dist);

}  // namespace parallel

// Number of OpenMP threads available (1 without OpenMP).
int max_threads() noexcept;

}  // namespace bbrt::kernels
