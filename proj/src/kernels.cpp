// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/kernels.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bbrt::kernels {

namespace {

// Row i of the upper triangle; shared by both variants so the per-row
// accumulation order is identical.
double row_distance_sum(std::span<const Fingerprint> fps, std::size_t i) {
  double s = 0.0;
  for (std::size_t j = i + 1; j < fps.size(); ++j) s += 1.0 - tanimoto(fps[i], fps[j]);
  return s;
}

double sum_rows(const std::vector<double>& rows) {
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

}  // namespace

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

std::vector<Fingerprint> fingerprints(std::span<const MolGraph> graphs, int radius) {
  std::vector<Fingerprint> out;
  out.reserve(graphs.size());
  for (const MolGraph& g : graphs) out.push_back(morgan_fingerprint(g, radius));
  return out;
}

std::vector<MolGraph> decode_all(std::span<const TokenSequence> seqs) {
  std::vector<MolGraph> out;
  out.reserve(seqs.size());
  for (const auto& s : seqs) out.push_back(decode(s));
  return out;
}

std::vector<double> evaluate(const PropertyOracle& oracle, std::span<const MolGraph> graphs) {
  std::vector<double> out;
  out.reserve(graphs.size());
  for (const MolGraph& g : graphs) out.push_back(oracle.evaluate(g));
  return out;
}

std::vector<double> similarities_to(const Fingerprint& query, std::span<const Fingerprint> fps) {
  std::vector<double> out;
  out.reserve(fps.size());
  for (const auto& fp : fps) out.push_back(tanimoto(query, fp));
  return out;
}

double pairwise_distance_sum(std::span<const Fingerprint> fps) {
  std::vector<double> rows(fps.size(), 0.0);
  for (std::size_t i = 0; i < fps.size(); ++i) rows[i] = row_distance_sum(fps, i);
  return sum_rows(rows);
}

void update_min_distance(const Fingerprint& picked, std::span<const Fingerprint> fps, std::span<double> min_dist) {
  for (std::size_t i = 0; i < fps.size(); ++i) {
    const double d = 1.0 - tanimoto(picked, fps[i]);
    if (d < min_dist[i]) min_dist[i] = d;
  }
}

}  // namespace serial

namespace parallel {

std::vector<Fingerprint> fingerprints(std::span<const MolGraph> graphs, int radius) {
  std::vector<Fingerprint> out(graphs.size());
  const auto n = static_cast<std::int64_t>(graphs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) out[i] = morgan_fingerprint(graphs[i], radius);
  return out;
}

std::vector<MolGraph> decode_all(std::span<const TokenSequence> seqs) {
  std::vector<MolGraph> out(seqs.size());
  const auto n = static_cast<std::int64_t>(seqs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) out[i] = decode(seqs[i]);
  return out;
}

std::vector<double> evaluate(const PropertyOracle& oracle, std::span<const MolGraph> graphs) {
  std::vector<double> out(graphs.size());
  const auto n = static_cast<std::int64_t>(graphs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) out[i] = oracle.evaluate(graphs[i]);
  return out;
}

std::vector<double> similarities_to(const Fingerprint& query, std::span<const Fingerprint> fps) {
  std::vector<double> out(fps.size());
  const auto n = static_cast<std::int64_t>(fps.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = tanimoto(query, fps[i]);
  return out;
}

double pairwise_distance_sum(std::span<const Fingerprint> fps) {
  std::vector<double> rows(fps.size(), 0.0);
  const auto n = static_cast<std::int64_t>(fps.size());
  // Row lengths shrink linearly; dynamic scheduling balances the triangle.
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) rows[i] = row_distance_sum(fps, static_cast<std::size_t>(i));
  return sum_rows(rows);
}

void update_min_distance(const Fingerprint& picked, std::span<const Fingerprint> fps, std::span<double> min_dist) {
  const auto n = static_cast<std::int64_t>(fps.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = 1.0 - tanimoto(picked, fps[i]);
    if (d < min_dist[i]) min_dist[i] = d;
  }
}

}  // namespace parallel

}  // namespace bbrt::kernels
