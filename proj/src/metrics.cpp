// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/metrics.hpp"

#include <algorithm>
#include <array>

#include "bbrt/error.hpp"
#include "bbrt/kernels.hpp"

namespace bbrt {

std::uint32_t hash_words(std::span<const std::uint32_t> words) noexcept {
  std::uint32_t h = 2166136261u;
  auto feed = [&h](std::uint32_t w) {
    for (int k = 0; k < 4; ++k) {
      h ^= (w >> (8 * k)) & 0xffu;
      h *= 16777619u;
    }
  };
  feed(kFingerprintHashSeed);
  for (std::uint32_t w : words) feed(w);
  return h;
}

Fingerprint morgan_fingerprint(const MolGraph& g, int radius) {
  if (radius < 0 || radius > 4) throw Error(ErrorCode::kInvalidArgument, "fingerprint radius must be in [0, 4]");
  Fingerprint fp;
  fp.radius = radius;
  fp.graph_size = g.atom_count();
  const std::size_t n = g.atom_count();
  if (n == 0) return fp;

  std::vector<std::uint32_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Atom& a = g.atoms()[i];
    const std::array<std::uint32_t, 4> inv{static_cast<std::uint32_t>(a.element), static_cast<std::uint32_t>(g.degree(i)),
                                           static_cast<std::uint32_t>(a.implicit_h),
                                           static_cast<std::uint32_t>(g.bond_order_sum(i))};
    ids[i] = hash_words(inv);
  }
  std::vector<std::uint32_t> features(ids);

  std::vector<std::uint32_t> next(n);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> env;
  std::vector<std::uint32_t> words;
  for (int r = 1; r <= radius; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      env.clear();
      for (const auto& nb : g.neighbors(i)) env.emplace_back(static_cast<std::uint32_t>(nb.order), ids[nb.atom]);
      std::sort(env.begin(), env.end());
      words.clear();
      words.push_back(ids[i]);
      for (const auto& [order, id] : env) {
        words.push_back(order);
        words.push_back(id);
      }
      next[i] = hash_words(words);
    }
    ids.swap(next);
    features.insert(features.end(), ids.begin(), ids.end());
  }
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());
  fp.features = std::move(features);
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.radius != b.radius) throw Error(ErrorCode::kRadiusMismatch, "fingerprint radii differ");
  if (a.features.empty() && b.features.empty()) return 1.0;
  std::size_t common = 0;
  auto i = a.features.begin();
  auto j = b.features.begin();
  while (i != a.features.end() && j != b.features.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = a.features.size() + b.features.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

double diversity(std::span<const Fingerprint> fps) {
  if (fps.size() < 2) throw Error(ErrorCode::kTooFewItems, "diversity needs at least two items");
  for (const auto& fp : fps) {
    if (fp.radius != fps.front().radius) throw Error(ErrorCode::kRadiusMismatch, "fingerprint radii differ");
  }
  const double n = static_cast<double>(fps.size());
  return kernels::parallel::pairwise_distance_sum(fps) / (n * (n - 1.0) / 2.0);
}

double diversity(std::span<const MolGraph> graphs, int radius) {
  if (graphs.size() < 2) throw Error(ErrorCode::kTooFewItems, "diversity needs at least two items");
  const auto fps = kernels::parallel::fingerprints(graphs, radius);
  return diversity(fps);
}

std::size_t levenshtein(std::span<const Token> a, std::span<const Token> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    prev.swap(cur);
  }
  return prev[b.size()];
}

}  // namespace bbrt
