// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bbrt/mol_graph.hpp"
#include "bbrt/selfies.hpp"

namespace bbrt {

inline constexpr int kDefaultFingerprintRadius = 2;

// Seed prepended to every hashed tuple. Fingerprint identifiers are 32-bit
// FNV-1a over the little-endian bytes of (seed, tuple words...), so they are
// identical on every platform.
inline constexpr std::uint32_t kFingerprintHashSeed = 0x9e3779b9u;

struct Fingerprint {
  std::vector<std::uint32_t> features;  // sorted, unique
  int radius = kDefaultFingerprintRadius;
  std::size_t graph_size = 0;
};

std::uint32_t hash_words(std::span<const std::uint32_t> words) noexcept;

// Morgan-style circular identifiers. Round 0 hashes (element, degree,
// implicit H, total bond order); round r hashes the atom's previous id with
// the sorted multiset of (bond order, neighbor previous id). The result is
// the union over all atoms and rounds 0..radius.
Fingerprint morgan_fingerprint(const MolGraph& g, int radius = kDefaultFingerprintRadius);

// |A and B| / |A or B|; 1.0 when both are empty. Throws RadiusMismatch.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

// Mean pairwise (1 - tanimoto) over unordered pairs. Throws TooFewItems.
double diversity(std::span<const Fingerprint> fps);
double diversity(std::span<const MolGraph> graphs, int radius = kDefaultFingerprintRadius);

// Token-level edit distance with unit costs.
std::size_t levenshtein(std::span<const Token> a, std::span<const Token> b);

}  // namespace bbrt
