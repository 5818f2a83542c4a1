// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bbrt/mol_graph.hpp"
#include "bbrt/oracle.hpp"
#include "bbrt/selfies.hpp"

namespace bbrt {

struct CorpusOptions {
  std::size_t count = 2000;
  std::size_t min_length = 4;
  std::size_t max_length = 24;
  std::uint64_t seed = 7;
};

// Distinct random token strings drawn from a fixed, carbon-heavy token mix.
// Only strings that decode with no skipped token are kept, so the surface
// form and the graph agree one-to-one in size.
std::vector<TokenSequence> generate_synthetic_corpus(const CorpusOptions& options = {});

// Splits the corpus into `strata` equal-frequency bands of the oracle value
// (lowest first) and runs MaxMin inside each band, starting from the band's
// lowest corpus index (or `start` itself when strata == 1). Returns corpus
// indices, one set per band. Throws CountTooLarge / InvalidArgument.
std::vector<std::vector<std::size_t>> stratified_seed_sets(std::span<const MolGraph> corpus,
                                                           const PropertyOracle& oracle, std::size_t strata,
                                                           std::size_t count, std::size_t start, int radius);

}  // namespace bbrt
