// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string_view>
#include <utility>

#include "bbrt/engine.hpp"
#include "bbrt/error.hpp"
#include "bbrt/rng.hpp"

namespace bbrt {

namespace {

struct WeightedToken {
  std::string_view symbol;
  double weight;
};

constexpr WeightedToken kMix[] = {
    {"[C]", 40}, {"[N]", 7},  {"[O]", 7},  {"[S]", 2},       {"[F]", 2},       {"[Cl]", 1.5},    {"[Br]", 1},
    {"[=C]", 4}, {"[=N]", 2}, {"[=O]", 3}, {"[#C]", 0.5},    {"[#N]", 0.5},    {"[Branch1]", 6}, {"[Branch2]", 3},
    {"[Branch3]", 1}, {"[Ring2]", 0.5}, {"[Ring3]", 1}, {"[Ring4]", 1.5}, {"[Ring5]", 2}, {"[Ring6]", 0.5},
};

}  // namespace

std::vector<TokenSequence> generate_synthetic_corpus(const CorpusOptions& options) {
  if (options.min_length < 1 || options.max_length < options.min_length) {
    throw Error(ErrorCode::kInvalidArgument, "corpus lengths must satisfy 1 <= min <= max");
  }
  std::vector<Token> tokens;
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& w : kMix) {
    tokens.push_back(token(w.symbol));
    total += w.weight;
    cumulative.push_back(total);
  }
  Rng rng(derive_seed(options.seed, {0}));
  std::set<TokenSequence> seen;
  std::vector<TokenSequence> out;
  const std::size_t span = options.max_length - options.min_length + 1;
  // The attempt cap only matters for tiny length ranges with few distinct strings.
  const std::size_t max_attempts = 1000 * options.count + 1000;
  for (std::size_t attempt = 0; out.size() < options.count && attempt < max_attempts; ++attempt) {
    const std::size_t len = options.min_length + rng.below(span);
    TokenSequence seq;
    seq.push_back(token("[C]"));
    while (seq.size() < len) {
      const double u = rng.uniform() * total;
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      seq.push_back(tokens[std::min<std::size_t>(it - cumulative.begin(), tokens.size() - 1)]);
    }
    if (decode_with_diagnostics(seq).skipped != 0) continue;
    if (seen.insert(seq).second) out.push_back(std::move(seq));
  }
  return out;
}

std::vector<std::vector<std::size_t>> stratified_seed_sets(std::span<const MolGraph> corpus,
                                                           const PropertyOracle& oracle, std::size_t strata,
                                                           std::size_t count, std::size_t start, int radius) {
  if (strata < 1) throw Error(ErrorCode::kInvalidArgument, "strata must be >= 1");
  if (strata == 1) return {maxmin_select(corpus, count, start, radius)};
  if (strata > corpus.size()) throw Error(ErrorCode::kCountTooLarge, "more strata than corpus items");
  std::vector<double> values(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) values[i] = oracle.evaluate(corpus[i]);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<std::vector<std::size_t>> sets;
  for (std::size_t s = 0; s < strata; ++s) {
    const std::size_t lo = s * corpus.size() / strata;
    const std::size_t hi = (s + 1) * corpus.size() / strata;
    std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                     order.begin() + static_cast<std::ptrdiff_t>(hi));
    std::sort(members.begin(), members.end());
    std::vector<MolGraph> band;
    band.reserve(members.size());
    for (std::size_t idx : members) band.push_back(corpus[idx]);
    auto local = maxmin_select(band, count, 0, radius);
    for (auto& i : local) i = members[i];
    sets.push_back(std::move(local));
  }
  return sets;
}

}  // namespace bbrt
