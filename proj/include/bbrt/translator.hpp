// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bbrt/model.hpp"
#include "bbrt/oracle.hpp"
#include "bbrt/selfies.hpp"

namespace bbrt {

struct PropertyBand {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

// Accepted pairs satisfy sim > tau (when tau is set), source/target band
// membership (when bands are set) and a strictly positive property gain.
struct PairConstraint {
  std::optional<double> tau = 0.4;
  PropertyOracle oracle = PropertyOracle::penalized_logp();
  int radius = 2;
  std::optional<PropertyBand> source_band;
  std::optional<PropertyBand> target_band;

  void validate() const;
};

struct TranslationPair {
  TokenSequence source;
  TokenSequence target;
  double sim = 0.0;
  double gain = 0.0;
};

struct PairStats {
  std::size_t examined = 0;
  std::size_t accepted = 0;
};

// Draws ordered (source, target) index pairs uniformly without replacement
// and keeps those meeting the constraint, until `budget` pairs are kept or
// every pair was examined. Throws NoPairsFound.
std::vector<TranslationPair> build_pairs(std::span<const TokenSequence> corpus, const PairConstraint& constraint,
                                         std::size_t budget, std::uint64_t seed, PairStats* stats = nullptr);

// Count model over (source property bucket, previous target token) contexts
// with additive smoothing. The source is summarized only by the quantile
// bucket of its oracle value.
class ReferenceTranslator final : public ConditionalModel {
 public:
  ReferenceTranslator(Vocabulary vocab, PropertyOracle oracle, std::vector<double> boundaries, double alpha,
                      std::vector<std::uint32_t> counts);
  // Copies and moves start with an empty bucket cache.
  ReferenceTranslator(const ReferenceTranslator& other);
  ReferenceTranslator(ReferenceTranslator&& other) noexcept;
  ReferenceTranslator& operator=(const ReferenceTranslator&) = delete;
  ReferenceTranslator& operator=(ReferenceTranslator&&) = delete;

  const Vocabulary& vocabulary() const override { return vocab_; }
  ModelMode mode() const override { return ModelMode::kTokenLevel; }
  Distribution next_token_dist(std::span<const Token> source, std::span<const Token> prefix) const override;

  std::size_t bucket_count() const noexcept { return boundaries_.size() + 1; }
  // Number of boundaries strictly below v: values on a boundary go low.
  std::size_t bucket_of(double value) const noexcept;
  std::size_t source_bucket(std::span<const Token> source) const;

  // Context distribution for (bucket, previous vocabulary index); pass
  // vocabulary().size() as `prev` for the start-of-sequence context.
  Distribution context_dist(std::size_t bucket, std::size_t prev) const;
  std::uint32_t count(std::size_t bucket, std::size_t prev, std::size_t next) const;

  double alpha() const noexcept { return alpha_; }
  const std::vector<double>& boundaries() const noexcept { return boundaries_; }
  const PropertyOracle& oracle() const noexcept { return oracle_; }
  const std::vector<std::uint32_t>& counts() const noexcept { return counts_; }

 private:
  std::size_t row_offset(std::size_t bucket, std::size_t prev) const noexcept;

  Vocabulary vocab_;
  PropertyOracle oracle_;
  std::vector<double> boundaries_;
  double alpha_;
  std::vector<std::uint32_t> counts_;

  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<std::string, std::size_t> bucket_cache_;
};

struct ReferenceTrainingOptions {
  double alpha = 0.1;
  std::size_t buckets = 8;
  std::size_t max_length = kDefaultMaxSequenceLength;
};

// Closed-form smoothed maximum likelihood. Targets longer than max_length
// are cut there and the cut counts as EOS. Throws EmptyTraining.
ReferenceTranslator train_reference(std::span<const TranslationPair> pairs, const PropertyOracle& oracle,
                                    const ReferenceTrainingOptions& options = {});

// Source-aware synthetic translator: copies the source token at each
// position with probability copy_prob (the rest spread over edit_weights),
// then past the end of the source stops with probability tail_stop or
// extends with tail_weights. The default preset is the carbon appender.
struct LocalEditParams {
  double copy_prob = 0.97;
  double early_stop = 0.0;
  double tail_stop = 0.6;
  std::vector<double> edit_weights;  // indexed by alphabet id
  std::vector<double> tail_weights;  // indexed by alphabet id

  static LocalEditParams carbon_appender();
  void validate() const;
};

class LocalEditModel final : public ConditionalModel {
 public:
  explicit LocalEditModel(LocalEditParams params = LocalEditParams::carbon_appender());

  const Vocabulary& vocabulary() const override { return vocab_; }
  ModelMode mode() const override { return ModelMode::kTokenLevel; }
  Distribution next_token_dist(std::span<const Token> source, std::span<const Token> prefix) const override;

  const LocalEditParams& params() const noexcept { return params_; }

 private:
  Vocabulary vocab_;
  LocalEditParams params_;
  Distribution edit_;
  Distribution tail_;
};

// Sequence-level fixed point: every candidate is the source itself.
class EchoModel final : public ConditionalModel {
 public:
  EchoModel() : vocab_(Vocabulary::full()) {}

  const Vocabulary& vocabulary() const override { return vocab_; }
  ModelMode mode() const override { return ModelMode::kSequenceLevel; }
  std::vector<std::string> generate(std::span<const Token> source, std::size_t n, std::uint64_t seed) const override;

 private:
  Vocabulary vocab_;
};

}  // namespace bbrt
