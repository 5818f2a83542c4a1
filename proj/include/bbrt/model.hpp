// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

// The black-box translation contract. The engine only ever talks to a
// ConditionalModel: either token-level (next-token distributions, decoded by
// the strategies in decoding.hpp) or sequence-level (the model samples whole
// candidates itself, e.g. latent-variable graph translators).

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bbrt/selfies.hpp"

namespace bbrt {

enum class ModelMode { kTokenLevel, kSequenceLevel };

std::string_view model_mode_name(ModelMode mode) noexcept;

// Ordered tokens plus an implicit end-of-sequence marker at index size().
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<Token> tokens);

  // Every alphabet token in alphabet order.
  static Vocabulary full();

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t eos() const noexcept { return tokens_.size(); }
  std::size_t distribution_size() const noexcept { return tokens_.size() + 1; }

  Token token_at(std::size_t index) const { return tokens_.at(index); }
  std::optional<std::size_t> index_of(Token t) const noexcept;
  const std::vector<Token>& tokens() const noexcept { return tokens_; }

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

 private:
  std::vector<Token> tokens_;
  std::vector<std::int16_t> lookup_;  // alphabet id -> index, -1 if absent
};

using Distribution = std::vector<double>;

// Implementations must be safe to call concurrently from several threads.
class ConditionalModel {
 public:
  virtual ~ConditionalModel() = default;

  virtual const Vocabulary& vocabulary() const = 0;
  virtual ModelMode mode() const = 0;

  // Probabilities over vocabulary().distribution_size() symbols, EOS last.
  // Default implementation throws ModeMismatch.
  virtual Distribution next_token_dist(std::span<const Token> source, std::span<const Token> prefix) const;

  // Exactly n candidates as surface strings; the caller tokenizes them and
  // drops any that fail. Default implementation throws ModeMismatch.
  virtual std::vector<std::string> generate(std::span<const Token> source, std::size_t n, std::uint64_t seed) const;
};

// Throws InvalidDistribution unless p has the expected size, is finite and
// non-negative, and sums to 1 within tolerance.
void check_distribution(std::span<const double> p, std::size_t expected_size, double tolerance);

// Sum of log p over target tokens, plus log p(EOS | target) when with_eos.
double sequence_log_likelihood(const ConditionalModel& model, std::span<const Token> source,
                               std::span<const Token> target, bool with_eos);

}  // namespace bbrt
