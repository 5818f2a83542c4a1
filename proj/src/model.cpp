// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bbrt/error.hpp"

namespace bbrt {

std::string_view model_mode_name(ModelMode mode) noexcept {
  return mode == ModelMode::kTokenLevel ? "token-level" : "sequence-level";
}

Vocabulary::Vocabulary(std::vector<Token> tokens) : tokens_(std::move(tokens)), lookup_(alphabet_size(), -1) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto& slot = lookup_.at(tokens_[i].id);
    if (slot >= 0) throw Error(ErrorCode::kInvalidArgument, "duplicate vocabulary token " + render(tokens_[i]));
    slot = static_cast<std::int16_t>(i);
  }
}

Vocabulary Vocabulary::full() {
  std::vector<Token> all;
  for (std::size_t i = 0; i < alphabet_size(); ++i) all.push_back(Token{static_cast<std::uint8_t>(i)});
  return Vocabulary(std::move(all));
}

std::optional<std::size_t> Vocabulary::index_of(Token t) const noexcept {
  if (t.id >= lookup_.size() || lookup_[t.id] < 0) return std::nullopt;
  return static_cast<std::size_t>(lookup_[t.id]);
}

Distribution ConditionalModel::next_token_dist(std::span<const Token>, std::span<const Token>) const {
  throw Error(ErrorCode::kModeMismatch, "next_token_dist called on a sequence-level model");
}

std::vector<std::string> ConditionalModel::generate(std::span<const Token>, std::size_t, std::uint64_t) const {
  throw Error(ErrorCode::kModeMismatch, "generate called on a token-level model");
}

void check_distribution(std::span<const double> p, std::size_t expected_size, double tolerance) {
  if (p.size() != expected_size) {
    throw Error(ErrorCode::kInvalidDistribution, "distribution has " + std::to_string(p.size()) + " entries, expected " +
                                                     std::to_string(expected_size));
  }
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::kInvalidDistribution, "negative or non-finite probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw Error(ErrorCode::kInvalidDistribution, "probabilities sum to " + std::to_string(sum));
  }
}

double sequence_log_likelihood(const ConditionalModel& model, std::span<const Token> source,
                               std::span<const Token> target, bool with_eos) {
  const Vocabulary& vocab = model.vocabulary();
  double ll = 0.0;
  for (std::size_t t = 0; t < target.size(); ++t) {
    const auto p = model.next_token_dist(source, target.first(t));
    auto idx = vocab.index_of(target[t]);
    if (!idx) return -std::numeric_limits<double>::infinity();
    ll += std::log(p[*idx]);
  }
  if (with_eos) ll += std::log(model.next_token_dist(source, target)[vocab.eos()]);
  return ll;
}

}  // namespace bbrt
