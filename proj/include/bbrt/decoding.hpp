// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bbrt/model.hpp"
#include "bbrt/selfies.hpp"

namespace bbrt {

struct GreedySpec {
  // Greedy output is deterministic; copies > 1 retains duplicates so a
  // greedy decoder can be charged the same generation budget as a sampler.
  std::size_t copies = 1;
};

struct BeamSpec {
  std::size_t width = 20;
  std::size_t num_returned = 20;
  bool length_normalize = false;
};

struct TopKSpec {
  std::size_t k = 5;
  std::size_t num_samples = 100;
};

struct DecodeSpec {
  std::variant<GreedySpec, BeamSpec, TopKSpec> strategy = TopKSpec{};
  std::size_t max_length = kDefaultMaxSequenceLength;

  // Sequences this spec requests per call.
  std::size_t budget() const noexcept;
  std::string describe() const;
  // Throws InvalidArgument; vocab_size counts EOS.
  void validate(std::size_t vocab_size) const;
};

struct ScoredSequence {
  TokenSequence tokens;
  double log_likelihood = 0.0;  // model log-probability, EOS term included when finished
  bool finished = true;         // false: stopped by the max-length hard stop
};

enum class Execution { kSerial, kParallel };

ScoredSequence decode_greedy(const ConditionalModel& model, std::span<const Token> source, std::size_t max_length);

// Length-unnormalized beam search. Expansions are ranked by log-likelihood,
// ties by the lexicographic order of vocabulary indices (EOS last); the top
// `width` survive and those ending in EOS retire to the completed pool. Only
// EOS may follow a hypothesis of max_length tokens. Throws NoCompleted when
// the pool stays empty.
std::vector<ScoredSequence> decode_beam(const ConditionalModel& model, std::span<const Token> source, std::size_t width,
                                        std::size_t num_returned, std::size_t max_length,
                                        bool length_normalize = false);

struct TopKStepTrace {
  std::size_t sample = 0;
  std::size_t step = 0;
  std::vector<std::size_t> allowed;  // vocabulary indices in U
  std::size_t chosen = 0;
};
using TopKObserver = std::function<void(const TopKStepTrace&)>;

// Sample i draws from its own stream derived from (seed, i), so the parallel
// and serial paths return identical sequences. An observer forces serial
// execution.
std::vector<ScoredSequence> decode_topk(const ConditionalModel& model, std::span<const Token> source, std::size_t k,
                                        std::size_t num_samples, std::size_t max_length, std::uint64_t seed,
                                        Execution exec = Execution::kParallel, const TopKObserver& observer = {});

// Dispatches on spec.strategy.
std::vector<ScoredSequence> run_decoder(const ConditionalModel& model, std::span<const Token> source,
                                        const DecodeSpec& spec, std::uint64_t seed,
                                        Execution exec = Execution::kParallel);

}  // namespace bbrt
