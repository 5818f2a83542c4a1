// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>

#include "bbrt/error.hpp"
#include "bbrt/rng.hpp"

namespace bbrt {

std::size_t DecodeSpec::budget() const noexcept {
  return std::visit(
      [](const auto& s) -> std::size_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GreedySpec>) return s.copies;
        else if constexpr (std::is_same_v<T, BeamSpec>) return s.num_returned;
        else return s.num_samples;
      },
      strategy);
}

std::string DecodeSpec::describe() const {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GreedySpec>) return "greedy x" + std::to_string(s.copies);
        else if constexpr (std::is_same_v<T, BeamSpec>)
          return "beam(" + std::to_string(s.width) + ") -> " + std::to_string(s.num_returned);
        else return "top-" + std::to_string(s.k) + " x" + std::to_string(s.num_samples);
      },
      strategy);
}

void DecodeSpec::validate(std::size_t vocab_size) const {
  if (max_length < 1) throw Error(ErrorCode::kInvalidArgument, "max_length must be >= 1");
  if (const auto* g = std::get_if<GreedySpec>(&strategy)) {
    if (g->copies < 1) throw Error(ErrorCode::kInvalidArgument, "greedy copies must be >= 1");
  } else if (const auto* b = std::get_if<BeamSpec>(&strategy)) {
    if (b->width < 1) throw Error(ErrorCode::kInvalidArgument, "beam width must be >= 1");
    if (b->num_returned < 1 || b->num_returned > b->width) {
      throw Error(ErrorCode::kInvalidArgument, "beam num_returned must be in [1, width]");
    }
  } else if (const auto* t = std::get_if<TopKSpec>(&strategy)) {
    if (t->k < 1 || t->k > vocab_size) throw Error(ErrorCode::kInvalidArgument, "top-k k must be in [1, |V|]");
    if (t->num_samples < 1) throw Error(ErrorCode::kInvalidArgument, "top-k num_samples must be >= 1");
  }
}

namespace {

std::size_t argmax(const Distribution& p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) best = i;
  }
  return best;
}

struct Hypothesis {
  std::vector<std::size_t> ids;  // vocabulary indices, EOS possibly last
  TokenSequence tokens;
  double ll = 0.0;
};

bool ranks_before(double score_a, const std::vector<std::size_t>& a, double score_b,
                  const std::vector<std::size_t>& b) {
  if (score_a != score_b) return score_a > score_b;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Top-k vocabulary indices by probability, ties by index.
std::vector<std::size_t> top_k_indices(const Distribution& p, std::size_t k) {
  std::vector<std::size_t> idx(p.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) { return p[a] != p[b] ? p[a] > p[b] : a < b; });
  idx.resize(k);
  return idx;
}

ScoredSequence sample_one(const ConditionalModel& model, std::span<const Token> source, std::size_t k,
                          std::size_t max_length, std::uint64_t stream_seed, std::size_t sample_index,
                          const TopKObserver& observer) {
  const Vocabulary& vocab = model.vocabulary();
  Rng rng(stream_seed);
  ScoredSequence out;
  out.finished = false;
  for (std::size_t step = 0; step < max_length; ++step) {
    const Distribution p = model.next_token_dist(source, out.tokens);
    const auto allowed = top_k_indices(p, k);
    double z = 0.0;
    for (std::size_t i : allowed) z += p[i];
    const double u = rng.uniform() * z;
    std::size_t chosen = allowed.front();
    double acc = 0.0;
    for (std::size_t i : allowed) {
      if (p[i] <= 0.0) continue;
      chosen = i;
      acc += p[i];
      if (u < acc) break;
    }
    if (observer) observer({sample_index, step, allowed, chosen});
    out.log_likelihood += std::log(p[chosen]);
    if (chosen == vocab.eos()) {
      out.finished = true;
      return out;
    }
    out.tokens.push_back(vocab.token_at(chosen));
  }
  return out;
}

}  // namespace

ScoredSequence decode_greedy(const ConditionalModel& model, std::span<const Token> source, std::size_t max_length) {
  const Vocabulary& vocab = model.vocabulary();
  ScoredSequence out;
  out.finished = false;
  for (std::size_t step = 0; step < max_length; ++step) {
    const Distribution p = model.next_token_dist(source, out.tokens);
    const std::size_t best = argmax(p);
    out.log_likelihood += std::log(p[best]);
    if (best == vocab.eos()) {
      out.finished = true;
      return out;
    }
    out.tokens.push_back(vocab.token_at(best));
  }
  return out;
}

std::vector<ScoredSequence> decode_beam(const ConditionalModel& model, std::span<const Token> source, std::size_t width,
                                        std::size_t num_returned, std::size_t max_length, bool length_normalize) {
  if (width < 1 || num_returned < 1 || num_returned > width) {
    throw Error(ErrorCode::kInvalidArgument, "beam search requires width >= num_returned >= 1");
  }
  const Vocabulary& vocab = model.vocabulary();
  const std::size_t eos = vocab.eos();

  struct Expansion {
    std::size_t parent;
    std::size_t symbol;
    double ll;
    std::vector<std::size_t> ids;
  };

  std::vector<Hypothesis> beam(1);
  std::vector<Hypothesis> completed;
  auto completed_order = [&](const Hypothesis& a, const Hypothesis& b) {
    if (length_normalize) {
      const double sa = a.ll / static_cast<double>(a.ids.size());
      const double sb = b.ll / static_cast<double>(b.ids.size());
      return ranks_before(sa, a.ids, sb, b.ids);
    }
    return ranks_before(a.ll, a.ids, b.ll, b.ids);
  };

  for (std::size_t step = 0; step <= max_length && !beam.empty(); ++step) {
    std::vector<Expansion> expansions;
    for (std::size_t h = 0; h < beam.size(); ++h) {
      const Distribution p = model.next_token_dist(source, beam[h].tokens);
      for (std::size_t v = 0; v < p.size(); ++v) {
        if (p[v] <= 0.0) continue;
        if (step == max_length && v != eos) continue;
        Expansion e{h, v, beam[h].ll + std::log(p[v]), beam[h].ids};
        e.ids.push_back(v);
        expansions.push_back(std::move(e));
      }
    }
    const std::size_t keep = std::min(width, expansions.size());
    std::partial_sort(expansions.begin(), expansions.begin() + static_cast<std::ptrdiff_t>(keep), expansions.end(),
                      [](const Expansion& a, const Expansion& b) { return ranks_before(a.ll, a.ids, b.ll, b.ids); });
    std::vector<Hypothesis> next;
    for (std::size_t i = 0; i < keep; ++i) {
      Expansion& e = expansions[i];
      Hypothesis hyp;
      hyp.tokens = beam[e.parent].tokens;
      hyp.ll = e.ll;
      hyp.ids = std::move(e.ids);
      if (e.symbol == eos) {
        completed.push_back(std::move(hyp));
      } else {
        hyp.tokens.push_back(vocab.token_at(e.symbol));
        next.push_back(std::move(hyp));
      }
    }
    beam = std::move(next);

    // Scores only decrease with length, so once num_returned completed
    // hypotheses beat every live one the result is fixed.
    if (!length_normalize && completed.size() >= num_returned && !beam.empty()) {
      std::vector<double> scores;
      for (const auto& c : completed) scores.push_back(c.ll);
      std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(num_returned - 1), scores.end(),
                       std::greater<>());
      const double kth = scores[num_returned - 1];
      double best_live = beam.front().ll;
      for (const auto& b : beam) best_live = std::max(best_live, b.ll);
      if (best_live < kth) break;
    }
  }

  if (completed.empty()) throw Error(ErrorCode::kNoCompleted, "no beam hypothesis reached EOS within max_length");
  std::sort(completed.begin(), completed.end(), completed_order);
  std::vector<ScoredSequence> out;
  for (std::size_t i = 0; i < completed.size() && i < num_returned; ++i) {
    out.push_back({std::move(completed[i].tokens), completed[i].ll, true});
  }
  return out;
}

std::vector<ScoredSequence> decode_topk(const ConditionalModel& model, std::span<const Token> source, std::size_t k,
                                        std::size_t num_samples, std::size_t max_length, std::uint64_t seed,
                                        Execution exec, const TopKObserver& observer) {
  if (k < 1 || k > model.vocabulary().distribution_size()) {
    throw Error(ErrorCode::kInvalidArgument, "top-k requires 1 <= k <= |V|");
  }
  std::vector<ScoredSequence> out(num_samples);
  if (exec == Execution::kSerial || observer) {
    for (std::size_t i = 0; i < num_samples; ++i) {
      out[i] = sample_one(model, source, k, max_length, derive_seed(seed, {i}), i, observer);
    }
    return out;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto n = static_cast<std::int64_t>(num_samples);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      const auto idx = static_cast<std::size_t>(i);
      out[idx] = sample_one(model, source, k, max_length, derive_seed(seed, {idx}), idx, {});
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<ScoredSequence> run_decoder(const ConditionalModel& model, std::span<const Token> source,
                                        const DecodeSpec& spec, std::uint64_t seed, Execution exec) {
  if (const auto* g = std::get_if<GreedySpec>(&spec.strategy)) {
    const ScoredSequence one = decode_greedy(model, source, spec.max_length);
    return std::vector<ScoredSequence>(g->copies, one);
  }
  if (const auto* b = std::get_if<BeamSpec>(&spec.strategy)) {
    return decode_beam(model, source, b->width, b->num_returned, spec.max_length, b->length_normalize);
  }
  const auto& t = std::get<TopKSpec>(spec.strategy);
  return decode_topk(model, source, t.k, t.num_samples, spec.max_length, seed, exec);
}

}  // namespace bbrt
