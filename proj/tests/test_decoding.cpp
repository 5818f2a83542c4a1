// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bbrt/decoding.hpp"
#include "test_support.hpp"

using namespace bbrt;

namespace {

struct Enumerated {
  TokenSequence tokens;
  std::vector<std::size_t> ids;  // vocabulary indices including the final EOS
  double ll = 0.0;
};

// Every EOS-terminated sequence of at most max_len tokens with its exact log-likelihood.
std::vector<Enumerated> enumerate_all(const ConditionalModel& m, std::size_t max_len) {
  std::vector<Enumerated> out;
  const Vocabulary& v = m.vocabulary();
  std::vector<Enumerated> frontier{Enumerated{}};
  for (std::size_t len = 0; len <= max_len; ++len) {
    std::vector<Enumerated> next;
    for (const auto& e : frontier) {
      const Distribution p = m.next_token_dist({}, e.tokens);
      Enumerated done = e;
      done.ids.push_back(v.eos());
      done.ll += std::log(p[v.eos()]);
      out.push_back(std::move(done));
      if (len == max_len) continue;
      for (std::size_t s = 0; s < v.size(); ++s) {
        Enumerated ext = e;
        ext.tokens.push_back(v.token_at(s));
        ext.ids.push_back(s);
        ext.ll += std::log(p[s]);
        next.push_back(std::move(ext));
      }
    }
    frontier = std::move(next);
  }
  return out;
}

bool better(const Enumerated& a, const Enumerated& b) {
  if (a.ll != b.ll) return a.ll > b.ll;
  return a.ids < b.ids;
}

double rescore(const ConditionalModel& m, const ScoredSequence& s) {
  return sequence_log_likelihood(m, {}, s.tokens, s.finished);
}

}  // namespace

TEST_SUITE("decoding") {
  TEST_CASE("forced single token runs to the length cap") {
    test::TableModel m(test::first_tokens(1), Distribution{1.0, 0.0});
    const ScoredSequence s = decode_greedy(m, {}, 7);
    CHECK(s.tokens == TokenSequence(7, Token{0}));
    CHECK_FALSE(s.finished);
    CHECK(s.log_likelihood == 0.0);
  }

  TEST_CASE("immediate stop") {
    test::TableModel m(test::first_tokens(1), Distribution{0.1, 0.9});
    const ScoredSequence s = decode_greedy(m, {}, 10);
    CHECK(s.tokens.empty());
    CHECK(s.finished);
    CHECK(s.log_likelihood == doctest::Approx(std::log(0.9)));
  }

  TEST_CASE("greedy walks a known three-step table") {
    // Vocabulary {C, N} plus EOS.
    test::TableModel m(test::first_tokens(2), Distribution{0.0, 0.0, 1.0});
    m.set("", {0.2, 0.5, 0.3});
    m.set("[N]", {0.6, 0.1, 0.3});
    m.set("[N][C]", {0.25, 0.35, 0.4});
    const ScoredSequence s = decode_greedy(m, {}, 10);
    CHECK(render(s.tokens) == "[N][C]");
    CHECK(s.finished);
    CHECK(s.log_likelihood == doctest::Approx(std::log(0.5 * 0.6 * 0.4)));
  }

  TEST_CASE("greedy ties go to the lower vocabulary index") {
    test::TableModel m(test::first_tokens(2), Distribution{0.0, 0.0, 1.0});
    m.set("", {0.4, 0.4, 0.2});
    CHECK(render(decode_greedy(m, {}, 5).tokens) == "[C]");
  }

  TEST_CASE("beam search matches exhaustive enumeration") {
    std::size_t mismatches = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const test::RandomTableModel m(4, seed);
      auto all = enumerate_all(m, 3);
      REQUIRE(all.size() == 85);
      std::sort(all.begin(), all.end(), better);
      const auto beam = decode_beam(m, {}, 85, 10, 3);
      REQUIRE(beam.size() == 10);
      for (std::size_t i = 0; i < beam.size(); ++i) {
        if (beam[i].tokens != all[i].tokens || std::abs(beam[i].log_likelihood - all[i].ll) > 1e-12) ++mismatches;
      }
    }
    CHECK(mismatches == 0);
  }

  TEST_CASE("greedy, beam of one and top-1 sampling agree") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const test::RandomTableModel m(6, 1000 + seed, 0.3);
      const ScoredSequence g = decode_greedy(m, {}, 12);
      const auto b = decode_beam(m, {}, 1, 1, 12);
      const auto t = decode_topk(m, {}, 1, 3, 12, seed);
      CHECK(b.front().tokens == g.tokens);
      for (const auto& s : t) {
        CHECK(s.tokens == g.tokens);
        CHECK(s.log_likelihood == doctest::Approx(g.log_likelihood).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("beam escapes a garden path") {
    // Greedy takes [C] (0.6) whose continuations are all weak; [N] then EOS
    // scores 0.4 * 0.9, while anything through [C] is at most 0.6 * 0.45.
    test::TableModel m(test::first_tokens(2), Distribution{0.0, 0.0, 1.0});
    m.set("", {0.6, 0.4, 0.0});
    m.set("[C]", {0.45, 0.45, 0.1});
    m.set("[N]", {0.05, 0.05, 0.9});
    const ScoredSequence g = decode_greedy(m, {}, 2);
    CHECK(render(g.tokens) == "[C][C]");
    CHECK(g.log_likelihood == doctest::Approx(std::log(0.6 * 0.45)));
    const auto b = decode_beam(m, {}, 2, 1, 2);
    CHECK(render(b.front().tokens) == "[N]");
    CHECK(b.front().log_likelihood == doctest::Approx(std::log(0.4 * 0.9)));
    CHECK(b.front().log_likelihood > g.log_likelihood);
  }

  TEST_CASE("a wider beam can end on a worse sequence") {
    // Width 2 keeps both children of [N], which crowd out [C][C].
    test::TableModel m(test::first_tokens(2), Distribution{0.45, 0.45, 0.1});
    m.set("", {0.51, 0.49, 0.0});
    m.set("[C]", {0.34, 0.33, 0.33});
    m.set("[N]", {0.5, 0.5, 0.0});
    m.set("[C][C]", {0.0, 0.0, 1.0});
    const auto narrow = decode_beam(m, {}, 1, 1, 2).front();
    const auto wide = decode_beam(m, {}, 2, 1, 2).front();
    CHECK(render(narrow.tokens) == "[C][C]");
    CHECK(narrow.log_likelihood == doctest::Approx(std::log(0.51 * 0.34)));
    CHECK(wide.log_likelihood == doctest::Approx(std::log(0.49 * 0.5 * 0.1)));
    CHECK(wide.log_likelihood < narrow.log_likelihood);
  }

  TEST_CASE("beams wide enough to hold every prefix are exact") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const test::RandomTableModel m(3, 5000 + seed, 0.5);
      // 3^4 prefixes at the widest step.
      const double exact = decode_beam(m, {}, 81, 1, 4).front().log_likelihood;
      for (std::size_t w = 81; w <= 120; w += 13) {
        CHECK(decode_beam(m, {}, w, 1, 4).front().log_likelihood == doctest::Approx(exact).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("beam without completions reports NoCompleted") {
    test::TableModel m(test::first_tokens(1), Distribution{1.0, 0.0});
    CHECK(test::error_code_of([&] { decode_beam(m, {}, 2, 1, 4); }) == ErrorCode::kNoCompleted);
    CHECK(test::error_code_of([&] { decode_beam(m, {}, 1, 2, 4); }) == ErrorCode::kInvalidArgument);
  }

  TEST_CASE("returned likelihoods equal independent rescoring") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const test::RandomTableModel m(5, 9000 + seed, 0.4);
      std::vector<ScoredSequence> all = decode_topk(m, {}, 3, 20, 8, seed);
      const auto beams = decode_beam(m, {}, 6, 6, 8);
      all.insert(all.end(), beams.begin(), beams.end());
      all.push_back(decode_greedy(m, {}, 8));
      for (const auto& s : all) {
        CHECK(std::abs(s.log_likelihood - rescore(m, s)) <= 1e-9);
        CHECK(s.log_likelihood <= 0.0);
        CHECK(std::isfinite(s.log_likelihood));
      }
    }
  }

  TEST_CASE("top-k never leaves the top-k set") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const test::RandomTableModel m(6, 300 + seed, 0.3);
      std::size_t steps = 0;
      std::vector<std::vector<std::size_t>> allowed_log;
      const auto out = decode_topk(m, {}, 3, 25, 10, seed, Execution::kSerial, [&](const TopKStepTrace& t) {
        ++steps;
        CHECK(t.allowed.size() == 3);
        CHECK(std::find(t.allowed.begin(), t.allowed.end(), t.chosen) != t.allowed.end());
      });
      CHECK(steps > 0);
      CHECK(out.size() == 25);
    }
  }

  TEST_CASE("top-k with full support reproduces the model") {
    // One step: three tokens then EOS always.
    test::TableModel m(test::first_tokens(3), Distribution{0.0, 0.0, 0.0, 1.0});
    const Distribution first{0.45, 0.3, 0.15, 0.1};
    m.set("", first);
    const std::size_t n = 50000;
    const auto out = decode_topk(m, {}, 4, n, 3, 42);
    std::vector<double> freq(4, 0.0);
    for (const auto& s : out) freq[s.tokens.empty() ? 3 : s.tokens.front().id] += 1.0;
    for (std::size_t v = 0; v < 4; ++v) {
      const double mean = static_cast<double>(n) * first[v];
      const double sigma = std::sqrt(static_cast<double>(n) * first[v] * (1.0 - first[v]));
      INFO("symbol " << v << " count " << freq[v] << " expected " << mean);
      CHECK(std::abs(freq[v] - mean) <= 3.0 * sigma);
    }
  }

  TEST_CASE("top-2 renormalizes over the two best tokens") {
    test::TableModel m(test::first_tokens(2), Distribution{0.0, 0.0, 1.0});
    m.set("", {0.5, 0.3, 0.2});  // EOS is the third and smallest symbol
    const std::size_t n = 50000;
    const auto out = decode_topk(m, {}, 2, n, 3, 7);
    double first = 0, second = 0, third = 0;
    for (const auto& s : out) {
      if (s.tokens.empty()) {
        third += 1;
      } else {
        (s.tokens.front().id == 0 ? first : second) += 1;
      }
    }
    CHECK(third == 0);
    const double q = 0.5 / 0.8;
    const double sigma = std::sqrt(static_cast<double>(n) * q * (1 - q));
    CHECK(std::abs(first - static_cast<double>(n) * q) <= 3 * sigma);
    CHECK(first + second == static_cast<double>(n));
  }

  TEST_CASE("sampling is reproducible and independent of scheduling") {
    const test::RandomTableModel m(8, 77, 0.2);
    const auto a = decode_topk(m, {}, 5, 64, 15, 123, Execution::kSerial);
    const auto b = decode_topk(m, {}, 5, 64, 15, 123, Execution::kParallel);
    const auto c = decode_topk(m, {}, 5, 64, 15, 124, Execution::kParallel);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].tokens == b[i].tokens);
      CHECK(a[i].log_likelihood == b[i].log_likelihood);
      differs |= a[i].tokens != c[i].tokens;
    }
    CHECK(differs);
  }

  TEST_CASE("decode spec validation and budgets") {
    CHECK(DecodeSpec{GreedySpec{3}, 10}.budget() == 3);
    CHECK(DecodeSpec{BeamSpec{20, 20}, 10}.budget() == 20);
    CHECK(DecodeSpec{TopKSpec{5, 100}, 10}.budget() == 100);
    CHECK(test::error_code_of([] { DecodeSpec{TopKSpec{30, 1}, 10}.validate(26); }) == ErrorCode::kInvalidArgument);
    CHECK(test::error_code_of([] { DecodeSpec{BeamSpec{2, 3}, 10}.validate(26); }) == ErrorCode::kInvalidArgument);
    CHECK(test::error_code_of([] { DecodeSpec{GreedySpec{1}, 0}.validate(26); }) == ErrorCode::kInvalidArgument);
    DecodeSpec{TopKSpec{26, 1}, 10}.validate(26);
  }
}
