// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <set>

#include "bbrt/corpus.hpp"
#include "bbrt/engine.hpp"
#include "bbrt/io.hpp"
#include "test_support.hpp"

using namespace bbrt;

TEST_SUITE("corpus") {
  TEST_CASE("synthetic corpus shape") {
    CorpusOptions o;
    o.count = 300;
    const auto corpus = generate_synthetic_corpus(o);
    CHECK(corpus.size() == 300);
    std::set<TokenSequence> distinct(corpus.begin(), corpus.end());
    CHECK(distinct.size() == corpus.size());
    for (const auto& s : corpus) {
      CHECK(s.size() >= o.min_length);
      CHECK(s.size() <= o.max_length);
      CHECK(s.front() == token("C"));
      CHECK(decode_with_diagnostics(s).skipped == 0);
    }
    const auto again = generate_synthetic_corpus(o);
    CHECK(again == corpus);
  }

  TEST_CASE("bundled corpus matches the generator defaults") {
    const auto bundled = read_corpus(std::string(BBRT_DATA_DIR) + "/synthetic_corpus.selfies");
    CHECK(bundled == generate_synthetic_corpus());
  }

  TEST_CASE("stratified seed sets") {
    CorpusOptions o;
    o.count = 200;
    const auto corpus = generate_synthetic_corpus(o);
    std::vector<MolGraph> graphs;
    for (const auto& s : corpus) graphs.push_back(decode(s));
    const PropertyOracle oracle = PropertyOracle::penalized_logp();

    const auto one = stratified_seed_sets(graphs, oracle, 1, 10, 4, 2);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == maxmin_select(graphs, 10, 4, 2));

    const auto three = stratified_seed_sets(graphs, oracle, 3, 10, 0, 2);
    REQUIRE(three.size() == 3);
    double prev_max = -1e300;
    for (const auto& set : three) {
      CHECK(set.size() == 10);
      double lo = 1e300, hi = -1e300;
      for (std::size_t i : set) {
        lo = std::min(lo, oracle.evaluate(graphs[i]));
        hi = std::max(hi, oracle.evaluate(graphs[i]));
      }
      CHECK(lo >= prev_max);
      prev_max = hi;
    }
    CHECK(test::error_code_of([&] { stratified_seed_sets(graphs, oracle, 0, 10, 0, 2); }) ==
          ErrorCode::kInvalidArgument);
  }
}
