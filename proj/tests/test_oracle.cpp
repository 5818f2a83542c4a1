// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "bbrt/oracle.hpp"
#include "bbrt/rng.hpp"
#include "test_support.hpp"

using namespace bbrt;

namespace {

double gauss(double v, double c, double w) { return std::exp(-(v - c) * (v - c) / (2.0 * w * w)); }

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("penalized logp hand values") {
    const PropertyOracle o = PropertyOracle::penalized_logp();
    CHECK(o.evaluate(MolGraph{}) == 0.0);
    CHECK(o.evaluate(test::chain(6)) == doctest::Approx(2.7).epsilon(1e-12));
    CHECK(o.evaluate(test::carbon_ring(8)) == doctest::Approx(1.4).epsilon(1e-12));
    CHECK(o.evaluate(decode(tokenize("[C][O]"))) == doctest::Approx(0.5 - 0.6 - 0.1));
    CHECK(o.evaluate(decode(tokenize("[C][F]"))) == doctest::Approx(0.5 - 0.2 - 0.1));
    CHECK(o.evaluate(decode(tokenize("[C][Cl]"))) == doctest::Approx(0.5 + 0.3 - 0.1));
    // Isobutane: one atom of degree three.
    MolGraph iso;
    for (int i = 0; i < 4; ++i) iso.add_atom(Element::C);
    for (int i = 1; i < 4; ++i) iso.add_bond(0, i, 1);
    CHECK(o.evaluate(iso) == doctest::Approx(2.0 - 0.2 - 0.3));
    // Cyclohexane pays only the per-ring term.
    CHECK(o.evaluate(test::carbon_ring(6)) == doctest::Approx(3.0 - 0.3 - 0.2));
  }

  TEST_CASE("appending a carbon to a chain adds 0.45") {
    const PropertyOracle o = PropertyOracle::penalized_logp();
    for (std::size_t n = 1; n < 40; ++n) {
      CHECK(o.evaluate(test::chain(n + 1)) - o.evaluate(test::chain(n)) == doctest::Approx(0.45).epsilon(1e-9));
    }
  }

  TEST_CASE("wrong oracle kind") {
    CHECK(test::error_code_of([] { penalized_logp(test::chain(2), PropertyOracle::qed_surrogate()); }) ==
          ErrorCode::kWrongOracle);
    CHECK(test::error_code_of([] { qed_surrogate(test::chain(2), PropertyOracle::penalized_logp()); }) ==
          ErrorCode::kWrongOracle);
  }

  TEST_CASE("qed of a single carbon") {
    const double expected =
        std::cbrt(gauss(12.011 + 4 * 1.008, 300.0, 150.0) * gauss(0.45, 2.5, 2.0) * gauss(0.0, 2.0, 1.5));
    CHECK(PropertyOracle::qed_surrogate().evaluate(test::chain(1)) == doctest::Approx(expected).epsilon(1e-12));
  }

  TEST_CASE("qed is one at the desirability centers") {
    const MolGraph g = test::carbon_ring(6);
    PropertyOracle o = PropertyOracle::qed_surrogate();
    o.qed.mw_center = molecular_weight(g);
    o.qed.logp_center = penalized_logp_raw(g, o.logp);
    o.qed.ring_center = 1.0;
    CHECK(o.evaluate(g) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("qed stays in (0, 1]") {
    Rng rng(41);
    const PropertyOracle o = PropertyOracle::qed_surrogate();
    for (int trial = 0; trial < 2000; ++trial) {
      TokenSequence s(1 + rng.below(60));
      for (Token& t : s) t = Token{static_cast<std::uint8_t>(rng.below(alphabet_size()))};
      const MolGraph g = decode(s);
      if (g.empty()) continue;
      const double q = o.evaluate(g);
      CHECK(q > 0.0);
      CHECK(q <= 1.0);
    }
    CHECK(test::error_code_of([&] { o.evaluate(MolGraph{}); }) == ErrorCode::kEmptyGraph);
  }

  TEST_CASE("molecular weight oracle") {
    CHECK(PropertyOracle::molecular_weight().evaluate(test::chain(2)) == doctest::Approx(2 * 12.011 + 6 * 1.008).epsilon(1e-12));
  }

  TEST_CASE("normalization fit") {
    PropertyOracle o = PropertyOracle::penalized_logp();
    o.logp.carbon = 0.55;  // 0.5 per carbon in an unbranched chain
    const std::vector<MolGraph> two{test::chain(2), test::chain(6)};
    const PropertyOracle fitted = fit_normalization(two, o);
    REQUIRE(fitted.normalization.has_value());
    CHECK(fitted.normalization->mean == doctest::Approx(2.0));
    CHECK(fitted.normalization->stddev == doctest::Approx(1.0));
    CHECK(fitted.evaluate(test::chain(6)) == doctest::Approx(1.0));

    const std::vector<MolGraph> three{test::chain(2), test::chain(4), test::chain(6)};
    CHECK(fit_normalization(three, o).evaluate(test::chain(4)) == doctest::Approx(0.0).scale(1.0));

    const std::vector<MolGraph> flat{test::chain(5), test::chain(5), test::chain(5)};
    CHECK(test::error_code_of([&] { fit_normalization(flat, o); }) == ErrorCode::kDegenerateCorpus);
  }

  TEST_CASE("oracle names round-trip") {
    for (OracleKind k : {OracleKind::kPenalizedLogp, OracleKind::kQed, OracleKind::kMolecularWeight}) {
      CHECK(parse_oracle_kind(oracle_name(k)) == k);
    }
    CHECK(test::error_code_of([] { parse_oracle_kind("nope"); }) == ErrorCode::kConfig);
  }
}
