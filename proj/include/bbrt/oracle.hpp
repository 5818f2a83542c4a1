// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

// Surrogate property oracles. The constant tables are artifact constants
// chosen so each property moves with an interpretable structural lever; they
// are not Crippen or Bickerton values.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "bbrt/mol_graph.hpp"

namespace bbrt {

enum class OracleKind { kPenalizedLogp, kQed, kMolecularWeight };

std::string_view oracle_name(OracleKind kind) noexcept;
OracleKind parse_oracle_kind(std::string_view name);

struct LogpParams {
  double carbon = 0.5;        // per C
  double soft_hetero = 0.3;   // per S, Cl, Br
  double polar = 0.6;         // per N, O
  double fluorine = 0.2;      // per F
  double sa_atom = 0.05;      // per heavy atom
  double sa_branch = 0.3;     // per atom of degree >= 3
  double sa_ring = 0.2;       // per ring in the cycle basis
  int ring_size_limit = 6;    // rings larger than this pay (size - limit)
};

struct QedParams {
  double mw_center = 300.0;
  double mw_width = 150.0;
  double logp_center = 2.5;
  double logp_width = 2.0;
  double ring_center = 2.0;
  double ring_width = 1.5;
};

struct Normalization {
  double mean = 0.0;
  double stddev = 1.0;
};

struct PropertyOracle {
  OracleKind kind = OracleKind::kPenalizedLogp;
  LogpParams logp;
  QedParams qed;
  std::optional<Normalization> normalization;

  static PropertyOracle penalized_logp() { return {OracleKind::kPenalizedLogp, {}, {}, std::nullopt}; }
  static PropertyOracle qed_surrogate() { return {OracleKind::kQed, {}, {}, std::nullopt}; }
  static PropertyOracle molecular_weight() { return {OracleKind::kMolecularWeight, {}, {}, std::nullopt}; }

  double raw(const MolGraph& g) const;
  // raw() with normalization applied when present.
  double evaluate(const MolGraph& g) const;
};

double penalized_logp_raw(const MolGraph& g, const LogpParams& params);
// Throws WrongOracle unless oracle.kind is kPenalizedLogp.
double penalized_logp(const MolGraph& g, const PropertyOracle& oracle);

// Geometric mean of Gaussian desirabilities of molecular weight, raw logP
// surrogate and ring count; in (0, 1]. Throws EmptyGraph / WrongOracle.
double qed_surrogate(const MolGraph& g, const PropertyOracle& oracle);

// Attaches population (mean, stddev) of raw scores over the corpus.
// Throws DegenerateCorpus for fewer than two graphs or zero variance.
PropertyOracle fit_normalization(std::span<const MolGraph> corpus, PropertyOracle oracle);

}  // namespace bbrt
