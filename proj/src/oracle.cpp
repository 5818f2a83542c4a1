// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/oracle.hpp"

#include <cmath>
#include <string>

#include "bbrt/error.hpp"

namespace bbrt {

std::string_view oracle_name(OracleKind kind) noexcept {
  switch (kind) {
    case OracleKind::kPenalizedLogp: return "penalized-logp-surrogate";
    case OracleKind::kQed: return "qed-surrogate";
    case OracleKind::kMolecularWeight: return "molecular-weight";
  }
  return "unknown";
}

OracleKind parse_oracle_kind(std::string_view name) {
  if (name == "penalized-logp-surrogate" || name == "penalized-logp" || name == "logp") return OracleKind::kPenalizedLogp;
  if (name == "qed-surrogate" || name == "qed") return OracleKind::kQed;
  if (name == "molecular-weight" || name == "mw") return OracleKind::kMolecularWeight;
  throw Error(ErrorCode::kConfig, "unknown oracle '" + std::string(name) + "'");
}

double penalized_logp_raw(const MolGraph& g, const LogpParams& p) {
  int carbon = 0, soft = 0, polar = 0, fluorine = 0, branch_points = 0;
  for (std::size_t i = 0; i < g.atom_count(); ++i) {
    switch (g.atoms()[i].element) {
      case Element::C: ++carbon; break;
      case Element::S:
      case Element::Cl:
      case Element::Br: ++soft; break;
      case Element::N:
      case Element::O: ++polar; break;
      case Element::F: ++fluorine; break;
    }
    if (g.degree(i) >= 3) ++branch_points;
  }
  const auto rings = ring_info(g);
  double ring_penalty = 0.0;
  for (int size : rings) ring_penalty += std::max(0, size - p.ring_size_limit);

  const double hydrophobic = p.carbon * carbon + p.soft_hetero * soft;
  const double hetero = p.polar * polar + p.fluorine * fluorine;
  const double sa = p.sa_atom * static_cast<double>(g.atom_count()) + p.sa_branch * branch_points +
                    p.sa_ring * static_cast<double>(rings.size());
  return hydrophobic - hetero - sa - ring_penalty;
}

double penalized_logp(const MolGraph& g, const PropertyOracle& oracle) {
  if (oracle.kind != OracleKind::kPenalizedLogp) {
    throw Error(ErrorCode::kWrongOracle, "expected penalized-logp-surrogate, got " + std::string(oracle_name(oracle.kind)));
  }
  return oracle.evaluate(g);
}

namespace {

double desirability(double v, double center, double width) {
  const double z = v - center;
  return std::exp(-(z * z) / (2.0 * width * width));
}

double qed_raw(const MolGraph& g, const PropertyOracle& oracle) {
  if (g.empty()) throw Error(ErrorCode::kEmptyGraph, "qed of an empty graph");
  const QedParams& q = oracle.qed;
  const double d_mw = desirability(molecular_weight(g), q.mw_center, q.mw_width);
  const double d_logp = desirability(penalized_logp_raw(g, oracle.logp), q.logp_center, q.logp_width);
  const double d_ring = desirability(static_cast<double>(ring_info(g).size()), q.ring_center, q.ring_width);
  return std::cbrt(d_mw * d_logp * d_ring);
}

}  // namespace

double qed_surrogate(const MolGraph& g, const PropertyOracle& oracle) {
  if (oracle.kind != OracleKind::kQed) {
    throw Error(ErrorCode::kWrongOracle, "expected qed-surrogate, got " + std::string(oracle_name(oracle.kind)));
  }
  return qed_raw(g, oracle);
}

double PropertyOracle::raw(const MolGraph& g) const {
  switch (kind) {
    case OracleKind::kPenalizedLogp: return penalized_logp_raw(g, logp);
    case OracleKind::kQed: return qed_raw(g, *this);
    case OracleKind::kMolecularWeight: return bbrt::molecular_weight(g);
  }
  return 0.0;
}

double PropertyOracle::evaluate(const MolGraph& g) const {
  const double r = raw(g);
  if (!normalization) return r;
  return (r - normalization->mean) / normalization->stddev;
}

PropertyOracle fit_normalization(std::span<const MolGraph> corpus, PropertyOracle oracle) {
  if (corpus.size() < 2) throw Error(ErrorCode::kDegenerateCorpus, "normalization needs at least two graphs");
  std::vector<double> values;
  values.reserve(corpus.size());
  for (const MolGraph& g : corpus) values.push_back(oracle.raw(g));
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  if (!(var > 0.0) || !std::isfinite(var)) throw Error(ErrorCode::kDegenerateCorpus, "corpus scores have zero variance");
  oracle.normalization = Normalization{mean, std::sqrt(var)};
  return oracle;
}

}  // namespace bbrt
