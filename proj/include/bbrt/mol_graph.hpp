// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bbrt/selfies.hpp"

namespace bbrt {

struct Atom {
  Element element = Element::C;
  int max_valence = 4;
  int implicit_h = 4;
};

struct Bond {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  int order = 1;
};

// Heavy-atom graph with integer bond orders. Mutators enforce the valence
// invariants, so every reachable MolGraph is chemically valid: incident bond
// orders never exceed the element's max valence, and implicit hydrogens fill
// the remainder.
class MolGraph {
 public:
  struct Neighbor {
    std::uint32_t atom;
    int order;
  };

  std::size_t atom_count() const noexcept { return atoms_.size(); }
  std::size_t bond_count() const noexcept { return bonds_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<Bond>& bonds() const noexcept { return bonds_; }
  std::span<const Neighbor> neighbors(std::size_t atom) const { return adjacency_.at(atom); }

  int degree(std::size_t atom) const { return static_cast<int>(adjacency_.at(atom).size()); }
  int bond_order_sum(std::size_t atom) const;
  int remaining_valence(std::size_t atom) const { return atoms_.at(atom).implicit_h; }

  // Index into bonds(), if a and b are bonded.
  std::optional<std::size_t> find_bond(std::size_t a, std::size_t b) const;

  std::uint32_t add_atom(Element e);
  // Throws InvalidArgument on self-loops, duplicates or valence overflow.
  void add_bond(std::size_t a, std::size_t b, int order);
  // Raises an existing bond's order by one; same validity checks.
  void increment_bond(std::size_t a, std::size_t b);

  // Empty string when all invariants hold, else a description of the first
  // violation. Used by fuzz tests; never fails for graphs built via the API.
  std::string check_invariants() const;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

struct DecodeResult {
  MolGraph graph;
  std::size_t skipped = 0;  // tokens that could not legally attach
};

// Total over in-alphabet sequences. Derivation rules:
//  - an atom token bonds to the current attachment atom with its requested
//    order, capped by the remaining valence of both endpoints; a cap of zero
//    skips the token. The new atom becomes the attachment point.
//  - [BranchN] derives the next N tokens as a side chain hanging off the
//    current atom; the main chain then continues from that atom.
//  - [RingN] bonds the current atom to the atom created N atoms earlier
//    (or raises an existing bond's order), if both have valence left.
DecodeResult decode_with_diagnostics(std::span<const Token> seq);
MolGraph decode(std::span<const Token> seq);

double molecular_weight(const MolGraph& g);

// Vertex lists of a minimum cycle basis, shortest first; ties broken by the
// lexicographic order of the sorted atom indices.
std::vector<std::vector<std::uint32_t>> minimum_cycle_basis(const MolGraph& g);
std::vector<int> ring_info(const MolGraph& g);

}  // namespace bbrt
