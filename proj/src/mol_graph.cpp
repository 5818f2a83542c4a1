// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/mol_graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>

#include "bbrt/error.hpp"

namespace bbrt {

int MolGraph::bond_order_sum(std::size_t atom) const {
  int s = 0;
  for (const auto& n : adjacency_.at(atom)) s += n.order;
  return s;
}

std::optional<std::size_t> MolGraph::find_bond(std::size_t a, std::size_t b) const {
  for (std::size_t i = 0; i < bonds_.size(); ++i) {
    const Bond& bd = bonds_[i];
    if ((bd.a == a && bd.b == b) || (bd.a == b && bd.b == a)) return i;
  }
  return std::nullopt;
}

std::uint32_t MolGraph::add_atom(Element e) {
  const int v = max_valence(e);
  atoms_.push_back({e, v, v});
  adjacency_.emplace_back();
  return static_cast<std::uint32_t>(atoms_.size() - 1);
}

void MolGraph::add_bond(std::size_t a, std::size_t b, int order) {
  if (a >= atoms_.size() || b >= atoms_.size()) throw Error(ErrorCode::kInvalidArgument, "bond atom out of range");
  if (a == b) throw Error(ErrorCode::kInvalidArgument, "self-loop bond");
  if (order < 1 || order > 3) throw Error(ErrorCode::kInvalidArgument, "bond order must be 1..3");
  if (find_bond(a, b)) throw Error(ErrorCode::kInvalidArgument, "duplicate bond");
  if (atoms_[a].implicit_h < order || atoms_[b].implicit_h < order) {
    throw Error(ErrorCode::kInvalidArgument, "bond exceeds valence");
  }
  bonds_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), order});
  adjacency_[a].push_back({static_cast<std::uint32_t>(b), order});
  adjacency_[b].push_back({static_cast<std::uint32_t>(a), order});
  atoms_[a].implicit_h -= order;
  atoms_[b].implicit_h -= order;
}

void MolGraph::increment_bond(std::size_t a, std::size_t b) {
  auto idx = find_bond(a, b);
  if (!idx) throw Error(ErrorCode::kInvalidArgument, "no such bond");
  Bond& bd = bonds_[*idx];
  if (bd.order >= 3) throw Error(ErrorCode::kInvalidArgument, "bond order already 3");
  if (atoms_[a].implicit_h < 1 || atoms_[b].implicit_h < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bond exceeds valence");
  }
  ++bd.order;
  for (auto& n : adjacency_[a]) if (n.atom == b) ++n.order;
  for (auto& n : adjacency_[b]) if (n.atom == a) ++n.order;
  --atoms_[a].implicit_h;
  --atoms_[b].implicit_h;
}

std::string MolGraph::check_invariants() const {
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  std::vector<int> used(atoms_.size(), 0);
  for (const Bond& b : bonds_) {
    if (b.a == b.b) return "self-loop";
    if (b.a >= atoms_.size() || b.b >= atoms_.size()) return "bond index out of range";
    if (b.order < 1 || b.order > 3) return "bond order out of range";
    if (!seen.insert(std::minmax(b.a, b.b)).second) return "duplicate bond";
    used[b.a] += b.order;
    used[b.b] += b.order;
  }
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Atom& a = atoms_[i];
    if (a.max_valence != max_valence(a.element)) return "wrong max valence";
    if (used[i] > a.max_valence) return "valence exceeded at atom " + std::to_string(i);
    if (a.implicit_h != a.max_valence - used[i]) return "implicit H mismatch at atom " + std::to_string(i);
  }
  if (!atoms_.empty()) {
    std::vector<char> reached(atoms_.size(), 0);
    std::vector<std::uint32_t> stack{0};
    reached[0] = 1;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (const auto& n : adjacency_[v]) {
        if (!reached[n.atom]) {
          reached[n.atom] = 1;
          stack.push_back(n.atom);
        }
      }
    }
    if (std::find(reached.begin(), reached.end(), 0) != reached.end()) return "disconnected";
  }
  return {};
}

namespace {

class Deriver {
 public:
  explicit Deriver(std::span<const Token> seq) : seq_(seq) {}

  DecodeResult run() {
    derive(0, seq_.size(), std::nullopt);
    return {std::move(graph_), skipped_};
  }

 private:
  void derive(std::size_t begin, std::size_t end, std::optional<std::uint32_t> attach) {
    std::optional<std::uint32_t> cur = attach;
    std::size_t i = begin;
    while (i < end) {
      const TokenInfo& info = token_info(seq_[i]);
      switch (info.kind) {
        case TokenKind::kAtom: {
          if (!cur) {
            cur = graph_.add_atom(info.element);
          } else {
            const int cap = std::min({info.bond_order, graph_.remaining_valence(*cur), max_valence(info.element)});
            if (cap == 0) {
              ++skipped_;
            } else {
              const std::uint32_t next = graph_.add_atom(info.element);
              graph_.add_bond(*cur, next, cap);
              cur = next;
            }
          }
          ++i;
          break;
        }
        case TokenKind::kBranch: {
          if (!cur) {
            // Nothing to hang the branch on; its body continues the main chain.
            ++skipped_;
            ++i;
            break;
          }
          const std::size_t body_end = std::min(end, i + 1 + static_cast<std::size_t>(info.branch_size));
          derive(i + 1, body_end, cur);
          i = body_end;
          break;
        }
        case TokenKind::kRing: {
          apply_ring(cur, static_cast<std::uint32_t>(info.ring_lookback));
          ++i;
          break;
        }
      }
    }
  }

  void apply_ring(std::optional<std::uint32_t> cur, std::uint32_t lookback) {
    if (!cur || *cur < lookback) {
      ++skipped_;
      return;
    }
    const std::uint32_t target = *cur - lookback;
    if (graph_.remaining_valence(*cur) < 1 || graph_.remaining_valence(target) < 1) {
      ++skipped_;
      return;
    }
    if (auto b = graph_.find_bond(*cur, target)) {
      if (graph_.bonds()[*b].order >= 3) {
        ++skipped_;
        return;
      }
      graph_.increment_bond(*cur, target);
    } else {
      graph_.add_bond(*cur, target, 1);
    }
  }

  std::span<const Token> seq_;
  MolGraph graph_;
  std::size_t skipped_ = 0;
};

using EdgeSet = std::vector<std::uint64_t>;

bool edge_set_empty(const EdgeSet& s) {
  return std::all_of(s.begin(), s.end(), [](std::uint64_t w) { return w == 0; });
}

int highest_bit(const EdgeSet& s) {
  for (std::size_t w = s.size(); w-- > 0;) {
    if (s[w]) return static_cast<int>(w * 64 + 63 - static_cast<std::size_t>(__builtin_clzll(s[w])));
  }
  return -1;
}

}  // namespace

DecodeResult decode_with_diagnostics(std::span<const Token> seq) { return Deriver(seq).run(); }

MolGraph decode(std::span<const Token> seq) { return Deriver(seq).run().graph; }

double molecular_weight(const MolGraph& g) {
  double mass = 0.0;
  int hydrogens = 0;
  for (const Atom& a : g.atoms()) {
    mass += atomic_weight(a.element);
    hydrogens += a.implicit_h;
  }
  return mass + kHydrogenWeight * hydrogens;
}

// Horton candidate set (for every root v and edge (x, y): the BFS-tree paths
// v->x and v->y joined by the edge, when they meet only at v) followed by
// greedy GF(2) independence over edge incidence vectors.
std::vector<std::vector<std::uint32_t>> minimum_cycle_basis(const MolGraph& g) {
  const std::size_t n = g.atom_count();
  const std::size_t m = g.bond_count();
  if (n == 0 || m + 1 <= n) return {};
  const std::size_t dim = m - n + 1;
  const std::size_t words = (m + 63) / 64;

  struct Candidate {
    std::vector<std::uint32_t> atoms;  // sorted
    EdgeSet edges;
  };
  std::vector<Candidate> candidates;
  std::set<EdgeSet> seen;

  auto edge_index = [&](std::uint32_t a, std::uint32_t b) { return *g.find_bond(a, b); };

  for (std::uint32_t root = 0; root < n; ++root) {
    std::vector<int> dist(n, -1);
    std::vector<std::uint32_t> parent(n, root);
    std::queue<std::uint32_t> q;
    dist[root] = 0;
    q.push(root);
    while (!q.empty()) {
      auto v = q.front();
      q.pop();
      for (const auto& nb : g.neighbors(v)) {
        if (dist[nb.atom] < 0) {
          dist[nb.atom] = dist[v] + 1;
          parent[nb.atom] = v;
          q.push(nb.atom);
        }
      }
    }
    auto path_to_root = [&](std::uint32_t v) {
      std::vector<std::uint32_t> p{v};
      while (v != root) {
        v = parent[v];
        p.push_back(v);
      }
      return p;
    };
    for (const Bond& bd : g.bonds()) {
      if ((bd.a != root && parent[bd.a] == bd.b) || (bd.b != root && parent[bd.b] == bd.a)) continue;
      const auto px = path_to_root(bd.a);
      const auto py = path_to_root(bd.b);
      std::vector<std::uint32_t> sx(px.begin(), px.end()), sy(py.begin(), py.end());
      std::sort(sx.begin(), sx.end());
      std::sort(sy.begin(), sy.end());
      std::vector<std::uint32_t> common;
      std::set_intersection(sx.begin(), sx.end(), sy.begin(), sy.end(), std::back_inserter(common));
      if (common.size() != 1) continue;  // paths overlap beyond the root (or edge is on the tree path)
      Candidate c;
      c.edges.assign(words, 0);
      auto set_edge = [&](std::size_t e) { c.edges[e / 64] ^= (std::uint64_t{1} << (e % 64)); };
      for (std::size_t k = 0; k + 1 < px.size(); ++k) set_edge(edge_index(px[k], px[k + 1]));
      for (std::size_t k = 0; k + 1 < py.size(); ++k) set_edge(edge_index(py[k], py[k + 1]));
      set_edge(edge_index(bd.a, bd.b));
      if (!seen.insert(c.edges).second) continue;
      std::set_union(sx.begin(), sx.end(), sy.begin(), sy.end(), std::back_inserter(c.atoms));
      candidates.push_back(std::move(c));
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.atoms.size() != y.atoms.size()) return x.atoms.size() < y.atoms.size();
    return x.atoms < y.atoms;
  });

  std::vector<std::vector<std::uint32_t>> basis;
  std::vector<EdgeSet> pivot_rows(m);
  std::vector<char> has_pivot(m, 0);
  for (const Candidate& c : candidates) {
    EdgeSet v = c.edges;
    for (int h = highest_bit(v); h >= 0; h = highest_bit(v)) {
      if (!has_pivot[h]) {
        pivot_rows[h] = v;
        has_pivot[h] = 1;
        break;
      }
      for (std::size_t w = 0; w < words; ++w) v[w] ^= pivot_rows[h][w];
    }
    if (edge_set_empty(v)) continue;
    basis.push_back(c.atoms);
    if (basis.size() == dim) break;
  }
  return basis;
}

std::vector<int> ring_info(const MolGraph& g) {
  std::vector<int> sizes;
  for (const auto& cycle : minimum_cycle_basis(g)) sizes.push_back(static_cast<int>(cycle.size()));
  return sizes;
}

}  // namespace bbrt
