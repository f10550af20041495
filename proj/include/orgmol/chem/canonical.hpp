#ifndef ORGMOL_CHEM_CANONICAL_HPP
#define ORGMOL_CHEM_CANONICAL_HPP

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "orgmol/chem/molgraph.hpp"

namespace orgmol {

struct DisconnectedFragment : Error {
  DisconnectedFragment() : Error("fragment is not connected") {}
};

namespace detail {

inline const std::set<std::string>& organic_subset() {
  static const std::set<std::string> subset = {"B", "C", "N", "O", "P",
                                               "S", "F", "Cl", "Br", "I"};
  return subset;
}

inline std::string atom_token(const Atom& a) {
  if (a.formal_charge == 0 && organic_subset().count(a.element))
    return a.element;
  std::string tok = "[" + a.element;
  if (a.formal_charge != 0) {
    tok += a.formal_charge > 0 ? '+' : '-';
    int mag = std::abs(a.formal_charge);
    if (mag > 1) tok += std::to_string(mag);
  }
  tok += ']';
  return tok;
}

inline std::string bond_token(int order) {
  switch (order) {
    case 2: return "=";
    case 3: return "#";
    default: return "";
  }
}

// Iterative Morgan-style refinement: ranks stabilize when another round no
// longer increases the number of distinct classes.
inline std::vector<int> refine_ranks(const MolGraph& mol, std::vector<int> ranks) {
  const int n = mol.atom_count();
  int classes = static_cast<int>(std::set<int>(ranks.begin(), ranks.end()).size());
  while (true) {
    std::vector<std::pair<std::vector<int>, int>> keys(n);
    for (int i = 0; i < n; ++i) {
      std::vector<int> key{ranks[i]};
      std::vector<std::pair<int, int>> nb;
      for (int bid : mol.incident_bonds(i)) {
        const Bond& b = mol.bond(bid);
        nb.emplace_back(b.order, ranks[b.other(i)]);
      }
      std::sort(nb.begin(), nb.end());
      for (auto& [o, r] : nb) {
        key.push_back(o);
        key.push_back(r);
      }
      keys[i] = {std::move(key), i};
    }
    std::vector<std::pair<std::vector<int>, int>> sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> next(n, 0);
    int rank = 0;
    for (size_t s = 0; s < sorted.size(); ++s) {
      if (s > 0 && sorted[s].first != sorted[s - 1].first) ++rank;
      next[sorted[s].second] = rank;
    }
    int next_classes = rank + 1;
    if (next_classes == classes) return next;
    classes = next_classes;
    ranks = std::move(next);
  }
}

inline std::vector<int> initial_ranks(const MolGraph& mol) {
  const int n = mol.atom_count();
  std::vector<std::pair<std::tuple<std::string, int, int, int>, int>> keys(n);
  for (int i = 0; i < n; ++i) {
    keys[i] = {{mol.atom(i).element, mol.atom(i).formal_charge, mol.degree(i),
                mol.bond_order_sum(i)},
               i};
  }
  auto sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> ranks(n, 0);
  int rank = 0;
  for (int s = 0; s < n; ++s) {
    if (s > 0 && sorted[s].first != sorted[s - 1].first) ++rank;
    ranks[sorted[s].second] = rank;
  }
  return ranks;
}

// Writes one connected component as SMILES following the given total order.
class SmilesWriter {
 public:
  SmilesWriter(const MolGraph& mol, const std::vector<int>& ranks)
      : mol_(mol), ranks_(ranks), visited_(mol.atom_count(), false) {}

  std::string write(int root) {
    collect_ring_bonds(root);
    std::string out;
    emit(root, -1, out);
    return out;
  }

 private:
  void collect_ring_bonds(int root) {
    // DFS with the same neighbor order as emission; non-tree edges become
    // ring-closure bonds.
    std::vector<bool> seen(mol_.atom_count(), false);
    std::set<int> tree_or_ring;
    dfs_mark(root, -1, seen, tree_or_ring);
  }

  void dfs_mark(int a, int parent_bond, std::vector<bool>& seen,
                std::set<int>& classified) {
    seen[a] = true;
    for (int bid : ordered_bonds(a)) {
      if (bid == parent_bond || classified.count(bid)) continue;
      const Bond& b = mol_.bond(bid);
      int other = b.other(a);
      classified.insert(bid);
      if (seen[other]) {
        ring_bonds_.insert(bid);
      } else {
        dfs_mark(other, bid, seen, classified);
      }
    }
  }

  std::vector<int> ordered_bonds(int a) const {
    std::vector<int> bonds = mol_.incident_bonds(a);
    std::sort(bonds.begin(), bonds.end(), [&](int x, int y) {
      const Bond& bx = mol_.bond(x);
      const Bond& by = mol_.bond(y);
      int rx = ranks_[bx.other(a)], ry = ranks_[by.other(a)];
      if (rx != ry) return rx < ry;
      return bx.order < by.order;
    });
    return bonds;
  }

  std::string ring_digit(int number) const {
    if (number < 10) return std::to_string(number);
    return "%" + std::to_string(number);
  }

  void emit(int a, int parent_bond, std::string& out) {
    visited_[a] = true;
    out += atom_token(mol_.atom(a));
    std::vector<int> children;
    for (int bid : ordered_bonds(a)) {
      if (bid == parent_bond) continue;
      if (ring_bonds_.count(bid)) {
        auto it = open_digit_.find(bid);
        if (it == open_digit_.end()) {
          int num = next_digit_++;
          open_digit_[bid] = num;
          out += bond_token(mol_.bond(bid).order);
          out += ring_digit(num);
        } else {
          out += ring_digit(it->second);
        }
      } else if (!visited_[mol_.bond(bid).other(a)]) {
        children.push_back(bid);
      }
    }
    for (size_t c = 0; c < children.size(); ++c) {
      int bid = children[c];
      bool last = (c + 1 == children.size());
      if (!last) out += '(';
      out += bond_token(mol_.bond(bid).order);
      emit(mol_.bond(bid).other(a), bid, out);
      if (!last) out += ')';
    }
  }

  const MolGraph& mol_;
  const std::vector<int>& ranks_;
  std::vector<bool> visited_;
  std::set<int> ring_bonds_;
  std::map<int, int> open_digit_;
  int next_digit_ = 1;
};

inline std::string write_with_ranks(const MolGraph& mol,
                                    const std::vector<int>& ranks) {
  int root = 0;
  for (int i = 1; i < mol.atom_count(); ++i)
    if (ranks[i] < ranks[root]) root = i;
  SmilesWriter writer(mol, ranks);
  return writer.write(root);
}

// Resolves remaining rank ties by branching on each tied atom and keeping the
// lexicographically smallest emitted string.
inline std::string canon_connected(const MolGraph& mol, std::vector<int> ranks) {
  ranks = refine_ranks(mol, ranks);
  const int n = mol.atom_count();
  std::vector<std::vector<int>> classes(n);
  for (int i = 0; i < n; ++i) classes[ranks[i]].push_back(i);
  int tied_rank = -1;
  for (int r = 0; r < n; ++r) {
    if (classes[r].size() > 1) {
      tied_rank = r;
      break;
    }
  }
  if (tied_rank < 0) return write_with_ranks(mol, ranks);
  std::string best;
  for (int candidate : classes[tied_rank]) {
    std::vector<int> branched = ranks;
    for (int i = 0; i < n; ++i)
      if (branched[i] > tied_rank || (branched[i] == tied_rank && i != candidate))
        ++branched[i];
    branched[candidate] = tied_rank;
    std::string s = canon_connected(mol, std::move(branched));
    if (best.empty() || s < best) best = std::move(s);
  }
  return best;
}

}  // namespace detail

// Canonical SMILES: deterministic, identical for isomorphic graphs.
// Disconnected graphs are written as '.'-joined sorted component strings.
inline std::string write_canonical_smiles(const MolGraph& mol) {
  if (mol.atom_count() == 0) throw EmptyGraph();
  auto components = mol.connected_components();
  std::vector<std::string> parts;
  for (const auto& comp : components) {
    MolGraph sub = mol.induced_subgraph(comp);
    parts.push_back(detail::canon_connected(sub, detail::initial_ranks(sub)));
  }
  std::sort(parts.begin(), parts.end());
  std::string out = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) out += "." + parts[i];
  return out;
}

// Fragment identity string; bond orders and charges are part of the key.
inline std::string canonical_key(const MolGraph& sub) {
  if (sub.atom_count() == 0) throw EmptyGraph();
  if (!sub.connected()) throw DisconnectedFragment();
  return detail::canon_connected(sub, detail::initial_ranks(sub));
}

// Largest component by atom count; ties broken by total bond order, then by
// smaller canonical key.
inline MolGraph largest_connected_component(const MolGraph& mol) {
  if (mol.atom_count() == 0) throw EmptyGraph();
  auto components = mol.connected_components();
  MolGraph best;
  int best_atoms = -1, best_orders = -1;
  std::string best_key;
  for (const auto& comp : components) {
    MolGraph sub = mol.induced_subgraph(comp);
    int orders = 0;
    for (const Bond& b : sub.bonds()) orders += b.order;
    int atoms = sub.atom_count();
    if (atoms < best_atoms) continue;
    std::string key;
    if (atoms == best_atoms) {
      if (orders < best_orders) continue;
      if (orders == best_orders) {
        key = canonical_key(sub);
        if (key >= best_key) continue;
      }
    }
    if (key.empty()) key = canonical_key(sub);
    best = std::move(sub);
    best_atoms = atoms;
    best_orders = orders;
    best_key = std::move(key);
  }
  return best;
}

}  // namespace orgmol

#endif  // ORGMOL_CHEM_CANONICAL_HPP
