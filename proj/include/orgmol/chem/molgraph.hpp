#ifndef ORGMOL_CHEM_MOLGRAPH_HPP
#define ORGMOL_CHEM_MOLGRAPH_HPP

#include <algorithm>
#include <deque>
#include <optional>
#include <vector>

#include "orgmol/chem/elements.hpp"

namespace orgmol {

struct EmptyGraph : Error {
  EmptyGraph() : Error("operation on empty molecular graph") {}
};

struct ValenceViolation : Error {
  explicit ValenceViolation(const std::string& what) : Error(what) {}
};

struct Atom {
  std::string element;
  int formal_charge = 0;
};

struct Bond {
  int u = 0;
  int v = 0;
  int order = 1;  // 1, 2 or 3 after kekulization

  int other(int a) const { return a == u ? v : u; }
};

// Atom/bond attributed undirected graph. Hydrogens are implicit; bonds are
// kekulized (orders in {1,2,3}) for every graph produced by the parser.
class MolGraph {
 public:
  MolGraph() = default;

  int add_atom(std::string element, int formal_charge = 0) {
    atoms_.push_back(Atom{std::move(element), formal_charge});
    adjacency_.emplace_back();
    return static_cast<int>(atoms_.size()) - 1;
  }

  void add_bond(int u, int v, int order) {
    if (u == v) throw Error("self-loop bond rejected");
    if (u < 0 || v < 0 || u >= atom_count() || v >= atom_count())
      throw Error("bond endpoint out of range");
    if (bond_between(u, v)) throw Error("duplicate bond rejected");
    int id = static_cast<int>(bonds_.size());
    bonds_.push_back(Bond{std::min(u, v), std::max(u, v), order});
    adjacency_[u].push_back(id);
    adjacency_[v].push_back(id);
  }

  int atom_count() const { return static_cast<int>(atoms_.size()); }
  int bond_count() const { return static_cast<int>(bonds_.size()); }

  const Atom& atom(int i) const { return atoms_.at(i); }
  const Bond& bond(int i) const { return bonds_.at(i); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Bond>& bonds() const { return bonds_; }

  const std::vector<int>& incident_bonds(int atom) const {
    return adjacency_.at(atom);
  }

  int degree(int atom) const {
    return static_cast<int>(adjacency_.at(atom).size());
  }

  std::optional<int> bond_between(int u, int v) const {
    if (u < 0 || v < 0 || u >= atom_count() || v >= atom_count())
      return std::nullopt;
    for (int id : adjacency_[u]) {
      const Bond& b = bonds_[id];
      if (b.other(u) == v) return id;
    }
    return std::nullopt;
  }

  void set_bond_order(int bond_id, int order) { bonds_.at(bond_id).order = order; }

  int bond_order_sum(int atom) const {
    int total = 0;
    for (int id : adjacency_.at(atom)) total += bonds_[id].order;
    return total;
  }

  std::vector<int> neighbors(int atom) const {
    std::vector<int> out;
    out.reserve(adjacency_.at(atom).size());
    for (int id : adjacency_[atom]) out.push_back(bonds_[id].other(atom));
    return out;
  }

  // Induced subgraph on the given atoms; keeps every bond internal to the
  // set. `atom_map`, when non-null, receives original index -> new index.
  MolGraph induced_subgraph(const std::vector<int>& atom_ids,
                            std::vector<int>* atom_map = nullptr) const {
    MolGraph sub;
    std::vector<int> remap(atom_count(), -1);
    for (int id : atom_ids) {
      remap[id] = sub.add_atom(atoms_[id].element, atoms_[id].formal_charge);
    }
    for (const Bond& b : bonds_) {
      if (remap[b.u] >= 0 && remap[b.v] >= 0)
        sub.add_bond(remap[b.u], remap[b.v], b.order);
    }
    if (atom_map) *atom_map = std::move(remap);
    return sub;
  }

  std::vector<std::vector<int>> connected_components() const {
    std::vector<std::vector<int>> components;
    std::vector<bool> seen(atom_count(), false);
    for (int start = 0; start < atom_count(); ++start) {
      if (seen[start]) continue;
      std::vector<int> comp;
      std::deque<int> queue{start};
      seen[start] = true;
      while (!queue.empty()) {
        int a = queue.front();
        queue.pop_front();
        comp.push_back(a);
        for (int n : neighbors(a)) {
          if (!seen[n]) {
            seen[n] = true;
            queue.push_back(n);
          }
        }
      }
      std::sort(comp.begin(), comp.end());
      components.push_back(std::move(comp));
    }
    return components;
  }

  bool connected() const {
    if (atom_count() == 0) return true;
    return connected_components().size() == 1;
  }

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<int>> adjacency_;
};

// Remaining bond-order budget of an atom; 0 means no further bond may attach.
inline int valence_headroom(const MolGraph& mol, int atom,
                            const ValenceTable& table = default_valence_table()) {
  const Atom& a = mol.atom(atom);
  int headroom = table.budget(a.element, a.formal_charge) - mol.bond_order_sum(atom);
  return headroom < 0 ? 0 : headroom;
}

inline bool satisfies_valence(const MolGraph& mol,
                              const ValenceTable& table = default_valence_table()) {
  for (int i = 0; i < mol.atom_count(); ++i) {
    const Atom& a = mol.atom(i);
    if (!table.supported(a.element)) return false;
    if (mol.bond_order_sum(i) > table.budget(a.element, a.formal_charge))
      return false;
  }
  return true;
}

// Length of the shortest cycle that adding bond (u,v) would create, i.e. the
// shortest existing u-v path plus the closing bond; nullopt across components.
inline std::optional<int> smallest_ring_through(const MolGraph& mol, int u, int v) {
  std::vector<int> dist(mol.atom_count(), -1);
  std::deque<int> queue{u};
  dist[u] = 0;
  while (!queue.empty()) {
    int a = queue.front();
    queue.pop_front();
    if (a == v) return dist[v] + 1;
    for (int n : mol.neighbors(a)) {
      if (dist[n] < 0) {
        dist[n] = dist[a] + 1;
        queue.push_back(n);
      }
    }
  }
  return std::nullopt;
}

}  // namespace orgmol

#endif  // ORGMOL_CHEM_MOLGRAPH_HPP
