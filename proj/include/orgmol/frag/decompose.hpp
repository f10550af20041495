#ifndef ORGMOL_FRAG_DECOMPOSE_HPP
#define ORGMOL_FRAG_DECOMPOSE_HPP

#include <map>
#include <string>
#include <vector>

#include "orgmol/frag/vocab.hpp"

namespace orgmol {

struct UnknownAtomType : Error {
  explicit UnknownAtomType(const std::string& key)
      : Error("atom type not in vocabulary: " + key) {}
};
struct UnknownFragmentKey : Error {
  explicit UnknownFragmentKey(const std::string& key)
      : Error("fragment key not in vocabulary: " + key) {}
};
struct TooManyFragments : Error {
  TooManyFragments() : Error("decomposition exceeds n_max fragments") {}
};

struct InterEdge {
  int u = 0;  // atom indices in the source molecule
  int v = 0;
  int order = 1;
};

// Partition of a molecule into vocabulary fragments plus the bonds that
// cross fragment boundaries. Fragments are indexed by ascending smallest
// source-atom index.
struct Decomposition {
  std::vector<MolGraph> fragments;
  std::vector<std::vector<int>> fragment_atoms;  // source atom ids, sorted
  std::vector<std::string> keys;
  std::vector<int> frag_of;  // atom index -> fragment index
  std::vector<InterEdge> inter_edges;
  std::vector<std::vector<int>> adjacency;  // 0/1, zero diagonal

  int fragment_count() const { return static_cast<int>(fragments.size()); }
};

// Replays vocabulary merges in rank order over the all-singleton partition.
inline Decomposition decompose(const MolGraph& mol, const FragmentVocab& vocab) {
  for (int i = 0; i < mol.atom_count(); ++i) {
    MolGraph one;
    one.add_atom(mol.atom(i).element, mol.atom(i).formal_charge);
    std::string key = canonical_key(one);
    if (!vocab.contains(key) || vocab.rank_of(key) >= vocab.atom_base_count())
      throw UnknownAtomType(key);
  }
  detail::FragPartition part(mol);
  for (int rank = vocab.atom_base_count(); rank < vocab.size(); ++rank)
    part.merge_all(vocab.entry(rank).key);

  Decomposition d;
  for (const auto& atoms : part.frag_atoms)
    if (!atoms.empty()) d.fragment_atoms.push_back(atoms);
  std::sort(d.fragment_atoms.begin(), d.fragment_atoms.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  d.frag_of.assign(mol.atom_count(), -1);
  for (size_t f = 0; f < d.fragment_atoms.size(); ++f) {
    for (int atom : d.fragment_atoms[f]) d.frag_of[atom] = static_cast<int>(f);
    MolGraph sub = mol.induced_subgraph(d.fragment_atoms[f]);
    d.keys.push_back(canonical_key(sub));
    d.fragments.push_back(std::move(sub));
  }
  const int nf = d.fragment_count();
  d.adjacency.assign(nf, std::vector<int>(nf, 0));
  for (const Bond& b : mol.bonds()) {
    int fi = d.frag_of[b.u], fj = d.frag_of[b.v];
    if (fi == fj) continue;
    d.inter_edges.push_back(InterEdge{b.u, b.v, b.order});
    d.adjacency[fi][fj] = 1;
    d.adjacency[fj][fi] = 1;
  }
  return d;
}

// Union of fragments plus inter-fragment edges; must reproduce the source.
inline MolGraph reassemble(const Decomposition& d) {
  int n = static_cast<int>(d.frag_of.size());
  MolGraph mol;
  std::vector<std::pair<std::string, int>> atoms(n);
  for (int f = 0; f < d.fragment_count(); ++f)
    for (size_t local = 0; local < d.fragment_atoms[f].size(); ++local) {
      const Atom& a = d.fragments[f].atom(static_cast<int>(local));
      atoms[d.fragment_atoms[f][local]] = {a.element, a.formal_charge};
    }
  for (auto& [element, charge] : atoms) mol.add_atom(element, charge);
  for (int f = 0; f < d.fragment_count(); ++f)
    for (const Bond& b : d.fragments[f].bonds())
      mol.add_bond(d.fragment_atoms[f][b.u], d.fragment_atoms[f][b.v], b.order);
  for (const InterEdge& e : d.inter_edges) mol.add_bond(e.u, e.v, e.order);
  return mol;
}

// Padded diffusion state: one-hot fragment rows, 0/1 fragment adjacency,
// boolean mask. Row-major doubles.
struct FragGraphTensor {
  int n_max = 0;
  int k = 0;
  int n_live = 0;
  std::vector<double> F;          // n_max * k
  std::vector<double> C;          // n_max * n_max, symmetric, zero diagonal
  std::vector<std::uint8_t> mask; // n_max

  double& f_at(int i, int j) { return F[i * k + j]; }
  double f_at(int i, int j) const { return F[i * k + j]; }
  double& c_at(int i, int j) { return C[i * n_max + j]; }
  double c_at(int i, int j) const { return C[i * n_max + j]; }
};

inline FragGraphTensor to_tensor(const Decomposition& d,
                                 const FragmentVocab& vocab, int n_max) {
  if (d.fragment_count() > n_max) throw TooManyFragments();
  FragGraphTensor t;
  t.n_max = n_max;
  t.k = vocab.size();
  t.n_live = d.fragment_count();
  t.F.assign(static_cast<size_t>(n_max) * t.k, 0.0);
  t.C.assign(static_cast<size_t>(n_max) * n_max, 0.0);
  t.mask.assign(n_max, 0);
  for (int f = 0; f < d.fragment_count(); ++f) {
    if (!vocab.contains(d.keys[f])) throw UnknownFragmentKey(d.keys[f]);
    t.f_at(f, vocab.rank_of(d.keys[f])) = 1.0;
    t.mask[f] = 1;
  }
  for (int i = 0; i < d.fragment_count(); ++i)
    for (int j = 0; j < d.fragment_count(); ++j)
      if (i != j && d.adjacency[i][j]) t.c_at(i, j) = 1.0;
  return t;
}

// Normalized histogram over fragment counts; the sampler draws n_live from it.
struct FragmentCountHistogram {
  std::map<int, double> probability;  // n_live -> fraction
  int max_fragments = 0;
  double mean = 0.0;
};

inline FragmentCountHistogram fragment_count_distribution(
    const std::vector<Decomposition>& corpus) {
  if (corpus.empty()) throw EmptyCorpus();
  FragmentCountHistogram h;
  std::map<int, long> counts;
  long total = 0;
  for (const auto& d : corpus) {
    ++counts[d.fragment_count()];
    ++total;
    h.max_fragments = std::max(h.max_fragments, d.fragment_count());
    h.mean += d.fragment_count();
  }
  h.mean /= static_cast<double>(total);
  for (auto [n, c] : counts)
    h.probability[n] = static_cast<double>(c) / static_cast<double>(total);
  return h;
}

// Proportion of fragments with a given atom count, over a decomposed corpus.
inline std::map<int, double> fragment_size_proportions(
    const std::vector<Decomposition>& corpus) {
  if (corpus.empty()) throw EmptyCorpus();
  std::map<int, long> counts;
  long total = 0;
  for (const auto& d : corpus)
    for (const auto& frag : d.fragments) {
      ++counts[frag.atom_count()];
      ++total;
    }
  std::map<int, double> out;
  for (auto [n, c] : counts)
    out[n] = static_cast<double>(c) / static_cast<double>(total);
  return out;
}

}  // namespace orgmol

#endif  // ORGMOL_FRAG_DECOMPOSE_HPP
