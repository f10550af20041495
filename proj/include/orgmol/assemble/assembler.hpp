#ifndef ORGMOL_ASSEMBLE_ASSEMBLER_HPP
#define ORGMOL_ASSEMBLE_ASSEMBLER_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "orgmol/bonds/scorer.hpp"
#include "orgmol/chem/canonical.hpp"
#include "orgmol/chem/molgraph.hpp"
#include "orgmol/diffusion/sde.hpp"
#include "orgmol/frag/decompose.hpp"
#include "orgmol/frag/vocab.hpp"

namespace orgmol {

struct NoFragments : Error {
  NoFragments() : Error("assembly requires at least one fragment") {}
};

struct AssemblyConfig {
  double threshold = 0.5;  // a candidate bond needs score > threshold
  int ring_min = 5;        // newly created rings must fall in this range
  int ring_max = 6;
};

struct EdgeCandidate {
  int u = 0;
  int v = 0;
  std::vector<double> probs;  // 4-simplex over bond types
  double score = 0.0;         // max prob
  int best_type = 0;          // argmax type
};

// Fragments materialized as one disconnected molecule: atoms and
// intra-fragment bonds only, plus the bookkeeping the bond scorer needs.
struct PartialAssembly {
  MolGraph mol;
  Decomposition dec;
};

inline PartialAssembly materialize(const QuantizedGraph& g,
                                   const FragmentVocab& vocab) {
  if (g.fragment_ids.empty()) throw NoFragments();
  const int nf = static_cast<int>(g.fragment_ids.size());
  PartialAssembly out;
  for (int f = 0; f < nf; ++f) {
    const VocabEntry& entry = vocab.entry(g.fragment_ids[f]);
    std::vector<int> atoms;
    int base = out.mol.atom_count();
    for (int i = 0; i < entry.tmpl.atom_count(); ++i) {
      const Atom& a = entry.tmpl.atom(i);
      atoms.push_back(out.mol.add_atom(a.element, a.formal_charge));
      out.dec.frag_of.push_back(f);
    }
    for (const Bond& b : entry.tmpl.bonds())
      out.mol.add_bond(base + b.u, base + b.v, b.order);
    out.dec.fragments.push_back(entry.tmpl);
    out.dec.fragment_atoms.push_back(std::move(atoms));
    out.dec.keys.push_back(entry.key);
  }
  out.dec.adjacency.assign(nf, std::vector<int>(nf, 0));
  for (int i = 0; i < nf; ++i)
    for (int j = 0; j < nf; ++j)
      out.dec.adjacency[i][j] = g.adjacency[i * nf + j] ? 1 : 0;
  return out;
}

// All unordered atom pairs in distinct fragments whose fragments are
// adjacent; intra-fragment pairs never qualify.
inline std::vector<std::pair<int, int>> candidate_edges(
    const PartialAssembly& pa) {
  std::vector<std::pair<int, int>> out;
  const int n = pa.mol.atom_count();
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      int fu = pa.dec.frag_of[u], fv = pa.dec.frag_of[v];
      if (fu == fv || !pa.dec.adjacency[fu][fv]) continue;
      out.push_back({u, v});
    }
  return out;
}

// Orientation-averaged softmax over bond types; score = max probability.
inline std::vector<EdgeCandidate> score_candidates(
    const PartialAssembly& pa, const std::vector<std::pair<int, int>>& cands,
    const BondScorerParams& scorer, const FragmentVocab& vocab) {
  std::vector<EdgeCandidate> out;
  if (cands.empty()) return out;

  Tape t;
  auto p = stage_params(t, scorer.params, false);
  auto h = encode_nodes(t, scorer, p, pa.mol, pa.dec, vocab);
  std::vector<PairExample> pairs;
  for (const auto& [u, v] : cands) {
    pairs.push_back({u, v, 0});
    pairs.push_back({v, u, 0});
  }
  Tensor logits = t.value(predict_pairs(t, p, h, pairs));

  for (size_t i = 0; i < cands.size(); ++i) {
    EdgeCandidate c;
    c.u = cands[i].first;
    c.v = cands[i].second;
    int r = static_cast<int>(2 * i);
    double mx = 0.0;
    std::vector<double> avg(kBondTypes);
    for (int k = 0; k < kBondTypes; ++k) {
      avg[k] = 0.5 * (logits.at(r, k) + logits.at(r + 1, k));
      mx = std::max(mx, avg[k]);
    }
    double total = 0.0;
    for (double& a : avg) total += (a = std::exp(a - mx));
    c.probs.resize(kBondTypes);
    for (int k = 0; k < kBondTypes; ++k) {
      c.probs[k] = avg[k] / total;
      if (c.probs[k] > c.score) {
        c.score = c.probs[k];
        c.best_type = k;
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

namespace detail {

inline bool rule_check(const MolGraph& mol, int u, int v, int order,
                       const AssemblyConfig& cfg, const ValenceTable& table) {
  if (valence_headroom(mol, u, table) < order) return false;
  if (valence_headroom(mol, v, table) < order) return false;
  auto ring = smallest_ring_through(mol, u, v);
  return !ring || (*ring >= cfg.ring_min && *ring <= cfg.ring_max);
}

}  // namespace detail

// Greedy decode: candidates sorted by descending score (ties by ascending
// (u,v)), each added when it clears the threshold, names a real bond type and
// passes the valence and new-ring rules. The largest connected component is
// the result, so over-filtering degrades to the biggest fragment.
inline MolGraph assemble(const QuantizedGraph& g, const FragmentVocab& vocab,
                         const BondScorerParams& scorer,
                         const AssemblyConfig& cfg = {},
                         const ValenceTable& table = default_valence_table()) {
  PartialAssembly pa = materialize(g, vocab);
  auto scored = score_candidates(pa, candidate_edges(pa), scorer, vocab);
  std::sort(scored.begin(), scored.end(),
            [](const EdgeCandidate& a, const EdgeCandidate& b) {
              if (a.score != b.score) return a.score > b.score;
              return std::pair(a.u, a.v) < std::pair(b.u, b.v);
            });
  for (const EdgeCandidate& c : scored) {
    if (c.score <= cfg.threshold || c.best_type == 0) continue;
    if (!detail::rule_check(pa.mol, c.u, c.v, c.best_type, cfg, table))
      continue;
    pa.mol.add_bond(c.u, c.v, c.best_type);
  }
  return largest_connected_component(pa.mol);
}

// Ablation decode: every adjacent fragment pair gets one uniformly chosen
// valence-feasible atom pair joined by a single bond; pairs with no feasible
// atoms are skipped.
inline MolGraph assemble_random(const QuantizedGraph& g,
                                const FragmentVocab& vocab, std::mt19937& rng,
                                const ValenceTable& table =
                                    default_valence_table()) {
  PartialAssembly pa = materialize(g, vocab);
  const int nf = pa.dec.fragment_count();
  for (int i = 0; i < nf; ++i)
    for (int j = i + 1; j < nf; ++j) {
      if (!pa.dec.adjacency[i][j]) continue;
      std::vector<std::pair<int, int>> feasible;
      for (int u : pa.dec.fragment_atoms[i])
        for (int v : pa.dec.fragment_atoms[j])
          if (valence_headroom(pa.mol, u, table) >= 1 &&
              valence_headroom(pa.mol, v, table) >= 1)
            feasible.push_back({u, v});
      if (feasible.empty()) continue;
      std::uniform_int_distribution<size_t> pick(0, feasible.size() - 1);
      auto [u, v] = feasible[pick(rng)];
      pa.mol.add_bond(u, v, 1);
    }
  return largest_connected_component(pa.mol);
}

}  // namespace orgmol

#endif  // ORGMOL_ASSEMBLE_ASSEMBLER_HPP
