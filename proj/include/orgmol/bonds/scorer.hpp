#ifndef ORGMOL_BONDS_SCORER_HPP
#define ORGMOL_BONDS_SCORER_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "orgmol/chem/molgraph.hpp"
#include "orgmol/frag/decompose.hpp"
#include "orgmol/frag/vocab.hpp"
#include "orgmol/nets/score_nets.hpp"
#include "orgmol/tensor/adam.hpp"
#include "orgmol/tensor/tape.hpp"

namespace orgmol {

// Bond type order is fixed: 0 none, 1 single, 2 double, 3 triple.
constexpr int kBondTypes = 4;

struct BondConfig {
  int atom_dim = 50;
  int frag_dim = 100;
  int node_dim = 300;
  int edge_dim = 16;
  int iterations = 4;
};

struct BondScorerParams {
  BondConfig cfg;
  std::vector<std::string> elements;  // atom embedding row order
  int vocab_size = 0;                 // fragment embedding row count
  ParamMap params;
  std::uint64_t vocab_fingerprint = 0;
};

struct PairExample {
  int u = 0;
  int v = 0;
  int label = 0;  // bond type index; 0 for sampled non-bonded pairs
};

namespace detail {

inline int atom_type_index(const BondScorerParams& p, const std::string& el) {
  auto it = std::find(p.elements.begin(), p.elements.end(), el);
  if (it == p.elements.end()) throw UnknownAtomType(el);
  return static_cast<int>(it - p.elements.begin());
}

}  // namespace detail

inline BondScorerParams init_bond_scorer(const FragmentVocab& vocab,
                                         const ValenceTable& table,
                                         const BondConfig& cfg,
                                         std::mt19937& rng) {
  BondScorerParams p;
  p.cfg = cfg;
  for (const auto& [element, budget] : table.entries())
    p.elements.push_back(element);
  p.vocab_size = vocab.size();
  p.vocab_fingerprint = vocab.fingerprint();

  ParamMap& m = p.params;
  m["bond.atom_emb"] =
      detail::glorot(static_cast<int>(p.elements.size()), cfg.atom_dim, rng);
  m["bond.frag_emb"] = detail::glorot(p.vocab_size, cfg.frag_dim, rng);
  m["bond.edge_emb"] = detail::glorot(kBondTypes, cfg.edge_dim, rng);
  detail::add_linear(m, "bond.proj", cfg.atom_dim + cfg.frag_dim, cfg.node_dim,
                     rng);
  detail::add_linear(m, "bond.edgeproj", cfg.edge_dim, cfg.node_dim, rng);
  for (int i = 0; i < cfg.iterations; ++i) {
    const std::string base = "bond.gine" + std::to_string(i);
    m[base + ".eps"] = Tensor({1, 1});
    detail::add_linear(m, base + ".mlp0", cfg.node_dim, cfg.node_dim, rng);
    detail::add_linear(m, base + ".mlp1", cfg.node_dim, cfg.node_dim, rng);
    detail::add_linear(m, "bond.edge" + std::to_string(i), cfg.node_dim,
                       cfg.node_dim, rng);
  }
  detail::add_linear(m, "bond.head0", 2 * cfg.node_dim, cfg.node_dim, rng);
  detail::add_linear(m, "bond.head1", cfg.node_dim, kBondTypes, rng);
  return p;
}

// Positives: every inter-fragment bond in both orientations. Negatives:
// uniformly drawn cross-fragment non-bonded ordered pairs, neg_ratio per
// positive, never colliding with a bond. Single-fragment input yields nothing.
inline std::vector<PairExample> build_examples(const MolGraph& mol,
                                               const Decomposition& dec,
                                               double neg_ratio,
                                               std::mt19937& rng) {
  std::vector<PairExample> out;
  for (const InterEdge& e : dec.inter_edges) {
    out.push_back({e.u, e.v, e.order});
    out.push_back({e.v, e.u, e.order});
  }
  if (out.empty()) return out;

  std::vector<std::pair<int, int>> pool;
  const int n = mol.atom_count();
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      if (u == v || dec.frag_of[u] == dec.frag_of[v]) continue;
      if (mol.bond_between(u, v)) continue;
      pool.push_back({u, v});
    }
  std::shuffle(pool.begin(), pool.end(), rng);
  size_t want = static_cast<size_t>(neg_ratio * out.size() + 0.5);
  for (size_t i = 0; i < std::min(want, pool.size()); ++i)
    out.push_back({pool[i].first, pool[i].second, 0});
  return out;
}

// GINE encoder over the partially connected molecule. Only intra-fragment
// bonds are visible: the inter-fragment bonds being predicted never enter the
// input edge set.
inline Tape::NodeId encode_nodes(Tape& t, const BondScorerParams& sp,
                                 const ParamNodes& p, const MolGraph& mol,
                                 const Decomposition& dec,
                                 const FragmentVocab& vocab) {
  const int n = mol.atom_count();
  std::vector<int> atom_idx(n), frag_idx(n);
  for (int i = 0; i < n; ++i) {
    atom_idx[i] = detail::atom_type_index(sp, mol.atom(i).element);
    frag_idx[i] = vocab.rank_of(dec.keys[dec.frag_of[i]]);
  }

  // Intra-fragment adjacency split by bond order.
  std::vector<Tensor> adj(kBondTypes, Tensor({n, n}));
  std::vector<bool> type_present(kBondTypes, false);
  for (const Bond& b : mol.bonds()) {
    if (dec.frag_of[b.u] != dec.frag_of[b.v]) continue;
    int type = std::min(b.order, kBondTypes - 1);
    adj[type].at(b.u, b.v) = adj[type].at(b.v, b.u) = 1.0;
    type_present[type] = true;
  }

  auto h = detail::linear(
      t, p, "bond.proj",
      t.concat({t.gather_rows(p.at("bond.atom_emb"), atom_idx),
                t.gather_rows(p.at("bond.frag_emb"), frag_idx)},
               1));

  // Edge features start from the type embedding and pass through one linear
  // map per iteration.
  auto edge_state =
      detail::linear(t, p, "bond.edgeproj", p.at("bond.edge_emb"));

  Tensor ones_col({n, 1}, 1.0);
  Tensor ones_row({1, sp.cfg.node_dim}, 1.0);
  for (int i = 0; i < sp.cfg.iterations; ++i) {
    const std::string base = "bond.gine" + std::to_string(i);
    auto eps_row = t.matmul(p.at(base + ".eps"), t.constant(ones_row));
    auto eps_full = t.matmul(t.constant(ones_col), eps_row);
    auto self = t.add(h, t.mul(h, eps_full));
    Tape::NodeId agg = -1;
    for (int type = 1; type < kBondTypes; ++type) {
      if (!type_present[type]) continue;
      auto e_row = t.gather_rows(edge_state, {type});
      auto msg = t.matmul(t.constant(adj[type]), t.relu(t.add(h, e_row)));
      agg = agg < 0 ? msg : t.add(agg, msg);
    }
    auto pre = agg < 0 ? self : t.add(self, agg);
    h = detail::linear(t, p, base + ".mlp1",
                       t.relu(detail::linear(t, p, base + ".mlp0", pre)));
    edge_state = detail::linear(t, p, "bond.edge" + std::to_string(i),
                                edge_state);
  }
  return h;
}

// Orientation-sensitive logits for a batch of ordered pairs.
inline Tape::NodeId predict_pairs(Tape& t, const ParamNodes& p, Tape::NodeId h,
                                  const std::vector<PairExample>& pairs) {
  std::vector<int> us, vs;
  for (const PairExample& e : pairs) {
    us.push_back(e.u);
    vs.push_back(e.v);
  }
  auto cat = t.concat({t.gather_rows(h, us), t.gather_rows(h, vs)}, 1);
  return detail::linear(t, p, "bond.head1",
                        t.relu(detail::linear(t, p, "bond.head0", cat)));
}

inline Tape::NodeId nll_loss(Tape& t, Tape::NodeId logits,
                             const std::vector<PairExample>& pairs) {
  if (pairs.empty()) throw EmptyBatch();
  Tensor onehot({static_cast<int>(pairs.size()), kBondTypes});
  for (size_t i = 0; i < pairs.size(); ++i)
    onehot.at(static_cast<int>(i), pairs[i].label) = 1.0;
  auto logp = t.log(t.softmax_rows(logits));
  auto picked = t.sum(t.mul(logp, t.constant(std::move(onehot))));
  return t.scale(picked, -1.0 / static_cast<double>(pairs.size()));
}

inline double bond_loss(const BondScorerParams& sp, const MolGraph& mol,
                        const Decomposition& dec, const FragmentVocab& vocab,
                        const std::vector<PairExample>& examples) {
  if (examples.empty()) throw EmptyBatch();
  Tape t;
  auto p = stage_params(t, sp.params, false);
  auto h = encode_nodes(t, sp, p, mol, dec, vocab);
  auto loss = nll_loss(t, predict_pairs(t, p, h, examples), examples);
  return t.value(loss).data[0];
}

// Averaged-orientation class probabilities for one unordered pair.
inline std::vector<double> pair_probabilities(const BondScorerParams& sp,
                                              const MolGraph& mol,
                                              const Decomposition& dec,
                                              const FragmentVocab& vocab,
                                              int u, int v) {
  Tape t;
  auto p = stage_params(t, sp.params, false);
  auto h = encode_nodes(t, sp, p, mol, dec, vocab);
  std::vector<PairExample> both = {{u, v, 0}, {v, u, 0}};
  auto logits = t.value(predict_pairs(t, p, h, both));
  Tensor avg({1, kBondTypes});
  for (int c = 0; c < kBondTypes; ++c)
    avg.at(0, c) = 0.5 * (logits.at(0, c) + logits.at(1, c));
  Tape t2;
  auto sm = t2.softmax_rows(t2.constant(avg));
  return t2.value(sm).data;
}

struct BondTrainConfig {
  int epochs = 10;
  int batch_size = 32;
  double lr = 1e-3;
  double neg_ratio = 1.0;
  std::uint64_t seed = 0;
};

struct DecomposedMol {
  MolGraph mol;
  Decomposition dec;
};

inline BondScorerParams train_bond_scorer(const std::vector<DecomposedMol>& corpus,
                                          const FragmentVocab& vocab,
                                          const ValenceTable& table,
                                          const BondConfig& cfg,
                                          const BondTrainConfig& train,
                                          std::vector<double>* history = nullptr) {
  if (corpus.empty()) throw EmptyBatch();
  std::mt19937 rng(static_cast<std::uint32_t>(train.seed));
  BondScorerParams sp = init_bond_scorer(vocab, table, cfg, rng);

  AdamConfig acfg;
  acfg.lr = train.lr;
  Adam opt(acfg);

  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int counted = 0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(train.batch_size)) {
      Tape t;
      auto p = stage_params(t, sp.params);
      std::vector<Tape::NodeId> terms;
      for (size_t i = start;
           i < std::min(order.size(),
                        start + static_cast<size_t>(train.batch_size));
           ++i) {
        const DecomposedMol& dm = corpus[order[i]];
        auto examples = build_examples(dm.mol, dm.dec, train.neg_ratio, rng);
        if (examples.empty()) continue;
        auto h = encode_nodes(t, sp, p, dm.mol, dm.dec, vocab);
        terms.push_back(nll_loss(t, predict_pairs(t, p, h, examples), examples));
      }
      if (terms.empty()) continue;
      Tape::NodeId total = terms[0];
      for (size_t i = 1; i < terms.size(); ++i) total = t.add(total, terms[i]);
      total = t.scale(total, 1.0 / static_cast<double>(terms.size()));
      epoch_loss += t.value(total).data[0];
      ++counted;
      t.backward(total);
      for (auto& [name, param] : sp.params) {
        const Tensor& g = t.grad(p.at(name));
        opt.step(name, param, g.size() ? g : Tensor(param.shape));
      }
    }
    opt.end_epoch();
    if (history) history->push_back(counted ? epoch_loss / counted : 0.0);
  }
  return sp;
}

}  // namespace orgmol

#endif  // ORGMOL_BONDS_SCORER_HPP
