#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "orgmol/assemble/assembler.hpp"
#include "orgmol/chem/smiles.hpp"

using orgmol::AssemblyConfig;
using orgmol::BondConfig;
using orgmol::BondScorerParams;
using orgmol::EdgeCandidate;
using orgmol::FragmentVocab;
using orgmol::MolGraph;
using orgmol::PartialAssembly;
using orgmol::QuantizedGraph;
using orgmol::ValenceTable;

namespace {

FragmentVocab toy_vocab() {
  FragmentVocab v;
  v.add_entry("C", true);
  v.add_entry("F", true);
  v.add_entry("O", true);
  v.add_entry("CC", false);
  v.add_entry("CCC", false);
  v.add_entry("FC(F)(F)F", false);
  return v;
}

QuantizedGraph chain_graph(std::vector<int> ids) {
  QuantizedGraph g;
  g.fragment_ids = std::move(ids);
  int n = static_cast<int>(g.fragment_ids.size());
  g.adjacency.assign(n * n, 0);
  for (int i = 0; i + 1 < n; ++i)
    g.adjacency[i * n + i + 1] = g.adjacency[(i + 1) * n + i] = 1;
  return g;
}

BondConfig small_config() {
  BondConfig cfg;
  cfg.atom_dim = 3;
  cfg.frag_dim = 3;
  cfg.node_dim = 5;
  cfg.edge_dim = 3;
  cfg.iterations = 2;
  return cfg;
}

// Scorer whose logits are the given constants for every pair.
BondScorerParams constant_scorer(const FragmentVocab& vocab,
                                 std::vector<double> logits) {
  std::mt19937 rng(1);
  BondScorerParams sp =
      orgmol::init_bond_scorer(vocab, ValenceTable{}, small_config(), rng);
  for (auto& [name, tensor] : sp.params)
    std::fill(tensor.data.begin(), tensor.data.end(), 0.0);
  sp.params.at("bond.head1.b").data = std::move(logits);
  return sp;
}

BondScorerParams random_scorer(const FragmentVocab& vocab, unsigned seed) {
  std::mt19937 rng(seed);
  return orgmol::init_bond_scorer(vocab, ValenceTable{}, small_config(), rng);
}

std::string key_of(const MolGraph& mol) { return orgmol::canonical_key(mol); }

}  // namespace

TEST_CASE("candidate edges", "[assemble]") {
  FragmentVocab vocab = toy_vocab();

  SECTION("empty fragment list is rejected") {
    QuantizedGraph g;
    REQUIRE_THROWS_AS(orgmol::materialize(g, vocab), orgmol::NoFragments);
  }

  SECTION("adjacent fragments of sizes 3 and 2 give 6 candidates") {
    PartialAssembly pa =
        orgmol::materialize(chain_graph({vocab.rank_of("CCC"),
                                         vocab.rank_of("CC")}),
                            vocab);
    auto cands = orgmol::candidate_edges(pa);
    REQUIRE(cands.size() == 6);
    for (const auto& [u, v] : cands) {
      REQUIRE(pa.dec.frag_of[u] != pa.dec.frag_of[v]);
      REQUIRE_FALSE(pa.mol.bond_between(u, v).has_value());
    }
  }

  SECTION("no fragment adjacency means no candidates") {
    QuantizedGraph g;
    g.fragment_ids = {vocab.rank_of("CC"), vocab.rank_of("CC")};
    g.adjacency.assign(4, 0);
    PartialAssembly pa = orgmol::materialize(g, vocab);
    REQUIRE(orgmol::candidate_edges(pa).empty());
  }
}

TEST_CASE("candidate scoring", "[assemble]") {
  FragmentVocab vocab = toy_vocab();
  QuantizedGraph g = chain_graph({vocab.rank_of("C"), vocab.rank_of("O")});
  PartialAssembly pa = orgmol::materialize(g, vocab);
  auto cands = orgmol::candidate_edges(pa);
  REQUIRE(cands.size() == 1);

  SECTION("all-zero scorer is uniform") {
    auto scored = orgmol::score_candidates(
        pa, cands, constant_scorer(vocab, {0, 0, 0, 0}), vocab);
    REQUIRE(scored.size() == 1);
    for (double p : scored[0].probs)
      REQUIRE(p == Catch::Approx(0.25).margin(1e-12));
    REQUIRE(scored[0].score == Catch::Approx(0.25).margin(1e-12));
  }

  SECTION("logits [2,0,0,0] score e^2/(e^2+3)") {
    auto scored = orgmol::score_candidates(
        pa, cands, constant_scorer(vocab, {2, 0, 0, 0}), vocab);
    double expect = std::exp(2.0) / (std::exp(2.0) + 3.0);
    REQUIRE(scored[0].score == Catch::Approx(expect).margin(1e-12));
    REQUIRE(scored[0].best_type == 0);
  }

  SECTION("score is invariant to endpoint order") {
    BondScorerParams sp = random_scorer(vocab, 42);
    auto fwd = orgmol::score_candidates(pa, {{0, 1}}, sp, vocab);
    auto rev = orgmol::score_candidates(pa, {{1, 0}}, sp, vocab);
    for (int k = 0; k < orgmol::kBondTypes; ++k)
      REQUIRE(fwd[0].probs[k] == Catch::Approx(rev[0].probs[k]).margin(1e-14));
    REQUIRE(fwd[0].best_type == rev[0].best_type);
  }
}

TEST_CASE("greedy assembly", "[assemble]") {
  FragmentVocab vocab = toy_vocab();
  // Confident single-bond predictor: p(single) = e^5/(e^5+3) > 0.97.
  BondScorerParams single = constant_scorer(vocab, {0, 5, 0, 0});

  SECTION("two atoms join into one molecule") {
    MolGraph out = orgmol::assemble(
        chain_graph({vocab.rank_of("C"), vocab.rank_of("O")}), vocab, single);
    REQUIRE(out.atom_count() == 2);
    REQUIRE(key_of(out) == key_of(orgmol::parse_smiles("CO")));
  }

  SECTION("threshold above the score suppresses all bonds") {
    AssemblyConfig cfg;
    cfg.threshold = 0.99;
    MolGraph out = orgmol::assemble(
        chain_graph({vocab.rank_of("CCC"), vocab.rank_of("C")}), vocab, single,
        cfg);
    REQUIRE(out.atom_count() == 3);  // largest fragment survives alone
  }

  SECTION("new 3- and 4-rings are rejected") {
    MolGraph out = orgmol::assemble(
        chain_graph({vocab.rank_of("CC"), vocab.rank_of("CC")}), vocab,
        single);
    // One cross bond joins the chains; every further bond would close a
    // ring shorter than 5.
    REQUIRE(out.atom_count() == 4);
    REQUIRE(out.bond_count() == 3);
    REQUIRE(key_of(out) == key_of(orgmol::parse_smiles("CCCC")));
  }

  SECTION("a 5-ring closure is allowed") {
    MolGraph out = orgmol::assemble(
        chain_graph({vocab.rank_of("CCC"), vocab.rank_of("CC")}), vocab,
        single);
    REQUIRE(out.atom_count() == 5);
    REQUIRE(out.bond_count() == 5);
    REQUIRE(key_of(out) == key_of(orgmol::parse_smiles("C1CCCC1")));
  }

  SECTION("saturated atoms reject all bonds") {
    MolGraph out = orgmol::assemble(
        chain_graph({vocab.rank_of("FC(F)(F)F"), vocab.rank_of("C")}), vocab,
        single);
    REQUIRE(out.atom_count() == 5);
    REQUIRE(key_of(out) == key_of(orgmol::parse_smiles("FC(F)(F)F")));
  }

  SECTION("raising the threshold never adds bonds") {
    BondScorerParams sp = random_scorer(vocab, 7);
    QuantizedGraph g = chain_graph(
        {vocab.rank_of("CCC"), vocab.rank_of("CC"), vocab.rank_of("O")});
    int prev = 1 << 20;
    for (double th : {0.0, 0.3, 0.6, 0.9}) {
      AssemblyConfig cfg;
      cfg.threshold = th;
      MolGraph out = orgmol::assemble(g, vocab, sp, cfg);
      REQUIRE(out.bond_count() <= prev);
      prev = out.bond_count();
      REQUIRE(orgmol::satisfies_valence(out));
    }
  }

  SECTION("assembly is deterministic") {
    BondScorerParams sp = random_scorer(vocab, 9);
    QuantizedGraph g = chain_graph(
        {vocab.rank_of("CC"), vocab.rank_of("CCC"), vocab.rank_of("C")});
    MolGraph a = orgmol::assemble(g, vocab, sp);
    MolGraph b = orgmol::assemble(g, vocab, sp);
    REQUIRE(key_of(a) == key_of(b));
  }

  SECTION("intra-fragment bonds are never modified") {
    BondScorerParams sp = random_scorer(vocab, 11);
    QuantizedGraph g =
        chain_graph({vocab.rank_of("CCC"), vocab.rank_of("CC")});
    MolGraph out = orgmol::assemble(g, vocab, sp, AssemblyConfig{0.0, 5, 6});
    // The metarule: output atoms are a subset of the fragment atoms and the
    // chains' internal single bonds survive untouched.
    REQUIRE(out.atom_count() <= 5);
    for (const orgmol::Bond& b : out.bonds()) REQUIRE(b.order >= 1);
    REQUIRE(orgmol::satisfies_valence(out));
  }
}

TEST_CASE("random assembly ablation", "[assemble]") {
  FragmentVocab vocab = toy_vocab();
  QuantizedGraph g = chain_graph(
      {vocab.rank_of("CCC"), vocab.rank_of("CC"), vocab.rank_of("O")});

  SECTION("seeded runs are reproducible") {
    std::mt19937 r1(31), r2(31);
    MolGraph a = orgmol::assemble_random(g, vocab, r1);
    MolGraph b = orgmol::assemble_random(g, vocab, r2);
    REQUIRE(key_of(a) == key_of(b));
  }

  SECTION("outputs always satisfy valence") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      MolGraph out = orgmol::assemble_random(g, vocab, rng);
      REQUIRE(orgmol::satisfies_valence(out));
      REQUIRE(out.atom_count() == 6);  // single bonds always feasible here
    }
  }

  SECTION("saturated fragments are skipped, not forced") {
    QuantizedGraph sat = chain_graph(
        {vocab.rank_of("FC(F)(F)F"), vocab.rank_of("FC(F)(F)F")});
    std::mt19937 rng(3);
    MolGraph out = orgmol::assemble_random(sat, vocab, rng);
    REQUIRE(out.atom_count() == 5);
  }

  SECTION("empty input is rejected") {
    std::mt19937 rng(1);
    REQUIRE_THROWS_AS(orgmol::assemble_random(QuantizedGraph{}, vocab, rng),
                      orgmol::NoFragments);
  }
}
