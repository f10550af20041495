#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "orgmol/eval/metrics.hpp"
#include "orgmol/frag/vocab.hpp"

using orgmol::Decomposition;
using orgmol::FragmentVocab;
using orgmol::MolGraph;

TEST_CASE("validity", "[eval]") {
  SECTION("all parseable and valence-clean") {
    REQUIRE(orgmol::validity({"CCO", "C=O", "N#C"}) == 100.0);
  }

  SECTION("one invalid of four") {
    REQUIRE(orgmol::validity({"CCO", "C(", "CC", "CN"}) == 75.0);
  }

  SECTION("valence violations count as invalid") {
    REQUIRE(orgmol::validity({"F=F", "C"}) == 50.0);  // F budget is 1
  }

  SECTION("aborted samples lower validity through the denominator") {
    REQUIRE(orgmol::validity({"CC", "CC"}, 4) == 50.0);
  }

  SECTION("empty set rejected") {
    REQUIRE_THROWS_AS(orgmol::validity({}), orgmol::EmptySet);
  }
}

TEST_CASE("uniqueness", "[eval]") {
  auto keys = orgmol::valid_keys({"CCO", "OCC", "C"});

  SECTION("permuted duplicates collapse") {
    REQUIRE(keys.size() == 3);
    REQUIRE(orgmol::uniqueness(keys) == Catch::Approx(100.0 * 2 / 3));
  }

  SECTION("all distinct") {
    REQUIRE(orgmol::uniqueness(orgmol::valid_keys({"C", "O", "N"})) == 100.0);
  }

  SECTION("invariant under reordering") {
    auto shuffled = keys;
    std::mt19937 rng(4);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    REQUIRE(orgmol::uniqueness(shuffled) == orgmol::uniqueness(keys));
  }

  SECTION("empty set rejected") {
    REQUIRE_THROWS_AS(orgmol::uniqueness({}), orgmol::EmptySet);
  }
}

TEST_CASE("novelty", "[eval]") {
  auto train_list = orgmol::valid_keys({"CC", "CO"});
  std::set<std::string> train(train_list.begin(), train_list.end());

  SECTION("all generated in training set") {
    REQUIRE(orgmol::novelty(orgmol::valid_keys({"CC", "OC"}), train) == 0.0);
  }

  SECTION("disjoint sets") {
    REQUIRE(orgmol::novelty(orgmol::valid_keys({"NN", "CS"}), train) == 100.0);
  }

  SECTION("half of the distinct keys are new") {
    auto keys = orgmol::valid_keys({"CC", "NN", "NN"});
    REQUIRE(orgmol::novelty(keys, train) == 50.0);
  }
}

TEST_CASE("structure report", "[eval]") {
  SECTION("empty corpus rejected") {
    REQUIRE_THROWS_AS(orgmol::structure_report({}), orgmol::EmptyCorpus);
  }

  SECTION("single-atom corpus is a point mass") {
    std::vector<MolGraph> mols = {orgmol::parse_smiles("C"),
                                  orgmol::parse_smiles("C")};
    FragmentVocab vocab = orgmol::build_vocab(mols, 1);
    std::vector<Decomposition> dec;
    for (const auto& m : mols) dec.push_back(orgmol::decompose(m, vocab));
    std::string csv = orgmol::structure_report(dec);
    REQUIRE(csv.find("fragment_count,1,2") != std::string::npos);
    REQUIRE(csv.find("atom_count,1,2") != std::string::npos);
    REQUIRE(csv.find("fragment_size_proportion,1,1") != std::string::npos);
  }

  SECTION("fragment count never exceeds atom count") {
    std::vector<MolGraph> mols = {orgmol::parse_smiles("CCC=O"),
                                  orgmol::parse_smiles("CC=CC"),
                                  orgmol::parse_smiles("COC=O")};
    FragmentVocab vocab = orgmol::build_vocab(mols, 4);
    for (const auto& m : mols) {
      Decomposition d = orgmol::decompose(m, vocab);
      REQUIRE(d.fragment_count() <= m.atom_count());
    }
  }
}

TEST_CASE("generation report", "[eval]") {
  std::vector<MolGraph> corpus = {orgmol::parse_smiles("CCO"),
                                  orgmol::parse_smiles("CCC")};
  FragmentVocab vocab = orgmol::build_vocab(corpus, 3);
  std::set<std::string> train;
  for (const auto& m : corpus) train.insert(orgmol::canonical_key(m));

  auto report =
      orgmol::build_report({"CCO", "CN", "CN", "xx"}, 5, train, &vocab);
  REQUIRE(report.n_requested == 5);
  REQUIRE(report.n_emitted == 4);
  REQUIRE(report.validity == 60.0);                    // 3 valid of 5
  REQUIRE(report.uniqueness == Catch::Approx(100.0 * 2 / 3));
  REQUIRE(report.novelty == 50.0);                     // CN is new, CCO is not
  REQUIRE(report.atom_count_hist.at(2) == 2);
  REQUIRE(report.atom_count_hist.at(3) == 1);

  std::string json = orgmol::to_json(report);
  REQUIRE(json.find("\"n_requested\": 5") != std::string::npos);
  REQUIRE(json.find("\"validity\": 60") != std::string::npos);
  REQUIRE(json.find("\"atom_count_hist\": {\"2\": 2, \"3\": 1}") !=
          std::string::npos);
}
