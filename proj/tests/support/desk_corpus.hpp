#ifndef ORGMOL_TESTS_SUPPORT_DESK_CORPUS_HPP
#define ORGMOL_TESTS_SUPPORT_DESK_CORPUS_HPP

#include <string>
#include <vector>

#include "orgmol/chem/canonical.hpp"
#include "orgmol/chem/smiles.hpp"

namespace desk {

// One corpus family: two saturated blocks joined at their attachment atoms
// (atom 0 of each block) by a typed linker bond. The closed form uses
// `order`, the open form a single bond. Copy counts steer the vocabulary
// merge order: open forms are frequent enough to merge into one fragment,
// closed forms stay split into the two blocks.
struct Family {
  std::string block_x;  // attachment atom first
  std::string block_y;
  int order;
  int closed_copies;
  int open_copies;
};

inline std::vector<Family> families() {
  return {
      {"C(F)C(F)(F)C(F)(F)F", "C(Cl)C(F)(F)C(F)(F)F", 2, 92, 100},
      {"C(F)OC(F)(F)C(F)(F)F", "C(Cl)OC(F)(F)F", 2, 88, 100},
      {"C(F)OC(F)(F)F", "NC(F)(F)C(F)(F)F", 2, 94, 100},
      {"C(F)C(F)(F)OC(F)(F)F", "NC(F)(F)OC(F)(F)F", 2, 88, 100},
      {"NC(F)(F)Cl", "NC(Cl)(F)C(F)(F)F", 2, 88, 100},
      {"CC(F)(F)C(F)(F)F", "CC(F)(F)OC(F)(F)F", 3, 92, 100},
      {"CC(Cl)(F)C(F)(F)F", "CC(F)(F)Cl", 3, 88, 100},
      {"CC(Cl)(Cl)F", "N", 3, 88, 100},
      {"CC(F)(F)C(Cl)(F)F", "N", 3, 88, 100},
      {"C(F)C(Cl)(F)C(F)(F)F", "O", 2, 88, 100},
      {"C(Cl)C(F)(F)OC(F)(F)F", "O", 2, 88, 100},
  };
}

// Saturated bromine-marked molecules that only ever decompose to a single
// fragment. Their copy count keeps every internal merge ahead of the family
// merges; the set size positions the vocabulary budget cutoff just past the
// open-form merges.
inline std::vector<std::string> filler_smiles() {
  return {
      "BrC(Br)(Br)Br",
      "BrC(Br)(Br)C(Br)(Br)Br",
      "FC(Br)(Br)C(Br)(Br)F",
      "ClC(Br)(Br)C(Br)(Br)Cl",
      "BrC(F)(F)C(F)(F)Br",
      "BrC(Cl)(Cl)C(Cl)(Cl)Br",
      "BrC(Br)(Br)OC(Br)(Br)Br",
      "BrC(Br)(Br)N(C(Br)(Br)Br)C(Br)(Br)Br",
      "BrC(Br)(Br)C(Br)(Br)C(Br)(Br)Br",
      "FC(Br)(Cl)C(Cl)(Br)F",
      "BrC(Br)(F)OC(F)(Br)Br",
      "BrC(Br)(Cl)OC(Cl)(Br)Br",
      "BrC(Br)(Br)C(F)(F)C(Br)(Br)Br",
      "BrC(Br)(Br)C(Cl)(Cl)C(Br)(Br)Br",
      "BrC(Br)(Br)C(F)(Cl)C(Br)(Br)Br",
      "BrC(Br)(Br)C(Br)(Br)OC(Br)(Br)Br",
      "FC(F)(Br)C(Br)(F)F",
      "ClC(Cl)(Br)C(Br)(Cl)Cl",
      "BrC(Br)(Br)N(C(F)(F)F)C(Br)(Br)Br",
      "BrC(Br)(Br)OC(F)(F)F",
      "BrC(Br)(Br)C(F)(Br)C(Br)(Br)Br",
      "BrC(Br)(Br)C(Cl)(Br)C(Br)(Br)Br",
      "BrC(Br)(Br)OC(Br)(Br)OC(Br)(Br)Br",
      "BrC(Br)(Br)C(Br)(Br)C(Br)(Br)C(Br)(Br)Br",
      "FC(Br)(Br)OC(Br)(Br)F",
      "ClC(Br)(Br)OC(Br)(Br)Cl",
      "BrC(Br)(F)C(F)(Br)Br",
      "ClC(Cl)(Br)C(Br)(Br)Br",
      "FC(F)(Br)C(Br)(Cl)Cl",
      "FC(Br)(Br)F",
      "ClC(Br)(Br)Cl",
      "FC(Br)(Br)Cl",
      "BrC(Br)(Br)C(Br)(F)F",
  };
}

inline constexpr int kFillerCopies = 200;

inline orgmol::MolGraph join_blocks(const Family& f, int order) {
  orgmol::MolGraph x = orgmol::parse_smiles(f.block_x);
  orgmol::MolGraph y = orgmol::parse_smiles(f.block_y);
  int base = x.atom_count();
  for (int i = 0; i < y.atom_count(); ++i)
    x.add_atom(y.atom(i).element, y.atom(i).formal_charge);
  for (const orgmol::Bond& b : y.bonds())
    x.add_bond(base + b.u, base + b.v, b.order);
  x.add_bond(0, base, order);
  return x;
}

inline orgmol::MolGraph closed_form(const Family& f) {
  return join_blocks(f, f.order);
}

inline orgmol::MolGraph open_form(const Family& f) {
  return join_blocks(f, 1);
}

// Deterministic corpus, one canonical SMILES per line, grouped by family,
// fillers last.
inline std::vector<std::string> corpus_smiles() {
  std::vector<std::string> lines;
  for (const Family& f : families()) {
    std::string closed = orgmol::canonical_key(closed_form(f));
    std::string open = orgmol::canonical_key(open_form(f));
    for (int i = 0; i < f.closed_copies; ++i) lines.push_back(closed);
    for (int i = 0; i < f.open_copies; ++i) lines.push_back(open);
  }
  for (const std::string& s : filler_smiles()) {
    std::string key = orgmol::canonical_key(orgmol::parse_smiles(s));
    for (int i = 0; i < kFillerCopies; ++i) lines.push_back(key);
  }
  return lines;
}

}  // namespace desk

#endif  // ORGMOL_TESTS_SUPPORT_DESK_CORPUS_HPP
