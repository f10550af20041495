#ifndef ORGMOL_CHEM_SMILES_HPP
#define ORGMOL_CHEM_SMILES_HPP

#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "orgmol/chem/canonical.hpp"
#include "orgmol/chem/molgraph.hpp"

namespace orgmol {

struct UnbalancedParenthesis : Error {
  UnbalancedParenthesis() : Error("unbalanced parenthesis in SMILES") {}
};
struct UnclosedRingBond : Error {
  UnclosedRingBond() : Error("ring-closure digit never closed") {}
};
struct KekulizationFailure : Error {
  KekulizationFailure() : Error("no Kekule assignment for aromatic system") {}
};

struct ParseOptions {
  bool strict_valence = true;
};

namespace detail {

// Lowest normal valence, used for implicit-H and double-bond-demand decisions
// inside aromatic systems (hypervalent budgets would mark o/s as needing a
// double bond).
inline int aromatic_valence(const std::string& element, int charge) {
  static const std::map<std::string, int> low = {
      {"B", 3}, {"C", 4}, {"N", 3},  {"O", 2},  {"P", 3},
      {"S", 2}, {"Se", 2}, {"Te", 2}, {"As", 3},
  };
  auto it = low.find(element);
  int base = it == low.end() ? default_valence_table().budget(element, 0) : it->second;
  if (element == "C") return std::max(0, base - std::abs(charge));
  return std::max(0, base + charge);
}

struct ParseAtom {
  std::string element;
  int formal_charge = 0;
  bool aromatic = false;
  int explicit_h = -1;  // -1 when not a bracket atom
};

struct ParseBond {
  int u, v;
  int order;      // 1..3; aromatic bonds carry 1 until kekulization
  bool aromatic;  // written between two aromatic atoms without a symbol
};

class SmilesParser {
 public:
  explicit SmilesParser(const std::string& text) : text_(text) {}

  void run() {
    int prev = -1;
    std::vector<int> branch_stack;
    int pending_order = 0;  // 0 = default bond
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '(') {
        if (prev < 0) throw Error("branch before any atom");
        branch_stack.push_back(prev);
        ++pos_;
      } else if (c == ')') {
        if (branch_stack.empty()) throw UnbalancedParenthesis();
        prev = branch_stack.back();
        branch_stack.pop_back();
        ++pos_;
      } else if (c == '-' || c == '=' || c == '#' || c == '/' || c == '\\') {
        pending_order = (c == '=') ? 2 : (c == '#') ? 3 : 1;
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        int num = read_ring_number();
        handle_ring_closure(prev, num, pending_order);
        pending_order = 0;
      } else {
        int atom = read_atom();
        if (prev >= 0) connect(prev, atom, pending_order);
        pending_order = 0;
        prev = atom;
      }
    }
    if (!branch_stack.empty()) throw UnbalancedParenthesis();
    if (!open_rings_.empty()) throw UnclosedRingBond();
  }

  std::vector<ParseAtom> atoms;
  std::vector<ParseBond> bonds;

 private:
  int read_ring_number() {
    if (text_[pos_] == '%') {
      ++pos_;
      if (pos_ + 1 >= text_.size() ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))
        throw Error("malformed %nn ring closure");
      int num = (text_[pos_] - '0') * 10 + (text_[pos_ + 1] - '0');
      pos_ += 2;
      return num;
    }
    return text_[pos_++] - '0';
  }

  void handle_ring_closure(int atom, int num, int pending_order) {
    if (atom < 0) throw Error("ring closure before any atom");
    auto it = open_rings_.find(num);
    if (it == open_rings_.end()) {
      open_rings_[num] = {atom, pending_order};
      return;
    }
    auto [other, open_order] = it->second;
    open_rings_.erase(it);
    int order = 0;
    if (open_order && pending_order && open_order != pending_order)
      throw Error("conflicting ring-closure bond orders");
    order = open_order ? open_order : pending_order;
    connect(other, atom, order);
  }

  void connect(int u, int v, int explicit_order) {
    if (u == v) throw Error("self bond");
    bool arom = atoms[u].aromatic && atoms[v].aromatic && explicit_order == 0;
    int order = explicit_order == 0 ? 1 : explicit_order;
    bonds.push_back(ParseBond{u, v, order, arom});
  }

  int read_atom() {
    char c = text_[pos_];
    if (c == '[') return read_bracket_atom();
    // Two-letter organic-subset symbols first.
    if (c == 'C' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'l') {
      pos_ += 2;
      return push_atom("Cl", 0, false, -1);
    }
    if (c == 'B' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'r') {
      pos_ += 2;
      return push_atom("Br", 0, false, -1);
    }
    static const std::string organic = "BCNOPSFI";
    static const std::string aromatic_organic = "bcnops";
    if (organic.find(c) != std::string::npos) {
      ++pos_;
      return push_atom(std::string(1, c), 0, false, -1);
    }
    if (aromatic_organic.find(c) != std::string::npos) {
      ++pos_;
      return push_atom(std::string(1, static_cast<char>(std::toupper(c))), 0,
                       true, -1);
    }
    throw UnknownElement(std::string(1, c));
  }

  int read_bracket_atom() {
    ++pos_;  // consume '['
    if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
      throw Error("isotopes are not supported");
    std::string element;
    bool aromatic = false;
    if (pos_ >= text_.size()) throw Error("truncated bracket atom");
    char c = text_[pos_];
    if (std::isupper(static_cast<unsigned char>(c))) {
      element += c;
      ++pos_;
      if (pos_ < text_.size() && std::islower(static_cast<unsigned char>(text_[pos_]))) {
        std::string two = element + text_[pos_];
        if (default_valence_table().supported(two) ||
            !default_valence_table().supported(element)) {
          element = two;
          ++pos_;
        }
      }
      if (!default_valence_table().supported(element))
        throw UnknownElement(element);
    } else if (std::islower(static_cast<unsigned char>(c))) {
      aromatic = true;
      element += static_cast<char>(std::toupper(c));
      ++pos_;
      if (pos_ < text_.size() && std::islower(static_cast<unsigned char>(text_[pos_]))) {
        std::string two = element + text_[pos_];
        if (default_valence_table().supported(two)) {
          element = two;
          ++pos_;
        }
      }
    } else {
      throw Error("malformed bracket atom");
    }
    int explicit_h = 0;
    int charge = 0;
    while (pos_ < text_.size() && text_[pos_] != ']') {
      char k = text_[pos_];
      if (k == '@') {
        ++pos_;  // stereo marker: accepted, discarded
      } else if (k == 'H') {
        ++pos_;
        explicit_h = 1;
        if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          explicit_h = text_[pos_] - '0';
          ++pos_;
        }
      } else if (k == '+' || k == '-') {
        int sign = (k == '+') ? 1 : -1;
        int mag = 0;
        while (pos_ < text_.size() && text_[pos_] == k) {
          ++mag;
          ++pos_;
        }
        if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          if (mag != 1) throw Error("malformed charge");
          mag = text_[pos_] - '0';
          ++pos_;
        }
        charge = sign * mag;
      } else {
        throw Error(std::string("unexpected character in bracket atom: ") + k);
      }
    }
    if (pos_ >= text_.size()) throw Error("unterminated bracket atom");
    ++pos_;  // consume ']'
    return push_atom(element, charge, aromatic, explicit_h);
  }

  int push_atom(const std::string& element, int charge, bool aromatic,
                int explicit_h) {
    if (!default_valence_table().supported(element)) throw UnknownElement(element);
    if (charge < -2 || charge > 2)
      throw ValenceViolation("formal charge outside [-2, 2]");
    atoms.push_back(ParseAtom{element, charge, aromatic, explicit_h});
    return static_cast<int>(atoms.size()) - 1;
  }

  const std::string& text_;
  size_t pos_ = 0;
  std::map<int, std::pair<int, int>> open_rings_;  // number -> (atom, order)
};

// Backtracking perfect matching over aromatic bonds restricted to the atoms
// that must receive a double bond. Aromatic systems are small enough that the
// exhaustive search is immediate.
inline bool match_aromatic(size_t idx, const std::vector<int>& needed,
                           const std::vector<std::vector<std::pair<int, int>>>& arom_adj,
                           std::vector<int>& mate,
                           std::vector<int>& bond_choice) {
  while (idx < needed.size() && mate[needed[idx]] >= 0) ++idx;
  if (idx == needed.size()) return true;
  int u = needed[idx];
  for (auto [v, bond_id] : arom_adj[u]) {
    if (mate[v] >= 0) continue;
    mate[u] = v;
    mate[v] = u;
    bond_choice.push_back(bond_id);
    if (match_aromatic(idx + 1, needed, arom_adj, mate, bond_choice)) return true;
    bond_choice.pop_back();
    mate[u] = -1;
    mate[v] = -1;
  }
  return false;
}

}  // namespace detail

// Parses the SMILES subset: organic-subset atoms, bracket atoms with charge,
// bond symbols - = #, branches, ring closures (digit and %nn), aromatic
// lowercase atoms (kekulized on exit). Stereo markers are discarded.
inline MolGraph parse_smiles(const std::string& text,
                             const ParseOptions& options = {}) {
  if (text.empty()) throw Error("empty SMILES");
  detail::SmilesParser parser(text);
  parser.run();

  const auto& atoms = parser.atoms;
  const auto& bonds = parser.bonds;
  const int n = static_cast<int>(atoms.size());
  const ValenceTable& table = default_valence_table();

  // Kekulization: decide which aromatic atoms must take a double bond, then
  // find a perfect matching of those atoms over aromatic bonds.
  std::vector<std::vector<std::pair<int, int>>> arom_adj(n);
  std::vector<int> sigma_used(n, 0);
  for (size_t b = 0; b < bonds.size(); ++b) {
    sigma_used[bonds[b].u] += bonds[b].order;
    sigma_used[bonds[b].v] += bonds[b].order;
    if (bonds[b].aromatic) {
      arom_adj[bonds[b].u].emplace_back(bonds[b].v, static_cast<int>(b));
      arom_adj[bonds[b].v].emplace_back(bonds[b].u, static_cast<int>(b));
    }
  }
  std::vector<int> needed;
  for (int i = 0; i < n; ++i) {
    if (!atoms[i].aromatic) continue;
    int budget = detail::aromatic_valence(atoms[i].element, atoms[i].formal_charge);
    int degree = 0;
    for (size_t b = 0; b < bonds.size(); ++b)
      if (bonds[b].u == i || bonds[b].v == i) ++degree;
    int h = atoms[i].explicit_h >= 0
                ? atoms[i].explicit_h
                : (atoms[i].element == "C" ? std::max(0, budget - degree - 1) : 0);
    if (budget - sigma_used[i] - h >= 1) needed.push_back(i);
  }
  std::vector<int> mate(n, -1);
  std::vector<int> double_bonds;
  if (!detail::match_aromatic(0, needed, arom_adj, mate, double_bonds))
    throw KekulizationFailure();

  MolGraph mol;
  for (const auto& a : atoms) mol.add_atom(a.element, a.formal_charge);
  std::vector<int> order_of(bonds.size());
  for (size_t b = 0; b < bonds.size(); ++b) order_of[b] = bonds[b].aromatic ? 1 : bonds[b].order;
  for (int b : double_bonds) order_of[b] = 2;
  for (size_t b = 0; b < bonds.size(); ++b)
    mol.add_bond(bonds[b].u, bonds[b].v, order_of[b]);

  if (options.strict_valence && !satisfies_valence(mol, table))
    throw ValenceViolation("molecule exceeds valence budget: " + text);
  return mol;
}

}  // namespace orgmol

#endif  // ORGMOL_CHEM_SMILES_HPP
