#ifndef ORGMOL_CHEM_ELEMENTS_HPP
#define ORGMOL_CHEM_ELEMENTS_HPP

#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace orgmol {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownElement : Error {
  explicit UnknownElement(const std::string& sym)
      : Error("unknown element: " + sym) {}
};

struct EmptyBatch : Error {
  EmptyBatch() : Error("empty batch") {}
};

// Maximum total bond-order budget per element (neutral atom).
// Hypervalent S/Se/Te/P/As use their literature maximum; metals get the
// maximum covalent valence commonly tabulated.
class ValenceTable {
 public:
  ValenceTable() {
    budgets_ = {
        {"C", 4},  {"N", 3},  {"O", 2},  {"S", 6},  {"P", 5},  {"F", 1},
        {"Cl", 1}, {"Br", 1}, {"I", 1},  {"B", 3},  {"Si", 4}, {"Se", 6},
        {"Ge", 4}, {"As", 5}, {"Te", 6}, {"Ga", 3}, {"Sb", 5}, {"Bi", 5},
        {"In", 3}, {"Tl", 3}, {"Hg", 2}, {"Pb", 4},
    };
  }

  bool supported(const std::string& element) const {
    return budgets_.count(element) != 0;
  }

  // Budget adjusted by formal charge. Positive charge raises the budget of
  // N/O-family donors (e.g. N+ -> 4, O+ -> 3); any charge lowers it for the
  // carbon group; otherwise charge reduces the budget by its magnitude.
  int budget(const std::string& element, int formal_charge) const {
    auto it = budgets_.find(element);
    if (it == budgets_.end()) throw UnknownElement(element);
    int base = it->second;
    if (formal_charge == 0) return base;
    static const std::set<std::string> carbon_group = {"C", "Si", "Ge", "Pb"};
    int adjusted;
    if (carbon_group.count(element)) {
      adjusted = base - std::abs(formal_charge);
    } else {
      adjusted = base + formal_charge;
    }
    return adjusted < 0 ? 0 : adjusted;
  }

  const std::map<std::string, int>& entries() const { return budgets_; }

 private:
  std::map<std::string, int> budgets_;
};

inline const ValenceTable& default_valence_table() {
  static const ValenceTable table;
  return table;
}

}  // namespace orgmol

#endif  // ORGMOL_CHEM_ELEMENTS_HPP
