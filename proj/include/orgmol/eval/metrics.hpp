#ifndef ORGMOL_EVAL_METRICS_HPP
#define ORGMOL_EVAL_METRICS_HPP

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "orgmol/chem/canonical.hpp"
#include "orgmol/chem/molgraph.hpp"
#include "orgmol/chem/smiles.hpp"
#include "orgmol/frag/decompose.hpp"

namespace orgmol {

struct EmptySet : Error {
  EmptySet() : Error("metric over an empty set") {}
};

// Canonical key when the line parses and satisfies valence, nullopt otherwise.
inline std::optional<std::string> checked_key(
    const std::string& smiles,
    const ValenceTable& table = default_valence_table()) {
  try {
    MolGraph mol = parse_smiles(smiles);
    if (!satisfies_valence(mol, table)) return std::nullopt;
    return canonical_key(mol);
  } catch (const Error&) {
    return std::nullopt;
  }
}

inline std::vector<std::string> valid_keys(
    const std::vector<std::string>& smiles,
    const ValenceTable& table = default_valence_table()) {
  std::vector<std::string> keys;
  for (const std::string& s : smiles) {
    auto key = checked_key(s, table);
    if (key) keys.push_back(*key);
  }
  return keys;
}

// Percentage of requested samples that parse and satisfy valence. The
// denominator counts aborted/unemitted samples as invalid.
inline double validity(const std::vector<std::string>& smiles, int n_requested,
                       const ValenceTable& table = default_valence_table()) {
  if (n_requested <= 0) throw EmptySet();
  return 100.0 * static_cast<double>(valid_keys(smiles, table).size()) /
         static_cast<double>(n_requested);
}

inline double validity(const std::vector<std::string>& smiles,
                       const ValenceTable& table = default_valence_table()) {
  return validity(smiles, static_cast<int>(smiles.size()), table);
}

// Distinct canonical keys over valid molecules, as a percentage.
inline double uniqueness(const std::vector<std::string>& keys) {
  if (keys.empty()) throw EmptySet();
  std::set<std::string> distinct(keys.begin(), keys.end());
  return 100.0 * static_cast<double>(distinct.size()) /
         static_cast<double>(keys.size());
}

// Percentage of distinct generated keys absent from the training set.
inline double novelty(const std::vector<std::string>& keys,
                      const std::set<std::string>& train_keys) {
  if (keys.empty()) throw EmptySet();
  std::set<std::string> distinct(keys.begin(), keys.end());
  size_t fresh = 0;
  for (const std::string& k : distinct)
    if (!train_keys.count(k)) ++fresh;
  return 100.0 * static_cast<double>(fresh) /
         static_cast<double>(distinct.size());
}

// Frequency tables over a decomposed corpus, one CSV with a table column:
// atom-count and fragment-count histograms plus fragment-size proportions.
inline std::string structure_report(const std::vector<Decomposition>& corpus) {
  if (corpus.empty()) throw EmptyCorpus();
  std::map<int, int> atom_counts, frag_counts;
  for (const Decomposition& d : corpus) {
    ++atom_counts[static_cast<int>(d.frag_of.size())];
    ++frag_counts[d.fragment_count()];
  }
  std::ostringstream out;
  out << "table,key,value\n";
  for (const auto& [n, c] : atom_counts) out << "atom_count," << n << "," << c << "\n";
  for (const auto& [n, c] : frag_counts)
    out << "fragment_count," << n << "," << c << "\n";
  for (const auto& [size, p] : fragment_size_proportions(corpus))
    out << "fragment_size_proportion," << size << "," << p << "\n";
  return out.str();
}

struct GenerationReport {
  int n_requested = 0;
  int n_emitted = 0;
  double validity = 0.0;
  double uniqueness = 0.0;
  double novelty = 0.0;
  std::map<int, int> atom_count_hist;       // over valid molecules
  std::map<int, int> fragment_count_hist;   // over decomposable molecules
  double wall_time_seconds = 0.0;
  std::size_t peak_live_tensor_bytes = 0;
};

inline GenerationReport build_report(
    const std::vector<std::string>& smiles, int n_requested,
    const std::set<std::string>& train_keys, const FragmentVocab* vocab,
    const ValenceTable& table = default_valence_table()) {
  GenerationReport r;
  r.n_requested = n_requested;
  r.n_emitted = static_cast<int>(smiles.size());
  auto keys = valid_keys(smiles, table);
  r.validity = validity(smiles, n_requested, table);
  if (!keys.empty()) {
    r.uniqueness = uniqueness(keys);
    r.novelty = novelty(keys, train_keys);
  }
  std::map<std::string, int> frag_cache;  // key -> fragment count, -1 on failure
  for (const std::string& k : keys) {
    MolGraph mol = parse_smiles(k);
    ++r.atom_count_hist[mol.atom_count()];
    if (vocab) {
      auto it = frag_cache.find(k);
      if (it == frag_cache.end()) {
        int n = -1;
        try {
          n = decompose(mol, *vocab).fragment_count();
        } catch (const Error&) {
        }
        it = frag_cache.emplace(k, n).first;
      }
      if (it->second >= 0) ++r.fragment_count_hist[it->second];
    }
  }
  return r;
}

namespace detail {

inline void json_hist(std::ostringstream& out, const char* name,
                      const std::map<int, int>& hist) {
  out << "  \"" << name << "\": {";
  bool first = true;
  for (const auto& [k, v] : hist) {
    if (!first) out << ", ";
    out << "\"" << k << "\": " << v;
    first = false;
  }
  out << "}";
}

}  // namespace detail

inline std::string to_json(const GenerationReport& r) {
  std::ostringstream out;
  out.precision(10);
  out << "{\n"
      << "  \"n_requested\": " << r.n_requested << ",\n"
      << "  \"n_emitted\": " << r.n_emitted << ",\n"
      << "  \"validity\": " << r.validity << ",\n"
      << "  \"uniqueness\": " << r.uniqueness << ",\n"
      << "  \"novelty\": " << r.novelty << ",\n";
  detail::json_hist(out, "atom_count_hist", r.atom_count_hist);
  out << ",\n";
  detail::json_hist(out, "fragment_count_hist", r.fragment_count_hist);
  out << ",\n"
      << "  \"wall_time_seconds\": " << r.wall_time_seconds << ",\n"
      << "  \"peak_live_tensor_bytes\": " << r.peak_live_tensor_bytes << "\n"
      << "}\n";
  return out.str();
}

}  // namespace orgmol

#endif  // ORGMOL_EVAL_METRICS_HPP
