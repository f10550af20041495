#ifndef ORGMOL_FRAG_VOCAB_HPP
#define ORGMOL_FRAG_VOCAB_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "orgmol/chem/canonical.hpp"
#include "orgmol/chem/smiles.hpp"

namespace orgmol {

struct TargetTooSmall : Error {
  TargetTooSmall() : Error("target vocabulary size below atom-type count") {}
};
struct EmptyCorpus : Error {
  EmptyCorpus() : Error("empty corpus") {}
};
struct MalformedVocabFile : Error {
  explicit MalformedVocabFile(const std::string& why)
      : Error("malformed vocabulary file: " + why) {}
};
struct VersionMismatch : Error {
  VersionMismatch() : Error("unsupported vocabulary file version") {}
};

struct VocabEntry {
  std::string key;
  int rank = 0;
  MolGraph tmpl;
};

// Ordered merge list: single-atom entries first, then one entry per merge
// iteration. Rank order is the replay order for decomposition.
class FragmentVocab {
 public:
  int size() const { return static_cast<int>(entries_.size()); }
  int atom_base_count() const { return atom_base_count_; }

  const VocabEntry& entry(int rank) const { return entries_.at(rank); }
  const std::vector<VocabEntry>& entries() const { return entries_; }

  bool contains(const std::string& key) const { return rank_of_.count(key) != 0; }

  int rank_of(const std::string& key) const {
    auto it = rank_of_.find(key);
    if (it == rank_of_.end())
      throw Error("key not in vocabulary: " + key);
    return it->second;
  }

  void add_entry(const std::string& key, bool is_atom) {
    if (rank_of_.count(key)) throw Error("duplicate vocabulary key: " + key);
    VocabEntry e;
    e.key = key;
    e.rank = size();
    e.tmpl = parse_smiles(key, ParseOptions{false});
    if (is_atom) {
      if (e.rank != atom_base_count_)
        throw Error("atom entries must precede merge entries");
      ++atom_base_count_;
    }
    rank_of_[key] = e.rank;
    entries_.push_back(std::move(e));
  }

  // FNV-1a over the serialized entry list; ties checkpoints to a vocabulary.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::string& s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
      }
      h ^= 0xff;
      h *= 1099511628211ull;
    };
    mix(std::to_string(atom_base_count_));
    for (const auto& e : entries_) mix(e.key);
    return h;
  }

 private:
  std::vector<VocabEntry> entries_;
  std::map<std::string, int> rank_of_;
  int atom_base_count_ = 0;
};

// Shortlex order on canonical keys (length first, then lexicographic).
inline bool shortlex_less(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

namespace detail {

// Partition of one molecule's atoms into fragments; fragments only coarsen.
struct FragPartition {
  explicit FragPartition(const MolGraph& mol) : mol(&mol) {
    frag_atoms.resize(mol.atom_count());
    frag_of.resize(mol.atom_count());
    for (int i = 0; i < mol.atom_count(); ++i) {
      frag_atoms[i] = {i};
      frag_of[i] = i;
    }
  }

  // Unordered adjacent fragment pairs, each listed once, ordered by
  // (smallest atom index of either side, then the other side's smallest).
  std::vector<std::pair<int, int>> adjacent_pairs() const {
    std::set<std::pair<int, int>> seen;
    for (const Bond& b : mol->bonds()) {
      int fi = frag_of[b.u], fj = frag_of[b.v];
      if (fi == fj) continue;
      seen.insert({std::min(fi, fj), std::max(fi, fj)});
    }
    std::vector<std::pair<int, int>> pairs(seen.begin(), seen.end());
    std::sort(pairs.begin(), pairs.end(), [this](auto a, auto b) {
      auto key = [this](std::pair<int, int> p) {
        int ma = frag_atoms[p.first].front();
        int mb = frag_atoms[p.second].front();
        return std::pair<int, int>(std::min(ma, mb), std::max(ma, mb));
      };
      return key(a) < key(b);
    });
    return pairs;
  }

  std::string merged_key(int fi, int fj) const {
    std::vector<int> atoms = frag_atoms[fi];
    atoms.insert(atoms.end(), frag_atoms[fj].begin(), frag_atoms[fj].end());
    std::sort(atoms.begin(), atoms.end());
    return canonical_key(mol->induced_subgraph(atoms));
  }

  void merge(int fi, int fj) {
    std::vector<int>& a = frag_atoms[fi];
    for (int atom : frag_atoms[fj]) {
      a.push_back(atom);
      frag_of[atom] = fi;
    }
    std::sort(a.begin(), a.end());
    frag_atoms[fj].clear();
  }

  // Merge every adjacent pair whose union matches `key`; leftmost-first with
  // rescanning, so overlapping occurrences resolve deterministically.
  void merge_all(const std::string& key) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto [fi, fj] : adjacent_pairs()) {
        if (merged_key(fi, fj) == key) {
          merge(fi, fj);
          changed = true;
          break;
        }
      }
    }
  }

  const MolGraph* mol;
  std::vector<int> frag_of;
  std::vector<std::vector<int>> frag_atoms;  // empty after being merged away
};

}  // namespace detail

// Iterative pair-merging vocabulary construction: start with single atoms,
// then append the most frequent adjacent-pair merge until `target_size`
// entries exist (ties go to the lexicographically smaller key). Stops early
// if no molecule has two adjacent fragments left.
inline FragmentVocab build_vocab(const std::vector<MolGraph>& corpus,
                                 int target_size) {
  if (corpus.empty()) throw EmptyCorpus();
  std::set<std::string> atom_keys;
  for (const MolGraph& mol : corpus)
    for (int i = 0; i < mol.atom_count(); ++i) {
      MolGraph one;
      one.add_atom(mol.atom(i).element, mol.atom(i).formal_charge);
      atom_keys.insert(canonical_key(one));
    }
  if (target_size < static_cast<int>(atom_keys.size())) throw TargetTooSmall();

  FragmentVocab vocab;
  for (const std::string& key : atom_keys) vocab.add_entry(key, true);

  // Isomorphic molecules evolve through identical merge sequences, so the
  // corpus collapses to one weighted partition per distinct molecule.
  std::map<std::string, std::pair<const MolGraph*, long>> groups;
  std::vector<const MolGraph*> ungrouped;
  for (const MolGraph& mol : corpus) {
    std::string key;
    try {
      key = canonical_key(mol);
    } catch (const Error&) {
      ungrouped.push_back(&mol);  // empty or disconnected input
      continue;
    }
    ++groups.try_emplace(key, &mol, 0).first->second.second;
  }
  std::vector<detail::FragPartition> partitions;
  std::vector<long> weights;
  for (const auto& [key, group] : groups) {
    partitions.emplace_back(*group.first);
    weights.push_back(group.second);
  }
  for (const MolGraph* mol : ungrouped) {
    partitions.emplace_back(*mol);
    weights.push_back(1);
  }

  while (vocab.size() < target_size) {
    std::map<std::string, long> counts;
    for (std::size_t p = 0; p < partitions.size(); ++p)
      for (auto [fi, fj] : partitions[p].adjacent_pairs())
        counts[partitions[p].merged_key(fi, fj)] += weights[p];
    std::string best;
    long best_count = 0;
    for (const auto& [key, count] : counts) {
      if (vocab.contains(key)) continue;
      // ties resolve to the shortlex-smaller key
      if (count > best_count ||
          (count == best_count && shortlex_less(key, best))) {
        best = key;
        best_count = count;
      }
    }
    if (best.empty()) break;
    vocab.add_entry(best, false);
    for (auto& part : partitions) part.merge_all(best);
  }
  return vocab;
}

inline void save_vocab(const FragmentVocab& vocab, std::ostream& out) {
  out << "orgmol-vocab 1\n";
  out << "K " << vocab.size() << "\n";
  out << "atom_base " << vocab.atom_base_count() << "\n";
  for (const auto& e : vocab.entries()) out << e.rank << "\t" << e.key << "\n";
}

inline void save_vocab(const FragmentVocab& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write vocabulary file: " + path);
  save_vocab(vocab, out);
}

inline FragmentVocab load_vocab(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MalformedVocabFile("empty file");
  if (line.rfind("orgmol-vocab ", 0) != 0) throw MalformedVocabFile("bad magic");
  if (line != "orgmol-vocab 1") throw VersionMismatch();
  int k = -1, atom_base = -1;
  if (!std::getline(in, line) || sscanf(line.c_str(), "K %d", &k) != 1)
    throw MalformedVocabFile("missing K header");
  if (!std::getline(in, line) ||
      sscanf(line.c_str(), "atom_base %d", &atom_base) != 1)
    throw MalformedVocabFile("missing atom_base header");
  if (k < 0 || atom_base < 0 || atom_base > k)
    throw MalformedVocabFile("inconsistent header counts");
  FragmentVocab vocab;
  for (int rank = 0; rank < k; ++rank) {
    if (!std::getline(in, line)) throw MalformedVocabFile("truncated entry list");
    std::istringstream ls(line);
    int file_rank;
    std::string key;
    if (!(ls >> file_rank >> key) || file_rank != rank)
      throw MalformedVocabFile("bad entry line: " + line);
    try {
      vocab.add_entry(key, rank < atom_base);
    } catch (const Error& e) {
      throw MalformedVocabFile(e.what());
    }
  }
  return vocab;
}

inline FragmentVocab load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read vocabulary file: " + path);
  return load_vocab(in);
}

}  // namespace orgmol

#endif  // ORGMOL_FRAG_VOCAB_HPP
