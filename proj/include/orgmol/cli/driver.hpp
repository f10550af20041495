#ifndef ORGMOL_CLI_DRIVER_HPP
#define ORGMOL_CLI_DRIVER_HPP

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "orgmol/assemble/assembler.hpp"
#include "orgmol/bonds/scorer.hpp"
#include "orgmol/chem/canonical.hpp"
#include "orgmol/chem/smiles.hpp"
#include "orgmol/diffusion/sampler.hpp"
#include "orgmol/diffusion/train.hpp"
#include "orgmol/eval/metrics.hpp"
#include "orgmol/frag/decompose.hpp"
#include "orgmol/frag/vocab.hpp"
#include "orgmol/io/checkpoint.hpp"

namespace orgmol::cli {

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};
struct NonFiniteLoss : Error {
  NonFiniteLoss() : Error("non-finite training loss") {}
};

// Exit codes shared by every subcommand.
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitIo = 2;
constexpr int kExitTargetTooSmall = 3;
constexpr int kExitConfig = 4;
constexpr int kExitNonFinite = 5;

// Every tunable of the pipeline with its committed default. Overrides come
// from a key-value config file and a handful of direct flags; the full
// effective set is dumped into each run's manifest.
struct RunConfig {
  std::uint64_t seed = 0;
  int threads = 1;
  int vocab_size = 100;
  // score networks
  int n_max = 11;
  int theta_layers = 2;
  int phi_layers = 2;
  int hidden = 16;
  int heads = 4;
  int head_dim = 4;
  int powers = 3;
  int gmh_hidden = 8;
  int gmh_out = 4;
  int pair_hidden = 8;
  // forward SDEs
  std::string sde_f_kind = "vp";
  double sde_f_min = 0.1;
  double sde_f_max = 1.0;
  int sde_f_steps = 1000;
  std::string sde_c_kind = "ve";
  double sde_c_min = 0.1;
  double sde_c_max = 1.0;
  int sde_c_steps = 1000;
  // diffusion training
  int diff_epochs = 300;
  int diff_batch = 2048;
  double diff_lr = 5e-3;
  double weight_decay = 1e-4;
  double lr_decay = 0.999;
  double ema = 0.999;
  // sampler
  double snr = 0.2;
  double scale_coeff = 0.5;
  int corrector_steps = 1;
  // bond scorer
  int atom_dim = 50;
  int frag_dim = 100;
  int node_dim = 300;
  int edge_dim = 16;
  int bond_iters = 4;
  int bond_epochs = 10;
  int bond_batch = 32;
  double bond_lr = 1e-3;
  double neg_ratio = 1.0;
  // assembly
  double threshold = 0.5;
  std::string mode = "scored";
};

namespace detail {

inline std::map<std::string, std::string> config_schema(const RunConfig& c) {
  std::map<std::string, std::string> m;
  std::ostringstream os;
  os.precision(17);
  auto put = [&](const std::string& key, auto v) {
    os.str("");
    os << v;
    m[key] = os.str();
  };
  put("seed", c.seed);
  put("threads", c.threads);
  put("vocab_size", c.vocab_size);
  put("n_max", c.n_max);
  put("theta_layers", c.theta_layers);
  put("phi_layers", c.phi_layers);
  put("hidden", c.hidden);
  put("heads", c.heads);
  put("head_dim", c.head_dim);
  put("powers", c.powers);
  put("gmh_hidden", c.gmh_hidden);
  put("gmh_out", c.gmh_out);
  put("pair_hidden", c.pair_hidden);
  put("sde_f_kind", c.sde_f_kind);
  put("sde_f_min", c.sde_f_min);
  put("sde_f_max", c.sde_f_max);
  put("sde_f_steps", c.sde_f_steps);
  put("sde_c_kind", c.sde_c_kind);
  put("sde_c_min", c.sde_c_min);
  put("sde_c_max", c.sde_c_max);
  put("sde_c_steps", c.sde_c_steps);
  put("diff_epochs", c.diff_epochs);
  put("diff_batch", c.diff_batch);
  put("diff_lr", c.diff_lr);
  put("weight_decay", c.weight_decay);
  put("lr_decay", c.lr_decay);
  put("ema", c.ema);
  put("snr", c.snr);
  put("scale_coeff", c.scale_coeff);
  put("corrector_steps", c.corrector_steps);
  put("atom_dim", c.atom_dim);
  put("frag_dim", c.frag_dim);
  put("node_dim", c.node_dim);
  put("edge_dim", c.edge_dim);
  put("bond_iters", c.bond_iters);
  put("bond_epochs", c.bond_epochs);
  put("bond_batch", c.bond_batch);
  put("bond_lr", c.bond_lr);
  put("neg_ratio", c.neg_ratio);
  put("threshold", c.threshold);
  put("mode", c.mode);
  return m;
}

inline void apply_key(RunConfig& c, const std::string& key,
                      const std::string& value) {
  auto as_int = [&](int& field) {
    try {
      size_t pos = 0;
      field = std::stoi(value, &pos);
      if (pos != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ConfigError("bad integer for " + key + ": " + value);
    }
  };
  auto as_u64 = [&](std::uint64_t& field) {
    try {
      size_t pos = 0;
      field = std::stoull(value, &pos);
      if (pos != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ConfigError("bad integer for " + key + ": " + value);
    }
  };
  auto as_double = [&](double& field) {
    try {
      size_t pos = 0;
      field = std::stod(value, &pos);
      if (pos != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ConfigError("bad number for " + key + ": " + value);
    }
  };
  if (key == "seed") as_u64(c.seed);
  else if (key == "threads") as_int(c.threads);
  else if (key == "vocab_size") as_int(c.vocab_size);
  else if (key == "n_max") as_int(c.n_max);
  else if (key == "theta_layers") as_int(c.theta_layers);
  else if (key == "phi_layers") as_int(c.phi_layers);
  else if (key == "hidden") as_int(c.hidden);
  else if (key == "heads") as_int(c.heads);
  else if (key == "head_dim") as_int(c.head_dim);
  else if (key == "powers") as_int(c.powers);
  else if (key == "gmh_hidden") as_int(c.gmh_hidden);
  else if (key == "gmh_out") as_int(c.gmh_out);
  else if (key == "pair_hidden") as_int(c.pair_hidden);
  else if (key == "sde_f_kind") c.sde_f_kind = value;
  else if (key == "sde_f_min") as_double(c.sde_f_min);
  else if (key == "sde_f_max") as_double(c.sde_f_max);
  else if (key == "sde_f_steps") as_int(c.sde_f_steps);
  else if (key == "sde_c_kind") c.sde_c_kind = value;
  else if (key == "sde_c_min") as_double(c.sde_c_min);
  else if (key == "sde_c_max") as_double(c.sde_c_max);
  else if (key == "sde_c_steps") as_int(c.sde_c_steps);
  else if (key == "diff_epochs") as_int(c.diff_epochs);
  else if (key == "diff_batch") as_int(c.diff_batch);
  else if (key == "diff_lr") as_double(c.diff_lr);
  else if (key == "weight_decay") as_double(c.weight_decay);
  else if (key == "lr_decay") as_double(c.lr_decay);
  else if (key == "ema") as_double(c.ema);
  else if (key == "snr") as_double(c.snr);
  else if (key == "scale_coeff") as_double(c.scale_coeff);
  else if (key == "corrector_steps") as_int(c.corrector_steps);
  else if (key == "atom_dim") as_int(c.atom_dim);
  else if (key == "frag_dim") as_int(c.frag_dim);
  else if (key == "node_dim") as_int(c.node_dim);
  else if (key == "edge_dim") as_int(c.edge_dim);
  else if (key == "bond_iters") as_int(c.bond_iters);
  else if (key == "bond_epochs") as_int(c.bond_epochs);
  else if (key == "bond_batch") as_int(c.bond_batch);
  else if (key == "bond_lr") as_double(c.bond_lr);
  else if (key == "neg_ratio") as_double(c.neg_ratio);
  else if (key == "threshold") as_double(c.threshold);
  else if (key == "mode") c.mode = value;
  else throw ConfigError("unknown config key: " + key);
}

}  // namespace detail

// Key-value lines; '#' starts a comment; blank lines skipped.
inline void load_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot read config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key, value, extra;
    if (!(ls >> key)) continue;
    if (!(ls >> value) || (ls >> extra))
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key value'");
    detail::apply_key(c, key, value);
  }
}

// ORGMOL_SEED applies only when neither config file nor flags set a seed.
inline void apply_seed_fallback(RunConfig& c, bool seed_was_set) {
  if (seed_was_set) return;
  const char* env = std::getenv("ORGMOL_SEED");
  if (!env) return;
  try {
    size_t pos = 0;
    std::string s(env);
    c.seed = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
  } catch (...) {
    throw ConfigError(std::string("bad ORGMOL_SEED value: ") + env);
  }
}

inline SdeSpec make_sde(const std::string& kind, double p_min, double p_max,
                        int steps) {
  SdeSpec s;
  if (kind == "vp") s.kind = SdeKind::VP;
  else if (kind == "ve") s.kind = SdeKind::VE;
  else throw ConfigError("unknown sde kind: " + kind);
  s.p_min = p_min;
  s.p_max = p_max;
  s.steps = steps;
  try {
    s.validate();
  } catch (const InvalidSdeSpec& e) {
    throw ConfigError(e.what());
  }
  return s;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot read file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

struct ParsedCorpus {
  std::vector<MolGraph> mols;
  int rejects = 0;
};

inline ParsedCorpus parse_corpus(const std::vector<std::string>& lines) {
  ParsedCorpus out;
  for (const std::string& s : lines) {
    try {
      out.mols.push_back(parse_smiles(s));
    } catch (const Error&) {
      ++out.rejects;
    }
  }
  return out;
}

struct DecodedCorpus {
  std::vector<DecomposedMol> mols;
  int skipped = 0;
};

// Duplicate input lines decompose identically, so decomposition runs once
// per distinct line and the result is replicated.
inline DecodedCorpus decode_corpus(const std::vector<std::string>& lines,
                                   const FragmentVocab& vocab) {
  std::map<std::string, std::optional<DecomposedMol>> cache;
  DecodedCorpus out;
  for (const std::string& line : lines) {
    auto it = cache.find(line);
    if (it == cache.end()) {
      std::optional<DecomposedMol> v;
      try {
        MolGraph m = parse_smiles(line);
        Decomposition d = decompose(m, vocab);
        v = DecomposedMol{std::move(m), std::move(d)};
      } catch (const Error&) {
      }
      it = cache.emplace(line, std::move(v)).first;
    }
    if (it->second) out.mols.push_back(*it->second);
    else ++out.skipped;
  }
  return out;
}

inline void write_text(const std::filesystem::path& path,
                       const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write file: " + path.string());
  out << body;
  if (!out) throw IoFailure("short write: " + path.string());
}

// The manifest holds the full effective configuration plus per-command
// facts; timing deliberately stays out so reruns are byte-identical.
inline void write_manifest(const std::filesystem::path& dir,
                           const RunConfig& cfg,
                           const std::map<std::string, std::string>& extra) {
  std::ostringstream os;
  for (const auto& [k, v] : detail::config_schema(cfg)) os << k << " " << v << "\n";
  for (const auto& [k, v] : extra) os << k << " " << v << "\n";
  write_text(dir / "manifest.txt", os.str());
}

inline std::filesystem::path ensure_dir(const std::string& out_dir) {
  std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoFailure("cannot create output directory: " + out_dir);
  return dir;
}

inline int cmd_build_vocab(const std::string& data_path, const RunConfig& cfg,
                           const std::string& out_dir, std::ostream& log) {
  auto dir = ensure_dir(out_dir);
  auto lines = read_lines(data_path);
  auto corpus = parse_corpus(lines);
  if (corpus.mols.empty()) throw IoFailure("no parseable molecules in " + data_path);
  FragmentVocab vocab = build_vocab(corpus.mols, cfg.vocab_size);
  save_vocab(vocab, (dir / "vocab.txt").string());
  auto decoded = decode_corpus(lines, vocab);
  std::vector<Decomposition> decs;
  decs.reserve(decoded.mols.size());
  for (DecomposedMol& dm : decoded.mols) decs.push_back(std::move(dm.dec));
  write_text(dir / "structure.csv", structure_report(decs));
  write_manifest(dir, cfg,
                 {{"command", "build-vocab"},
                  {"data", data_path},
                  {"rejects", std::to_string(corpus.rejects)},
                  {"molecules", std::to_string(corpus.mols.size())},
                  {"vocab_fingerprint", std::to_string(vocab.fingerprint())}});
  log << "rejects " << corpus.rejects << "\n";
  log << "vocabulary size " << vocab.size() << "\n";
  return kExitOk;
}

inline int cmd_train_diffusion(const std::string& data_path,
                               const std::string& vocab_path,
                               const RunConfig& cfg,
                               const std::string& out_dir, std::ostream& log) {
  auto dir = ensure_dir(out_dir);
  FragmentVocab vocab = load_vocab(vocab_path);
  auto decoded = decode_corpus(read_lines(data_path), vocab);
  std::vector<Decomposition> decs;
  std::vector<FragGraphTensor> tensors;
  int skipped = decoded.skipped;
  for (DecomposedMol& dm : decoded.mols) {
    try {
      tensors.push_back(to_tensor(dm.dec, vocab, cfg.n_max));
      decs.push_back(std::move(dm.dec));
    } catch (const Error&) {
      ++skipped;
    }
  }
  if (tensors.empty()) throw IoFailure("no usable molecules in " + data_path);

  NetConfig net;
  net.n_max = cfg.n_max;
  net.k = vocab.size();
  net.theta_layers = cfg.theta_layers;
  net.phi_layers = cfg.phi_layers;
  net.hidden = cfg.hidden;
  net.heads = cfg.heads;
  net.head_dim = cfg.head_dim;
  net.powers = cfg.powers;
  net.gmh_hidden = cfg.gmh_hidden;
  net.gmh_out = cfg.gmh_out;
  net.pair_hidden = cfg.pair_hidden;
  SdeSpec sde_f = make_sde(cfg.sde_f_kind, cfg.sde_f_min, cfg.sde_f_max,
                           cfg.sde_f_steps);
  SdeSpec sde_c = make_sde(cfg.sde_c_kind, cfg.sde_c_min, cfg.sde_c_max,
                           cfg.sde_c_steps);
  DiffusionTrainConfig train;
  train.epochs = cfg.diff_epochs;
  train.batch_size = cfg.diff_batch;
  train.lr = cfg.diff_lr;
  train.weight_decay = cfg.weight_decay;
  train.lr_decay = cfg.lr_decay;
  train.ema = cfg.ema;
  train.seed = cfg.seed;

  std::vector<EpochLoss> history;
  DiffusionCheckpoint ckpt =
      train_diffusion(tensors, net, sde_f, sde_c,
                      fragment_count_distribution(decs), vocab.fingerprint(),
                      train, &history);
  std::ostringstream csv;
  csv.precision(17);
  csv << "epoch,loss_f,loss_c\n";
  for (size_t e = 0; e < history.size(); ++e) {
    if (!std::isfinite(history[e].loss_f) || !std::isfinite(history[e].loss_c))
      throw NonFiniteLoss();
    csv << e << "," << history[e].loss_f << "," << history[e].loss_c << "\n";
  }
  write_text(dir / "loss.csv", csv.str());
  save_checkpoint(to_checkpoint(ckpt), (dir / "diffusion.ckpt").string());
  write_manifest(dir, cfg,
                 {{"command", "train-diffusion"},
                  {"data", data_path},
                  {"vocab", vocab_path},
                  {"skipped", std::to_string(skipped)},
                  {"molecules", std::to_string(tensors.size())},
                  {"vocab_fingerprint", std::to_string(vocab.fingerprint())}});
  log << "trained " << history.size() << " epochs on " << tensors.size()
      << " molecules\n";
  return kExitOk;
}

inline int cmd_train_bonds(const std::string& data_path,
                           const std::string& vocab_path, const RunConfig& cfg,
                           const std::string& out_dir, std::ostream& log) {
  auto dir = ensure_dir(out_dir);
  FragmentVocab vocab = load_vocab(vocab_path);
  auto decoded = decode_corpus(read_lines(data_path), vocab);
  std::vector<DecomposedMol>& decs = decoded.mols;
  int skipped = decoded.skipped;
  if (decs.empty()) throw IoFailure("no usable molecules in " + data_path);

  BondConfig bond;
  bond.atom_dim = cfg.atom_dim;
  bond.frag_dim = cfg.frag_dim;
  bond.node_dim = cfg.node_dim;
  bond.edge_dim = cfg.edge_dim;
  bond.iterations = cfg.bond_iters;
  BondTrainConfig train;
  train.epochs = cfg.bond_epochs;
  train.batch_size = cfg.bond_batch;
  train.lr = cfg.bond_lr;
  train.neg_ratio = cfg.neg_ratio;
  train.seed = cfg.seed;

  std::vector<double> history;
  BondScorerParams params = train_bond_scorer(
      decs, vocab, default_valence_table(), bond, train, &history);
  std::ostringstream csv;
  csv.precision(17);
  csv << "epoch,loss\n";
  for (size_t e = 0; e < history.size(); ++e) {
    if (!std::isfinite(history[e])) throw NonFiniteLoss();
    csv << e << "," << history[e] << "\n";
  }
  write_text(dir / "loss.csv", csv.str());
  save_checkpoint(to_checkpoint(params), (dir / "bonds.ckpt").string());
  write_manifest(dir, cfg,
                 {{"command", "train-bonds"},
                  {"data", data_path},
                  {"vocab", vocab_path},
                  {"skipped", std::to_string(skipped)},
                  {"molecules", std::to_string(decs.size())},
                  {"vocab_fingerprint", std::to_string(vocab.fingerprint())}});
  log << "trained " << history.size() << " epochs on " << decs.size()
      << " molecules\n";
  return kExitOk;
}

struct SampleResult {
  std::vector<std::string> smiles;  // canonical, one per emitted molecule
  int n_requested = 0;
  int aborted_sampler = 0;  // reverse runs that left the finite range
  int aborted_assembly = 0;
};

// Shared by the sample command and the acceptance harness so both exercise
// the same decode path.
inline SampleResult run_sampling(const DiffusionCheckpoint& diff,
                                 const BondScorerParams& bonds,
                                 const FragmentVocab& vocab, int n,
                                 const RunConfig& cfg) {
  if (diff.vocab_fingerprint != vocab.fingerprint() ||
      bonds.vocab_fingerprint != vocab.fingerprint())
    throw FingerprintMismatch();
  SamplerConfig scfg;
  scfg.snr = cfg.snr;
  scfg.scale_coeff = cfg.scale_coeff;
  scfg.corrector_steps = cfg.corrector_steps;
  SampleBatch batch = pc_sample(diff, n, scfg, cfg.seed);

  SampleResult out;
  out.n_requested = n;
  out.aborted_sampler = batch.aborted;
  AssemblyConfig acfg;
  acfg.threshold = cfg.threshold;
  bool random_mode = cfg.mode == "random-ablation";
  if (!random_mode && cfg.mode != "scored")
    throw ConfigError("unknown mode: " + cfg.mode);
  for (size_t i = 0; i < batch.samples.size(); ++i) {
    try {
      MolGraph mol;
      if (random_mode) {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                          static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(i), 0x9d2cu};
        std::mt19937 rng(seq);
        mol = assemble_random(batch.samples[i], vocab, rng);
      } else {
        mol = assemble(batch.samples[i], vocab, bonds, acfg);
      }
      out.smiles.push_back(canonical_key(mol));
    } catch (const Error&) {
      ++out.aborted_assembly;
    }
  }
  return out;
}

inline int cmd_sample(const std::string& diff_path, const std::string& bond_path,
                      const std::string& vocab_path, int n,
                      const RunConfig& cfg, const std::string& out_dir,
                      std::ostream& log) {
  auto dir = ensure_dir(out_dir);
  FragmentVocab vocab = load_vocab(vocab_path);
  DiffusionCheckpoint diff = from_diffusion_checkpoint(load_checkpoint(diff_path));
  BondScorerParams bonds = from_bond_checkpoint(load_checkpoint(bond_path));
  SampleResult res = run_sampling(diff, bonds, vocab, n, cfg);

  std::ostringstream body;
  for (const std::string& s : res.smiles) body << s << "\n";
  write_text(dir / "samples.smi", body.str());
  write_manifest(dir, cfg,
                 {{"command", "sample"},
                  {"diffusion_ckpt", diff_path},
                  {"bond_ckpt", bond_path},
                  {"vocab", vocab_path},
                  {"n_requested", std::to_string(res.n_requested)},
                  {"emitted", std::to_string(res.smiles.size())},
                  {"aborted_sampler", std::to_string(res.aborted_sampler)},
                  {"aborted_assembly", std::to_string(res.aborted_assembly)},
                  {"vocab_fingerprint", std::to_string(vocab.fingerprint())}});
  log << "emitted " << res.smiles.size() << " of " << n << " (sampler aborts "
      << res.aborted_sampler << ", assembly aborts " << res.aborted_assembly
      << ")\n";
  return kExitOk;
}

inline int cmd_evaluate(const std::string& generated_path,
                        const std::string& train_path,
                        const std::string& vocab_path, int n_requested,
                        const RunConfig& cfg, const std::string& out_dir,
                        std::ostream& log) {
  auto dir = ensure_dir(out_dir);
  auto generated = read_lines(generated_path);
  if (generated.empty())
    throw IoFailure("empty generated file: " + generated_path);
  auto train_lines = read_lines(train_path);
  auto train_list = valid_keys(train_lines);
  std::set<std::string> train_keys(train_list.begin(), train_list.end());
  FragmentVocab vocab = load_vocab(vocab_path);
  if (n_requested <= 0) n_requested = static_cast<int>(generated.size());
  GenerationReport report =
      build_report(generated, n_requested, train_keys, &vocab);
  report.peak_live_tensor_bytes = TensorGauge::peak();
  write_text(dir / "report.json", to_json(report));
  auto decoded = decode_corpus(generated, vocab);
  std::vector<Decomposition> decs;
  decs.reserve(decoded.mols.size());
  for (DecomposedMol& dm : decoded.mols) decs.push_back(std::move(dm.dec));
  if (!decs.empty()) write_text(dir / "structure.csv", structure_report(decs));
  write_manifest(dir, cfg,
                 {{"command", "evaluate"},
                  {"generated", generated_path},
                  {"train", train_path},
                  {"vocab", vocab_path},
                  {"n_requested", std::to_string(n_requested)}});
  log << "validity " << report.validity << " uniqueness " << report.uniqueness
      << " novelty " << report.novelty << "\n";
  return kExitOk;
}

// Central exception-to-exit-code mapping used by main().
template <typename Fn>
int guarded(Fn&& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const IoFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const TargetTooSmall& e) {
    err << "error: " << e.what() << "\n";
    return kExitTargetTooSmall;
  } catch (const FingerprintMismatch& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NonFiniteLoss& e) {
    err << "error: " << e.what() << "\n";
    return kExitNonFinite;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace orgmol::cli

#endif  // ORGMOL_CLI_DRIVER_HPP
