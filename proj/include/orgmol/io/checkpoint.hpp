#ifndef ORGMOL_IO_CHECKPOINT_HPP
#define ORGMOL_IO_CHECKPOINT_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "orgmol/bonds/scorer.hpp"
#include "orgmol/diffusion/train.hpp"

namespace orgmol {

struct MalformedCheckpoint : Error {
  explicit MalformedCheckpoint(const std::string& what)
      : Error("malformed checkpoint: " + what) {}
};

struct FingerprintMismatch : Error {
  FingerprintMismatch()
      : Error("checkpoint was built against a different vocabulary") {}
};

struct IoFailure : Error {
  explicit IoFailure(const std::string& path) : Error("cannot open " + path) {}
};

// Self-describing artifact: a text header (version, kind, fingerprint,
// key-value metadata, tensor manifest) followed by the tensor data as one
// little-endian float64 blob in manifest order.
struct CheckpointData {
  std::string kind;
  std::uint64_t fingerprint = 0;
  std::map<std::string, std::string> meta;
  ParamMap tensors;
};

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

inline double meta_double(const CheckpointData& c, const std::string& key) {
  auto it = c.meta.find(key);
  if (it == c.meta.end()) throw MalformedCheckpoint("missing key " + key);
  return std::stod(it->second);
}

inline long meta_int(const CheckpointData& c, const std::string& key) {
  auto it = c.meta.find(key);
  if (it == c.meta.end()) throw MalformedCheckpoint("missing key " + key);
  return std::stol(it->second);
}

inline std::string meta_str(const CheckpointData& c, const std::string& key) {
  auto it = c.meta.find(key);
  if (it == c.meta.end()) throw MalformedCheckpoint("missing key " + key);
  return it->second;
}

}  // namespace detail

inline void save_checkpoint(const CheckpointData& c, std::ostream& out) {
  out << "orgmol-checkpoint 1\n";
  out << "kind " << c.kind << "\n";
  out << "fingerprint " << c.fingerprint << "\n";
  out << "meta " << c.meta.size() << "\n";
  for (const auto& [k, v] : c.meta) out << k << " " << v << "\n";
  out << "tensors " << c.tensors.size() << "\n";
  std::size_t total = 0;
  for (const auto& [name, t] : c.tensors) {
    out << name << " " << t.shape.size();
    for (int d : t.shape) out << " " << d;
    out << "\n";
    total += t.size();
  }
  out << "blob " << total << "\n";
  for (const auto& [name, t] : c.tensors) {
    for (double v : t.data) {
      char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      out.write(bytes, sizeof(double));
    }
  }
}

inline CheckpointData load_checkpoint(std::istream& in) {
  CheckpointData c;
  std::string word;
  int version = 0;
  in >> word >> version;
  if (word != "orgmol-checkpoint" || version != 1)
    throw MalformedCheckpoint("bad magic or version");
  in >> word >> c.kind;
  if (word != "kind") throw MalformedCheckpoint("expected kind");
  in >> word >> c.fingerprint;
  if (word != "fingerprint") throw MalformedCheckpoint("expected fingerprint");
  std::size_t n = 0;
  in >> word >> n;
  if (word != "meta") throw MalformedCheckpoint("expected meta");
  for (std::size_t i = 0; i < n; ++i) {
    std::string k, v;
    in >> k >> v;
    c.meta[k] = v;
  }
  in >> word >> n;
  if (word != "tensors") throw MalformedCheckpoint("expected tensors");
  std::vector<std::pair<std::string, std::vector<int>>> manifest;
  for (std::size_t i = 0; i < n; ++i) {
    std::string name;
    std::size_t ndims = 0;
    in >> name >> ndims;
    std::vector<int> shape(ndims);
    for (std::size_t d = 0; d < ndims; ++d) in >> shape[d];
    manifest.push_back({name, std::move(shape)});
  }
  std::size_t total = 0;
  in >> word >> total;
  if (word != "blob") throw MalformedCheckpoint("expected blob");
  in.ignore(1);  // newline before the binary section
  std::size_t seen = 0;
  for (auto& [name, shape] : manifest) {
    Tensor t(shape);
    for (double& v : t.data) {
      char bytes[sizeof(double)];
      in.read(bytes, sizeof(double));
      std::memcpy(&v, bytes, sizeof(double));
    }
    seen += t.size();
    c.tensors[name] = std::move(t);
  }
  if (!in || seen != total)
    throw MalformedCheckpoint("blob length does not match manifest");
  return c;
}

inline void save_checkpoint(const CheckpointData& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure(path);
  save_checkpoint(c, out);
}

inline CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure(path);
  return load_checkpoint(in);
}

namespace detail {

inline void put_sde(CheckpointData& c, const std::string& prefix,
                    const SdeSpec& s) {
  c.meta[prefix + ".kind"] = s.kind == SdeKind::VP ? "vp" : "ve";
  c.meta[prefix + ".p_min"] = format_double(s.p_min);
  c.meta[prefix + ".p_max"] = format_double(s.p_max);
  c.meta[prefix + ".steps"] = std::to_string(s.steps);
}

inline SdeSpec get_sde(const CheckpointData& c, const std::string& prefix) {
  SdeSpec s;
  s.kind = meta_str(c, prefix + ".kind") == "vp" ? SdeKind::VP : SdeKind::VE;
  s.p_min = meta_double(c, prefix + ".p_min");
  s.p_max = meta_double(c, prefix + ".p_max");
  s.steps = static_cast<int>(meta_int(c, prefix + ".steps"));
  s.validate();
  return s;
}

}  // namespace detail

inline CheckpointData to_checkpoint(const DiffusionCheckpoint& d) {
  CheckpointData c;
  c.kind = "diffusion";
  c.fingerprint = d.vocab_fingerprint;
  c.meta["net.n_max"] = std::to_string(d.net.n_max);
  c.meta["net.k"] = std::to_string(d.net.k);
  c.meta["net.theta_layers"] = std::to_string(d.net.theta_layers);
  c.meta["net.phi_layers"] = std::to_string(d.net.phi_layers);
  c.meta["net.hidden"] = std::to_string(d.net.hidden);
  c.meta["net.heads"] = std::to_string(d.net.heads);
  c.meta["net.head_dim"] = std::to_string(d.net.head_dim);
  c.meta["net.powers"] = std::to_string(d.net.powers);
  c.meta["net.gmh_hidden"] = std::to_string(d.net.gmh_hidden);
  c.meta["net.gmh_out"] = std::to_string(d.net.gmh_out);
  c.meta["net.pair_hidden"] = std::to_string(d.net.pair_hidden);
  detail::put_sde(c, "sde_f", d.sde_f);
  detail::put_sde(c, "sde_c", d.sde_c);
  c.meta["seed"] = std::to_string(d.seed);
  c.meta["hist.max"] = std::to_string(d.histogram.max_fragments);
  c.meta["hist.mean"] = detail::format_double(d.histogram.mean);
  for (const auto& [n, p] : d.histogram.probability)
    c.meta["hist.p" + std::to_string(n)] = detail::format_double(p);
  for (const auto& [name, t] : d.theta) c.tensors["theta/" + name] = t;
  for (const auto& [name, t] : d.phi) c.tensors["phi/" + name] = t;
  for (const auto& [name, t] : d.theta_ema) c.tensors["theta_ema/" + name] = t;
  for (const auto& [name, t] : d.phi_ema) c.tensors["phi_ema/" + name] = t;
  return c;
}

inline DiffusionCheckpoint from_diffusion_checkpoint(const CheckpointData& c) {
  if (c.kind != "diffusion") throw MalformedCheckpoint("kind " + c.kind);
  DiffusionCheckpoint d;
  d.vocab_fingerprint = c.fingerprint;
  d.net.n_max = static_cast<int>(detail::meta_int(c, "net.n_max"));
  d.net.k = static_cast<int>(detail::meta_int(c, "net.k"));
  d.net.theta_layers = static_cast<int>(detail::meta_int(c, "net.theta_layers"));
  d.net.phi_layers = static_cast<int>(detail::meta_int(c, "net.phi_layers"));
  d.net.hidden = static_cast<int>(detail::meta_int(c, "net.hidden"));
  d.net.heads = static_cast<int>(detail::meta_int(c, "net.heads"));
  d.net.head_dim = static_cast<int>(detail::meta_int(c, "net.head_dim"));
  d.net.powers = static_cast<int>(detail::meta_int(c, "net.powers"));
  d.net.gmh_hidden = static_cast<int>(detail::meta_int(c, "net.gmh_hidden"));
  d.net.gmh_out = static_cast<int>(detail::meta_int(c, "net.gmh_out"));
  d.net.pair_hidden = static_cast<int>(detail::meta_int(c, "net.pair_hidden"));
  d.sde_f = detail::get_sde(c, "sde_f");
  d.sde_c = detail::get_sde(c, "sde_c");
  d.seed = static_cast<std::uint64_t>(detail::meta_int(c, "seed"));
  d.histogram.max_fragments = static_cast<int>(detail::meta_int(c, "hist.max"));
  d.histogram.mean = detail::meta_double(c, "hist.mean");
  for (const auto& [k, v] : c.meta)
    if (k.rfind("hist.p", 0) == 0)
      d.histogram.probability[std::stoi(k.substr(6))] = std::stod(v);
  for (const auto& [name, t] : c.tensors) {
    auto slash = name.find('/');
    if (slash == std::string::npos)
      throw MalformedCheckpoint("unscoped tensor " + name);
    std::string scope = name.substr(0, slash), leaf = name.substr(slash + 1);
    if (scope == "theta") d.theta[leaf] = t;
    else if (scope == "phi") d.phi[leaf] = t;
    else if (scope == "theta_ema") d.theta_ema[leaf] = t;
    else if (scope == "phi_ema") d.phi_ema[leaf] = t;
    else throw MalformedCheckpoint("unknown scope " + scope);
  }
  return d;
}

inline CheckpointData to_checkpoint(const BondScorerParams& p) {
  CheckpointData c;
  c.kind = "bonds";
  c.fingerprint = p.vocab_fingerprint;
  c.meta["cfg.atom_dim"] = std::to_string(p.cfg.atom_dim);
  c.meta["cfg.frag_dim"] = std::to_string(p.cfg.frag_dim);
  c.meta["cfg.node_dim"] = std::to_string(p.cfg.node_dim);
  c.meta["cfg.edge_dim"] = std::to_string(p.cfg.edge_dim);
  c.meta["cfg.iterations"] = std::to_string(p.cfg.iterations);
  c.meta["vocab_size"] = std::to_string(p.vocab_size);
  std::string joined;
  for (const std::string& e : p.elements) {
    if (!joined.empty()) joined += ",";
    joined += e;
  }
  c.meta["elements"] = joined;
  c.tensors = p.params;
  return c;
}

inline BondScorerParams from_bond_checkpoint(const CheckpointData& c) {
  if (c.kind != "bonds") throw MalformedCheckpoint("kind " + c.kind);
  BondScorerParams p;
  p.vocab_fingerprint = c.fingerprint;
  p.cfg.atom_dim = static_cast<int>(detail::meta_int(c, "cfg.atom_dim"));
  p.cfg.frag_dim = static_cast<int>(detail::meta_int(c, "cfg.frag_dim"));
  p.cfg.node_dim = static_cast<int>(detail::meta_int(c, "cfg.node_dim"));
  p.cfg.edge_dim = static_cast<int>(detail::meta_int(c, "cfg.edge_dim"));
  p.cfg.iterations = static_cast<int>(detail::meta_int(c, "cfg.iterations"));
  p.vocab_size = static_cast<int>(detail::meta_int(c, "vocab_size"));
  std::string joined = detail::meta_str(c, "elements");
  std::string token;
  std::istringstream parts(joined);
  while (std::getline(parts, token, ',')) p.elements.push_back(token);
  p.params = c.tensors;
  return p;
}

}  // namespace orgmol

#endif  // ORGMOL_IO_CHECKPOINT_HPP
