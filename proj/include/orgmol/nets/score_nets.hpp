#ifndef ORGMOL_NETS_SCORE_NETS_HPP
#define ORGMOL_NETS_SCORE_NETS_HPP

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "orgmol/tensor/tape.hpp"
#include "orgmol/tensor/tensor.hpp"

namespace orgmol {

struct NetConfig {
  int n_max = 0;
  int k = 0;  // fragment feature width
  int theta_layers = 2;
  int phi_layers = 6;
  int hidden = 16;
  int heads = 4;
  int head_dim = 4;
  int powers = 3;  // highest adjacency power fed to attention
  int gmh_hidden = 8;
  int gmh_out = 4;
  int pair_hidden = 8;
};

using ParamMap = std::map<std::string, Tensor>;
using ParamNodes = std::map<std::string, Tape::NodeId>;

namespace detail {

inline Tensor glorot(int rows, int cols, std::mt19937& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(1.0 / rows));
  Tensor t({rows, cols});
  for (double& v : t.data) v = dist(rng);
  return t;
}

inline void add_linear(ParamMap& p, const std::string& name, int in, int out,
                       std::mt19937& rng) {
  p[name + ".W"] = glorot(in, out, rng);
  p[name + ".b"] = Tensor({1, out});
}

}  // namespace detail

inline ParamMap init_theta_params(const NetConfig& cfg, std::mt19937& rng) {
  ParamMap p;
  for (int i = 0; i < cfg.theta_layers; ++i)
    detail::add_linear(p, "theta.gcn" + std::to_string(i),
                       i == 0 ? cfg.k : cfg.hidden, cfg.hidden, rng);
  detail::add_linear(p, "theta.mlp0", cfg.theta_layers * cfg.hidden,
                     cfg.hidden, rng);
  detail::add_linear(p, "theta.mlp1", cfg.hidden, cfg.k, rng);
  return p;
}

inline ParamMap init_phi_params(const NetConfig& cfg, std::mt19937& rng) {
  ParamMap p;
  for (int i = 0; i < cfg.phi_layers; ++i)
    detail::add_linear(p, "phi.gcn" + std::to_string(i),
                       i == 0 ? cfg.k : cfg.hidden, cfg.hidden, rng);
  for (int i = 0; i < cfg.phi_layers; ++i)
    for (int d = 1; d <= cfg.powers; ++d) {
      const std::string base =
          "phi.gmh" + std::to_string(i) + "." + std::to_string(d);
      for (int j = 0; j < cfg.heads; ++j) {
        p[base + ".q" + std::to_string(j)] =
            detail::glorot(cfg.hidden, cfg.head_dim, rng);
        p[base + ".k" + std::to_string(j)] =
            detail::glorot(cfg.hidden, cfg.head_dim, rng);
      }
      detail::add_linear(p, base + ".mlp0", 2, cfg.gmh_hidden, rng);
      detail::add_linear(p, base + ".mlp1", cfg.gmh_hidden, cfg.gmh_out, rng);
    }
  detail::add_linear(p, "phi.pair0",
                     cfg.phi_layers * cfg.powers * cfg.heads * cfg.gmh_out,
                     cfg.pair_hidden, rng);
  detail::add_linear(p, "phi.pair1", cfg.pair_hidden, 1, rng);
  return p;
}

inline size_t param_count(const ParamMap& p) {
  size_t n = 0;
  for (const auto& [name, t] : p) n += t.size();
  return n;
}

inline ParamNodes stage_params(Tape& tape, const ParamMap& params,
                               bool requires_grad = true) {
  ParamNodes nodes;
  for (const auto& [name, t] : params)
    nodes[name] = tape.leaf(t, requires_grad);
  return nodes;
}

namespace detail {

inline Tape::NodeId linear(Tape& t, const ParamNodes& p,
                           const std::string& name, Tape::NodeId x) {
  return t.add(t.matmul(x, p.at(name + ".W")), p.at(name + ".b"));
}

// Constant N x w matrix whose row r is all-ones when node r is live.
inline Tape::NodeId row_mask(Tape& t, const std::vector<int>& live, int w) {
  Tensor m({static_cast<int>(live.size()), w});
  for (size_t r = 0; r < live.size(); ++r)
    if (live[r])
      for (int c = 0; c < w; ++c) m.at(static_cast<int>(r), c) = 1.0;
  return t.constant(std::move(m));
}

// Constant N x N matrix selecting live pairs; `with_diagonal` keeps (u,u).
inline Tape::NodeId pair_mask(Tape& t, const std::vector<int>& live,
                              bool with_diagonal) {
  const int n = static_cast<int>(live.size());
  Tensor m({n, n});
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if ((u != v || with_diagonal) && live[u] && live[v]) m.at(u, v) = 1.0;
  return t.constant(std::move(m));
}

inline Tensor identity(int n) {
  Tensor eye({n, n});
  for (int i = 0; i < n; ++i) eye.at(i, i) = 1.0;
  return eye;
}

}  // namespace detail

// H' = relu(((C + I) H) W + b), with padded rows re-zeroed by `mask_w`.
inline Tape::NodeId gcn_layer(Tape& t, Tape::NodeId H, Tape::NodeId C,
                              const ParamNodes& p, const std::string& name,
                              Tape::NodeId mask) {
  auto eye = t.constant(detail::identity(t.value(C).rows()));
  auto mixed = t.matmul(t.add(C, eye), H);
  return t.mul(t.relu(detail::linear(t, p, name, mixed)), mask);
}

// Node-component score: GCN stack over (F_t, C_t), MLP over the concatenated
// layer outputs, raw result divided by the node marginal std at time t.
inline Tape::NodeId eps_theta(Tape& t, const NetConfig& cfg,
                              const ParamNodes& p, Tape::NodeId F,
                              Tape::NodeId C, const std::vector<int>& live,
                              double std_t) {
  F = t.mul(F, detail::row_mask(t, live, cfg.k));
  C = t.mul(C, detail::pair_mask(t, live, true));
  auto hmask = detail::row_mask(t, live, cfg.hidden);
  std::vector<Tape::NodeId> layers;
  Tape::NodeId h = F;
  for (int i = 0; i < cfg.theta_layers; ++i) {
    h = gcn_layer(t, h, C, p, "theta.gcn" + std::to_string(i), hmask);
    layers.push_back(h);
  }
  auto cat = t.concat(layers, 1);
  auto out = detail::linear(
      t, p, "theta.mlp1", t.relu(detail::linear(t, p, "theta.mlp0", cat)));
  out = t.mul(out, detail::row_mask(t, live, cfg.k));
  return t.scale(out, 1.0 / std_t);
}

namespace detail {

// Row permutation sending flattened pair (u,v) to (v,u).
inline std::vector<int> pair_transpose_perm(int n) {
  std::vector<int> perm(static_cast<size_t>(n) * n);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) perm[u * n + v] = v * n + u;
  return perm;
}

inline Tape::NodeId flatten_pairs(Tape& t, Tape::NodeId m, int n) {
  return t.reshape(m, {n * n, 1});
}

}  // namespace detail

// Multi-head attention over node features modulated by an adjacency power.
// Returns (N*N) x (heads * gmh_out) pair features, symmetric in (u,v).
inline Tape::NodeId gmh_block(Tape& t, const NetConfig& cfg,
                              const ParamNodes& p, const std::string& base,
                              Tape::NodeId H, Tape::NodeId A) {
  const int n = t.value(H).rows();
  const auto perm = detail::pair_transpose_perm(n);
  std::vector<Tape::NodeId> head_outs;
  for (int j = 0; j < cfg.heads; ++j) {
    auto q = t.matmul(H, p.at(base + ".q" + std::to_string(j)));
    auto k = t.matmul(H, p.at(base + ".k" + std::to_string(j)));
    auto s = t.scale(t.matmul(q, t.transpose(k)),
                     1.0 / std::sqrt(static_cast<double>(cfg.head_dim)));
    auto channels = t.concat({detail::flatten_pairs(t, t.mul(s, A), n),
                              detail::flatten_pairs(t, s, n)},
                             1);
    auto out = detail::linear(
        t, p, base + ".mlp1",
        t.relu(detail::linear(t, p, base + ".mlp0", channels)));
    out = t.scale(t.add(out, t.gather_rows(out, perm)), 0.5);
    head_outs.push_back(out);
  }
  return t.concat(head_outs, 1);
}

// Topology-component score: GCN trunk, GMH features per (layer, adjacency
// power), pairwise MLP to a scalar per pair; symmetric, zero diagonal,
// divided by the topology marginal std at time t.
inline Tape::NodeId eps_phi(Tape& t, const NetConfig& cfg, const ParamNodes& p,
                            Tape::NodeId F, Tape::NodeId C,
                            const std::vector<int>& live, double std_t) {
  const int n = t.value(C).rows();
  F = t.mul(F, detail::row_mask(t, live, cfg.k));
  C = t.mul(C, detail::pair_mask(t, live, true));
  auto hmask = detail::row_mask(t, live, cfg.hidden);
  std::vector<Tape::NodeId> layers;
  Tape::NodeId h = F;
  for (int i = 0; i < cfg.phi_layers; ++i) {
    h = gcn_layer(t, h, C, p, "phi.gcn" + std::to_string(i), hmask);
    layers.push_back(h);
  }
  std::vector<Tape::NodeId> powers;
  Tape::NodeId a = C;
  for (int d = 1; d <= cfg.powers; ++d) {
    powers.push_back(a);
    if (d < cfg.powers) a = t.matmul(a, C);
  }
  std::vector<Tape::NodeId> feats;
  for (int i = 0; i < cfg.phi_layers; ++i)
    for (int d = 1; d <= cfg.powers; ++d) {
      const std::string base =
          "phi.gmh" + std::to_string(i) + "." + std::to_string(d);
      feats.push_back(gmh_block(t, cfg, p, base, layers[i], powers[d - 1]));
    }
  auto cat = t.concat(feats, 1);
  auto out = detail::linear(
      t, p, "phi.pair1", t.relu(detail::linear(t, p, "phi.pair0", cat)));
  auto grid = t.mul(t.reshape(out, {n, n}), detail::pair_mask(t, live, false));
  return t.scale(grid, 1.0 / std_t);
}

}  // namespace orgmol

#endif  // ORGMOL_NETS_SCORE_NETS_HPP
