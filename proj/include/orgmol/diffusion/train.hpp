#ifndef ORGMOL_DIFFUSION_TRAIN_HPP
#define ORGMOL_DIFFUSION_TRAIN_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "orgmol/diffusion/sde.hpp"
#include "orgmol/nets/score_nets.hpp"
#include "orgmol/tensor/adam.hpp"

namespace orgmol {

constexpr double kEpsT = 1e-5;

struct DiffusionTrainConfig {
  int epochs = 300;
  int batch_size = 32;
  double lr = 5e-3;
  double weight_decay = 1e-4;
  double lr_decay = 0.999;
  double ema = 0.999;
  std::uint64_t seed = 0;
};

struct DiffusionCheckpoint {
  NetConfig net;
  SdeSpec sde_f;
  SdeSpec sde_c;
  ParamMap theta;
  ParamMap phi;
  ParamMap theta_ema;
  ParamMap phi_ema;
  std::uint64_t vocab_fingerprint = 0;
  FragmentCountHistogram histogram;
  std::uint64_t seed = 0;
};

struct DsmLoss {
  double loss_f = 0.0;
  double loss_c = 0.0;
};

namespace detail {

inline std::vector<int> live_of(const FragGraphTensor& g) {
  std::vector<int> live(g.n_max);
  for (int i = 0; i < g.n_max; ++i) live[i] = g.mask[i] ? 1 : 0;
  return live;
}

}  // namespace detail

// Denoising objective for one batch. Builds the graph on `tape` and returns
// the two scalar loss nodes; `backward` on their sum fills parameter grads.
// Weighted by the marginal variance, the per-entry target is std*eps == -z.
inline std::pair<Tape::NodeId, Tape::NodeId> dsm_loss_nodes(
    Tape& tape, const NetConfig& cfg, const ParamNodes& theta,
    const ParamNodes& phi, const std::vector<FragGraphTensor>& batch,
    const SdeSpec& sde_f, const SdeSpec& sde_c, std::mt19937& rng) {
  if (batch.empty()) throw EmptyBatch();
  std::uniform_real_distribution<double> tdist(kEpsT, 1.0);
  std::vector<Tape::NodeId> f_terms, c_terms;
  size_t f_entries = 0, c_entries = 0;
  for (const FragGraphTensor& g0 : batch) {
    double tf = tdist(rng);
    double tc = tdist(rng);
    PerturbResult pr = perturb(g0, sde_f, sde_c, tf, tc, rng);
    auto live = detail::live_of(g0);
    auto F = tape.constant(Tensor({g0.n_max, g0.k}, pr.g.F));
    auto C = tape.constant(Tensor({g0.n_max, g0.n_max}, pr.g.C));

    double std_f = marginal(sde_f, tf).std;
    auto eps_f = eps_theta(tape, cfg, theta, F, C, live, std_f);
    auto res_f = tape.add(tape.scale(eps_f, std_f),
                          tape.constant(Tensor({g0.n_max, g0.k}, pr.zF)));
    f_terms.push_back(tape.sum(tape.mul(res_f, res_f)));
    f_entries += static_cast<size_t>(g0.n_live) * g0.k;

    double std_c = marginal(sde_c, tc).std;
    auto eps_c = eps_phi(tape, cfg, phi, F, C, live, std_c);
    auto res_c = tape.add(tape.scale(eps_c, std_c),
                          tape.constant(Tensor({g0.n_max, g0.n_max}, pr.zC)));
    c_terms.push_back(tape.sum(tape.mul(res_c, res_c)));
    c_entries += static_cast<size_t>(g0.n_live) * (g0.n_live - 1);
  }
  auto total = [&](std::vector<Tape::NodeId>& terms, size_t entries) {
    Tape::NodeId acc = terms[0];
    for (size_t i = 1; i < terms.size(); ++i) acc = tape.add(acc, terms[i]);
    return tape.scale(acc, entries ? 1.0 / static_cast<double>(entries) : 0.0);
  };
  return {total(f_terms, f_entries), total(c_terms, c_entries)};
}

inline DsmLoss dsm_loss(const NetConfig& cfg, const ParamMap& theta,
                        const ParamMap& phi,
                        const std::vector<FragGraphTensor>& batch,
                        const SdeSpec& sde_f, const SdeSpec& sde_c,
                        std::mt19937& rng) {
  Tape tape;
  auto tn = stage_params(tape, theta, false);
  auto pn = stage_params(tape, phi, false);
  auto [lf, lc] = dsm_loss_nodes(tape, cfg, tn, pn, batch, sde_f, sde_c, rng);
  return {tape.value(lf).data[0], tape.value(lc).data[0]};
}

struct EpochLoss {
  double loss_f = 0.0;
  double loss_c = 0.0;
};

inline DiffusionCheckpoint train_diffusion(
    const std::vector<FragGraphTensor>& corpus, const NetConfig& cfg,
    const SdeSpec& sde_f, const SdeSpec& sde_c,
    const FragmentCountHistogram& histogram, std::uint64_t vocab_fingerprint,
    const DiffusionTrainConfig& train,
    std::vector<EpochLoss>* history = nullptr) {
  if (corpus.empty()) throw EmptyBatch();
  sde_f.validate();
  sde_c.validate();
  std::mt19937 rng(static_cast<std::uint32_t>(train.seed));
  ParamMap theta = init_theta_params(cfg, rng);
  ParamMap phi = init_phi_params(cfg, rng);

  AdamConfig acfg;
  acfg.lr = train.lr;
  acfg.weight_decay = train.weight_decay;
  acfg.lr_decay = train.lr_decay;
  acfg.ema_decay = train.ema;
  Adam opt(acfg);

  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double ef = 0.0, ec = 0.0;
    int nbatches = 0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(train.batch_size)) {
      std::vector<FragGraphTensor> batch;
      for (size_t i = start;
           i < std::min(order.size(), start + static_cast<size_t>(train.batch_size));
           ++i)
        batch.push_back(corpus[order[i]]);
      Tape tape;
      auto tn = stage_params(tape, theta);
      auto pn = stage_params(tape, phi);
      auto [lf, lc] = dsm_loss_nodes(tape, cfg, tn, pn, batch, sde_f, sde_c, rng);
      ef += tape.value(lf).data[0];
      ec += tape.value(lc).data[0];
      ++nbatches;
      tape.backward(tape.add(lf, lc));
      auto step_all = [&](ParamMap& params, const ParamNodes& nodes) {
        for (auto& [name, param] : params) {
          const Tensor& g = tape.grad(nodes.at(name));
          opt.step(name, param, g.size() ? g : Tensor(param.shape));
        }
      };
      step_all(theta, tn);
      step_all(phi, pn);
    }
    opt.end_epoch();
    if (history) history->push_back({ef / nbatches, ec / nbatches});
  }

  DiffusionCheckpoint ckpt;
  ckpt.net = cfg;
  ckpt.sde_f = sde_f;
  ckpt.sde_c = sde_c;
  ckpt.theta = theta;
  ckpt.phi = phi;
  for (const auto& [name, param] : theta) ckpt.theta_ema[name] = opt.ema(name);
  for (const auto& [name, param] : phi) ckpt.phi_ema[name] = opt.ema(name);
  ckpt.vocab_fingerprint = vocab_fingerprint;
  ckpt.histogram = histogram;
  ckpt.seed = train.seed;
  return ckpt;
}

}  // namespace orgmol

#endif  // ORGMOL_DIFFUSION_TRAIN_HPP
