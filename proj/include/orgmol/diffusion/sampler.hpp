#ifndef ORGMOL_DIFFUSION_SAMPLER_HPP
#define ORGMOL_DIFFUSION_SAMPLER_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "orgmol/diffusion/train.hpp"

namespace orgmol {

struct SamplerConfig {
  double snr = 0.2;
  double scale_coeff = 0.5;
  int corrector_steps = 1;
};

// Fills `score_F` (n_max*k) and `score_C` (n_max*n_max, symmetric) with the
// score estimate of each component at its own time.
using ScoreFn = std::function<void(const FragGraphTensor& g, double t_f,
                                   double t_c, std::vector<double>& score_F,
                                   std::vector<double>& score_C)>;

struct SampleBatch {
  std::vector<QuantizedGraph> samples;
  int aborted = 0;  // runs that left the finite range and were dropped
};

namespace detail {

inline int draw_n_live(const FragmentCountHistogram& hist, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = u(rng);
  double acc = 0.0;
  int last = 1;
  for (const auto& [n, p] : hist.probability) {
    acc += p;
    last = n;
    if (r <= acc) return n;
  }
  return last;
}

inline void symmetric_noise(const FragGraphTensor& g, std::vector<double>& z,
                            std::mt19937& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::fill(z.begin(), z.end(), 0.0);
  for (int u = 0; u < g.n_max; ++u) {
    if (!g.mask[u]) continue;
    for (int v = u + 1; v < g.n_max; ++v) {
      if (!g.mask[v]) continue;
      double n = dist(rng);
      z[u * g.n_max + v] = z[v * g.n_max + u] = n;
    }
  }
}

inline void node_noise(const FragGraphTensor& g, std::vector<double>& z,
                       std::mt19937& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::fill(z.begin(), z.end(), 0.0);
  for (int i = 0; i < g.n_max; ++i) {
    if (!g.mask[i]) continue;
    for (int j = 0; j < g.k; ++j) z[i * g.k + j] = dist(rng);
  }
}

inline double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline bool finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace detail

// One Predictor-Corrector reverse pass over pre-masked states, advanced in
// lockstep. The corrector step size uses batch-mean norms: a lone state near
// a mode has a vanishing score norm, which would blow the step size up.
// Returns per-sample success flags; failed states left the finite range.
inline std::vector<std::uint8_t> pc_reverse_batch(
    std::vector<FragGraphTensor>& batch, const SdeSpec& sde_f,
    const SdeSpec& sde_c, const ScoreFn& score, const SamplerConfig& cfg,
    std::vector<std::mt19937>& rngs) {
  const size_t n = batch.size();
  std::vector<std::uint8_t> ok(n, 1);
  if (n == 0) return ok;
  const int steps = std::max(sde_f.steps, sde_c.steps);
  const double dt = (1.0 - kEpsT) / steps;

  std::vector<std::vector<double>> sF(n), sC(n), zF(n), zC(n);
  for (size_t i = 0; i < n; ++i) {
    sF[i].resize(batch[i].F.size());
    sC[i].resize(batch[i].C.size());
    zF[i].resize(batch[i].F.size());
    zC[i].resize(batch[i].C.size());
  }

  auto check = [&](size_t i) {
    if (ok[i] && (!detail::finite(batch[i].F) || !detail::finite(batch[i].C)))
      ok[i] = 0;
  };

  for (int step = steps; step >= 1; --step) {
    double t = kEpsT + step * dt;

    // Predictor: Euler-Maruyama discretization of the reverse SDE.
    double gf = diffusion_coef(sde_f, t);
    double gc = diffusion_coef(sde_c, t);
    double df = -drift_coef(sde_f, t) * dt;
    double dc = -drift_coef(sde_c, t) * dt;
    for (size_t i = 0; i < n; ++i) {
      if (!ok[i]) continue;
      FragGraphTensor& g = batch[i];
      score(g, t, t, sF[i], sC[i]);
      detail::node_noise(g, zF[i], rngs[i]);
      detail::symmetric_noise(g, zC[i], rngs[i]);
      for (size_t j = 0; j < g.F.size(); ++j)
        g.F[j] += df * g.F[j] + gf * gf * dt * sF[i][j] +
                  gf * std::sqrt(dt) * zF[i][j];
      for (size_t j = 0; j < g.C.size(); ++j)
        g.C[j] += dc * g.C[j] + gc * gc * dt * sC[i][j] +
                  gc * std::sqrt(dt) * zC[i][j];
      check(i);
    }

    // Corrector: Langevin dynamics with a norm-matched step size.
    double t_next = kEpsT + (step - 1) * dt;
    for (int c = 0; c < cfg.corrector_steps; ++c) {
      double nsF = 0, nzF = 0, nsC = 0, nzC = 0;
      size_t alive = 0;
      for (size_t i = 0; i < n; ++i) {
        if (!ok[i]) continue;
        score(batch[i], t_next, t_next, sF[i], sC[i]);
        if (!detail::finite(sF[i]) || !detail::finite(sC[i])) {
          ok[i] = 0;  // diverged score poisons the shared norms otherwise
          continue;
        }
        detail::node_noise(batch[i], zF[i], rngs[i]);
        detail::symmetric_noise(batch[i], zC[i], rngs[i]);
        nsF += detail::norm(sF[i]);
        nzF += detail::norm(zF[i]);
        nsC += detail::norm(sC[i]);
        nzC += detail::norm(zC[i]);
        ++alive;
      }
      if (!alive) break;
      // A well-fit score has norm ~ ||z|| / sigma, so the noise-to-score
      // ratio is ~ sigma. An underestimated score norm would make the step
      // size explode, so the ratio is capped at twice its healthy value.
      auto delta_of = [&](double ns, double nz, double sigma) {
        if (ns <= 0.0) return 0.0;
        double ratio = cfg.snr * std::min(nz / ns, 2.0 * sigma);
        return 2.0 * cfg.scale_coeff * ratio * ratio;
      };
      double deltaF =
          delta_of(nsF / alive, nzF / alive, marginal(sde_f, t_next).std);
      double deltaC =
          delta_of(nsC / alive, nzC / alive, marginal(sde_c, t_next).std);
      for (size_t i = 0; i < n; ++i) {
        if (!ok[i]) continue;
        FragGraphTensor& g = batch[i];
        for (size_t j = 0; j < g.F.size(); ++j)
          g.F[j] += deltaF * sF[i][j] + std::sqrt(2.0 * deltaF) * zF[i][j];
        for (size_t j = 0; j < g.C.size(); ++j)
          g.C[j] += deltaC * sC[i][j] + std::sqrt(2.0 * deltaC) * zC[i][j];
        check(i);
      }
    }
  }
  return ok;
}

// Samples fragment graphs with an arbitrary score callback; sizes are drawn
// from the fragment-count histogram and each run starts at the SDE prior.
// Each sample owns an RNG stream derived from (seed, sample index).
inline SampleBatch pc_sample_with_score(
    const ScoreFn& score, const SdeSpec& sde_f, const SdeSpec& sde_c,
    const FragmentCountHistogram& hist, int n_max, int k, int n_samples,
    const SamplerConfig& cfg, std::uint64_t seed) {
  std::vector<FragGraphTensor> batch(n_samples);
  std::vector<std::mt19937> rngs;
  rngs.reserve(n_samples);
  std::mt19937 size_rng(static_cast<std::uint32_t>(seed));
  for (int s = 0; s < n_samples; ++s) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s)};
    rngs.emplace_back(seq);
    FragGraphTensor& g = batch[s];
    g.n_max = n_max;
    g.k = k;
    g.n_live = std::min(n_max, detail::draw_n_live(hist, size_rng));
    g.F.assign(static_cast<size_t>(n_max) * k, 0.0);
    g.C.assign(static_cast<size_t>(n_max) * n_max, 0.0);
    g.mask.assign(n_max, 0);
    for (int i = 0; i < g.n_live; ++i) g.mask[i] = 1;

    double prior_f = sde_f.kind == SdeKind::VE ? sde_f.p_max : 1.0;
    double prior_c = sde_c.kind == SdeKind::VE ? sde_c.p_max : 1.0;
    std::vector<double> zF(g.F.size()), zC(g.C.size());
    detail::node_noise(g, zF, rngs[s]);
    detail::symmetric_noise(g, zC, rngs[s]);
    for (size_t i = 0; i < g.F.size(); ++i) g.F[i] = prior_f * zF[i];
    for (size_t i = 0; i < g.C.size(); ++i) g.C[i] = prior_c * zC[i];
  }

  auto ok = pc_reverse_batch(batch, sde_f, sde_c, score, cfg, rngs);
  SampleBatch out;
  for (int s = 0; s < n_samples; ++s) {
    if (ok[s])
      out.samples.push_back(quantize(batch[s]));
    else
      ++out.aborted;
  }
  return out;
}

inline ScoreFn checkpoint_score(const DiffusionCheckpoint& ckpt) {
  return [&ckpt](const FragGraphTensor& g, double t_f, double t_c,
                 std::vector<double>& score_F, std::vector<double>& score_C) {
    Tape tape;
    auto tn = stage_params(tape, ckpt.theta_ema, false);
    auto pn = stage_params(tape, ckpt.phi_ema, false);
    auto live = detail::live_of(g);
    auto F = tape.constant(Tensor({g.n_max, g.k}, g.F));
    auto C = tape.constant(Tensor({g.n_max, g.n_max}, g.C));
    auto ef = eps_theta(tape, ckpt.net, tn, F, C, live,
                        marginal(ckpt.sde_f, t_f).std);
    auto ec = eps_phi(tape, ckpt.net, pn, F, C, live,
                      marginal(ckpt.sde_c, t_c).std);
    score_F = tape.value(ef).data;
    score_C = tape.value(ec).data;
  };
}

inline SampleBatch pc_sample(const DiffusionCheckpoint& ckpt, int n_samples,
                             const SamplerConfig& cfg, std::uint64_t seed) {
  return pc_sample_with_score(checkpoint_score(ckpt), ckpt.sde_f, ckpt.sde_c,
                              ckpt.histogram, ckpt.net.n_max, ckpt.net.k,
                              n_samples, cfg, seed);
}

}  // namespace orgmol

#endif  // ORGMOL_DIFFUSION_SAMPLER_HPP
