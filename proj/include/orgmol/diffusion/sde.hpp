#ifndef ORGMOL_DIFFUSION_SDE_HPP
#define ORGMOL_DIFFUSION_SDE_HPP

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "orgmol/frag/decompose.hpp"

namespace orgmol {

struct OutOfRangeT : std::runtime_error {
  explicit OutOfRangeT(double t)
      : std::runtime_error("diffusion time out of range: " + std::to_string(t)) {}
};

struct InvalidSdeSpec : std::runtime_error {
  explicit InvalidSdeSpec(const std::string& what)
      : std::runtime_error("invalid SDE spec: " + what) {}
};

enum class SdeKind { VP, VE };

// VP: p_min/p_max are the beta range. VE: p_min/p_max are the sigma range.
struct SdeSpec {
  SdeKind kind = SdeKind::VP;
  double p_min = 0.1;
  double p_max = 1.0;
  int steps = 1000;

  void validate() const {
    if (!(0 < p_min && p_min < p_max)) throw InvalidSdeSpec("need 0 < p_min < p_max");
    if (steps < 1) throw InvalidSdeSpec("need steps >= 1");
  }
};

struct Marginal {
  double mean_coef = 1.0;
  double std = 0.0;
};

inline Marginal marginal(const SdeSpec& sde, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw OutOfRangeT(t);
  if (sde.kind == SdeKind::VP) {
    double log_coef = -0.25 * t * t * (sde.p_max - sde.p_min) - 0.5 * t * sde.p_min;
    double mean_coef = std::exp(log_coef);
    return {mean_coef, std::sqrt(std::max(0.0, 1.0 - mean_coef * mean_coef))};
  }
  return {1.0, t == 0.0 ? 0.0 : sde.p_min * std::pow(sde.p_max / sde.p_min, t)};
}

// Instantaneous drift coefficient of f_t(x) = drift_coef(t) * x.
inline double drift_coef(const SdeSpec& sde, double t) {
  if (sde.kind == SdeKind::VP)
    return -0.5 * (sde.p_min + t * (sde.p_max - sde.p_min));
  return 0.0;
}

inline double diffusion_coef(const SdeSpec& sde, double t) {
  if (sde.kind == SdeKind::VP)
    return std::sqrt(sde.p_min + t * (sde.p_max - sde.p_min));
  double sigma_t = sde.p_min * std::pow(sde.p_max / sde.p_min, t);
  return sigma_t * std::sqrt(2.0 * std::log(sde.p_max / sde.p_min));
}

struct PerturbResult {
  FragGraphTensor g;
  std::vector<double> zF;  // n_max * k, zero outside live rows
  std::vector<double> zC;  // n_max * n_max, symmetric, zero outside live pairs
};

// Forward kernel applied to both components; C noise is sampled on the upper
// triangle and mirrored so the perturbed topology stays symmetric.
inline PerturbResult perturb(const FragGraphTensor& g0, const SdeSpec& sde_f,
                             const SdeSpec& sde_c, double t_f, double t_c,
                             std::mt19937& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Marginal mf = marginal(sde_f, t_f);
  Marginal mc = marginal(sde_c, t_c);
  PerturbResult r;
  r.g = g0;
  r.zF.assign(g0.F.size(), 0.0);
  r.zC.assign(g0.C.size(), 0.0);
  for (int i = 0; i < g0.n_max; ++i) {
    if (!g0.mask[i]) continue;
    for (int j = 0; j < g0.k; ++j) {
      double z = dist(rng);
      r.zF[i * g0.k + j] = z;
      r.g.f_at(i, j) = mf.mean_coef * g0.f_at(i, j) + mf.std * z;
    }
  }
  for (int u = 0; u < g0.n_max; ++u) {
    if (!g0.mask[u]) continue;
    for (int v = u + 1; v < g0.n_max; ++v) {
      if (!g0.mask[v]) continue;
      double z = dist(rng);
      r.zC[u * g0.n_max + v] = r.zC[v * g0.n_max + u] = z;
      double value = mc.mean_coef * g0.c_at(u, v) + mc.std * z;
      r.g.c_at(u, v) = r.g.c_at(v, u) = value;
    }
  }
  return r;
}

struct QuantizedGraph {
  std::vector<int> fragment_ids;     // length n_live
  std::vector<std::uint8_t> adjacency;  // n_live * n_live, symmetric 0/1
};

inline QuantizedGraph quantize(const FragGraphTensor& g) {
  QuantizedGraph out;
  std::vector<int> live_rows;
  for (int i = 0; i < g.n_max; ++i)
    if (g.mask[i]) live_rows.push_back(i);
  const int n = static_cast<int>(live_rows.size());
  out.fragment_ids.reserve(n);
  for (int i : live_rows) {
    int best = 0;
    for (int j = 1; j < g.k; ++j)
      if (g.f_at(i, j) > g.f_at(i, best)) best = j;
    out.fragment_ids.push_back(best);
  }
  out.adjacency.assign(static_cast<size_t>(n) * n, 0);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      double v = g.c_at(live_rows[a], live_rows[b]);
      v = std::min(1.0, std::max(0.0, v));
      std::uint8_t bit = v >= 0.5 ? 1 : 0;
      out.adjacency[a * n + b] = out.adjacency[b * n + a] = bit;
    }
  return out;
}

}  // namespace orgmol

#endif  // ORGMOL_DIFFUSION_SDE_HPP
