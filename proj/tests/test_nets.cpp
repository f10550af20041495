#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "orgmol/nets/score_nets.hpp"

using orgmol::NetConfig;
using orgmol::ParamMap;
using orgmol::Tape;
using orgmol::Tensor;

namespace {

NetConfig small_config() {
  NetConfig cfg;
  cfg.n_max = 4;
  cfg.k = 3;
  cfg.theta_layers = 2;
  cfg.phi_layers = 2;
  cfg.hidden = 4;
  cfg.heads = 2;
  cfg.head_dim = 2;
  cfg.powers = 2;
  cfg.gmh_hidden = 3;
  cfg.gmh_out = 2;
  cfg.pair_hidden = 3;
  return cfg;
}

Tensor random_tensor(std::vector<int> shape, std::mt19937& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor t(std::move(shape));
  for (double& v : t.data) v = dist(rng);
  return t;
}

Tensor random_symmetric(int n, std::mt19937& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor t({n, n});
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) t.at(u, v) = t.at(v, u) = dist(rng);
  return t;
}

Tensor permute_rows(const Tensor& t, const std::vector<int>& perm) {
  Tensor out(t.shape);
  for (int r = 0; r < t.rows(); ++r)
    for (int c = 0; c < t.cols(); ++c) out.at(perm[r], c) = t.at(r, c);
  return out;
}

Tensor permute_both(const Tensor& t, const std::vector<int>& perm) {
  Tensor out(t.shape);
  for (int u = 0; u < t.rows(); ++u)
    for (int v = 0; v < t.cols(); ++v) out.at(perm[u], perm[v]) = t.at(u, v);
  return out;
}

}  // namespace

TEST_CASE("gcn layer basics") {
  NetConfig cfg = small_config();
  std::mt19937 rng(1);
  ParamMap params;
  orgmol::detail::add_linear(params, "theta.gcn0", cfg.k, cfg.hidden, rng);

  SECTION("zero adjacency and zero bias reduce to relu(HW)") {
    params["theta.gcn0.b"] = Tensor({1, cfg.hidden});
    Tape t;
    auto nodes = orgmol::stage_params(t, params);
    Tensor H = random_tensor({cfg.n_max, cfg.k}, rng);
    auto h = t.leaf(H);
    auto c = t.leaf(Tensor({cfg.n_max, cfg.n_max}));
    std::vector<int> live(cfg.n_max, 1);
    auto mask = orgmol::detail::row_mask(t, live, cfg.hidden);
    auto out = orgmol::gcn_layer(t, h, c, nodes, "theta.gcn0", mask);

    Tensor expect({cfg.n_max, cfg.hidden});
    orgmol::gemm(H, false, params["theta.gcn0.W"], false, expect);
    for (double& v : expect.data) v = std::max(v, 0.0);
    for (size_t i = 0; i < expect.size(); ++i)
      REQUIRE(t.value(out).data[i] == Catch::Approx(expect.data[i]).margin(1e-12));
  }

  SECTION("single live node with zero adjacency sees only itself") {
    Tape t;
    auto nodes = orgmol::stage_params(t, params);
    Tensor H1 = random_tensor({cfg.n_max, cfg.k}, rng);
    Tensor H2 = H1;
    for (int c = 0; c < cfg.k; ++c) H2.at(2, c) += 5.0;
    std::vector<int> live(cfg.n_max, 0);
    live[0] = 1;
    auto mask = orgmol::detail::row_mask(t, live, cfg.hidden);
    auto c0 = t.leaf(Tensor({cfg.n_max, cfg.n_max}));
    auto o1 = orgmol::gcn_layer(t, t.leaf(H1), c0, nodes, "theta.gcn0", mask);
    auto o2 = orgmol::gcn_layer(t, t.leaf(H2), c0, nodes, "theta.gcn0", mask);
    for (int c = 0; c < cfg.hidden; ++c)
      REQUIRE(t.value(o1).at(0, c) == t.value(o2).at(0, c));
  }
}

TEST_CASE("eps_theta output shape at full size") {
  NetConfig cfg;
  cfg.n_max = 8;
  cfg.k = 100;
  std::mt19937 rng(0);
  ParamMap params = orgmol::init_theta_params(cfg, rng);
  Tape t;
  auto nodes = orgmol::stage_params(t, params);
  std::vector<int> live(cfg.n_max, 1);
  auto F = t.leaf(random_tensor({cfg.n_max, cfg.k}, rng));
  auto C = t.leaf(random_symmetric(cfg.n_max, rng));
  auto out = orgmol::eps_theta(t, cfg, nodes, F, C, live, 0.5);
  REQUIRE(t.value(out).rows() == 8);
  REQUIRE(t.value(out).cols() == 100);
  REQUIRE(t.value(out).all_finite());
}

TEST_CASE("permutation equivariance") {
  NetConfig cfg = small_config();
  std::mt19937 rng(11);
  ParamMap tp = orgmol::init_theta_params(cfg, rng);
  ParamMap pp = orgmol::init_phi_params(cfg, rng);
  Tensor F = random_tensor({cfg.n_max, cfg.k}, rng);
  Tensor C = random_symmetric(cfg.n_max, rng);
  std::vector<int> live(cfg.n_max, 1);
  std::vector<int> perm = {2, 0, 3, 1};

  Tape t;
  auto tn = orgmol::stage_params(t, tp);
  auto pn = orgmol::stage_params(t, pp);
  auto f1 = t.leaf(F);
  auto c1 = t.leaf(C);
  auto f2 = t.leaf(permute_rows(F, perm));
  auto c2 = t.leaf(permute_both(C, perm));

  auto th1 = orgmol::eps_theta(t, cfg, tn, f1, c1, live, 0.7);
  auto th2 = orgmol::eps_theta(t, cfg, tn, f2, c2, live, 0.7);
  Tensor th1p = permute_rows(t.value(th1), perm);
  for (size_t i = 0; i < th1p.size(); ++i)
    REQUIRE(std::abs(th1p.data[i] - t.value(th2).data[i]) < 1e-9);

  auto ph1 = orgmol::eps_phi(t, cfg, pn, f1, c1, live, 0.7);
  auto ph2 = orgmol::eps_phi(t, cfg, pn, f2, c2, live, 0.7);
  Tensor ph1p = permute_both(t.value(ph1), perm);
  for (size_t i = 0; i < ph1p.size(); ++i)
    REQUIRE(std::abs(ph1p.data[i] - t.value(ph2).data[i]) < 1e-9);
}

TEST_CASE("padding entries cannot affect live outputs") {
  NetConfig cfg = small_config();
  std::mt19937 rng(5);
  ParamMap tp = orgmol::init_theta_params(cfg, rng);
  ParamMap pp = orgmol::init_phi_params(cfg, rng);
  std::vector<int> live = {1, 1, 0, 0};
  Tensor F = random_tensor({cfg.n_max, cfg.k}, rng);
  Tensor C = random_symmetric(cfg.n_max, rng);
  Tensor Fd = F;
  Tensor Cd = C;
  for (int r = 0; r < cfg.n_max; ++r)
    for (int c = 0; c < cfg.n_max; ++c) {
      if (!live[r])
        for (int j = 0; j < cfg.k; ++j) Fd.at(r, j) += 100.0;
      if (!live[r] || !live[c]) Cd.at(r, c) = Cd.at(c, r) = 77.0;
    }

  Tape t;
  auto tn = orgmol::stage_params(t, tp);
  auto pn = orgmol::stage_params(t, pp);
  auto th1 = orgmol::eps_theta(t, cfg, tn, t.leaf(F), t.leaf(C), live, 1.0);
  auto th2 = orgmol::eps_theta(t, cfg, tn, t.leaf(Fd), t.leaf(Cd), live, 1.0);
  auto ph1 = orgmol::eps_phi(t, cfg, pn, t.leaf(F), t.leaf(C), live, 1.0);
  auto ph2 = orgmol::eps_phi(t, cfg, pn, t.leaf(Fd), t.leaf(Cd), live, 1.0);
  for (int r = 0; r < cfg.n_max; ++r) {
    for (int j = 0; j < cfg.k; ++j) {
      if (live[r])
        REQUIRE(t.value(th1).at(r, j) == t.value(th2).at(r, j));
      else
        REQUIRE(t.value(th2).at(r, j) == 0.0);
    }
    for (int c = 0; c < cfg.n_max; ++c) {
      if (live[r] && live[c])
        REQUIRE(t.value(ph1).at(r, c) == t.value(ph2).at(r, c));
      else
        REQUIRE(t.value(ph2).at(r, c) == 0.0);
    }
  }
}

TEST_CASE("gmh block properties") {
  NetConfig cfg = small_config();
  std::mt19937 rng(3);
  ParamMap pp = orgmol::init_phi_params(cfg, rng);

  SECTION("output is exactly symmetric") {
    Tape t;
    auto pn = orgmol::stage_params(t, pp);
    std::vector<int> live(cfg.n_max, 1);
    auto out = orgmol::eps_phi(t, cfg, pn,
                               t.leaf(random_tensor({cfg.n_max, cfg.k}, rng)),
                               t.leaf(random_symmetric(cfg.n_max, rng)), live,
                               0.4);
    const Tensor& v = t.value(out);
    for (int u = 0; u < cfg.n_max; ++u) {
      REQUIRE(v.at(u, u) == 0.0);
      for (int w = 0; w < cfg.n_max; ++w) REQUIRE(v.at(u, w) == v.at(w, u));
    }
  }

  SECTION("identical node rows give identical pair features") {
    Tape t;
    auto pn = orgmol::stage_params(t, pp);
    auto H = random_tensor({cfg.n_max, cfg.hidden}, rng);
    for (int c = 0; c < cfg.hidden; ++c) H.at(1, c) = H.at(0, c);
    Tensor A({cfg.n_max, cfg.n_max}, 1.0);
    auto out = orgmol::gmh_block(t, cfg, pn, "phi.gmh0.1", t.leaf(H), t.leaf(A));
    const Tensor& v = t.value(out);
    const int n = cfg.n_max;
    for (int w = 0; w < n; ++w)
      for (int c = 0; c < v.cols(); ++c)
        REQUIRE(v.at(0 * n + w, c) == Catch::Approx(v.at(1 * n + w, c)).margin(1e-12));
  }
}

TEST_CASE("network gradients match finite differences") {
  NetConfig cfg = small_config();
  std::mt19937 rng(21);
  Tensor F = random_tensor({cfg.n_max, cfg.k}, rng);
  Tensor C = random_symmetric(cfg.n_max, rng);
  std::vector<int> live = {1, 1, 1, 0};

  auto run = [&](const ParamMap& params, bool theta) {
    auto loss_of = [&](const ParamMap& pm) {
      Tape t;
      auto nodes = orgmol::stage_params(t, pm);
      auto out = theta ? orgmol::eps_theta(t, cfg, nodes, t.leaf(F), t.leaf(C),
                                           live, 0.8)
                       : orgmol::eps_phi(t, cfg, nodes, t.leaf(F), t.leaf(C),
                                         live, 0.8);
      return t.sum(t.mul(out, out));
    };
    Tape t;
    auto nodes = orgmol::stage_params(t, params);
    auto out = theta ? orgmol::eps_theta(t, cfg, nodes, t.leaf(F), t.leaf(C),
                                         live, 0.8)
                     : orgmol::eps_phi(t, cfg, nodes, t.leaf(F), t.leaf(C),
                                       live, 0.8);
    t.backward(t.sum(t.mul(out, out)));

    const double h = 1e-5;
    for (const auto& [name, tensor] : params) {
      const Tensor& g = t.grad(nodes.at(name));
      for (size_t i = 0; i < tensor.size(); ++i) {
        auto eval = [&](double delta) {
          ParamMap shifted = params;
          shifted[name].data[i] += delta;
          Tape t2;
          auto nodes2 = orgmol::stage_params(t2, shifted);
          auto out2 = theta
                          ? orgmol::eps_theta(t2, cfg, nodes2, t2.leaf(F),
                                              t2.leaf(C), live, 0.8)
                          : orgmol::eps_phi(t2, cfg, nodes2, t2.leaf(F),
                                            t2.leaf(C), live, 0.8);
          return t2.value(t2.sum(t2.mul(out2, out2))).data[0];
        };
        double numeric = (eval(h) - eval(-h)) / (2.0 * h);
        double analytic = g.size() ? g.data[i] : 0.0;
        double denom = std::max({std::abs(numeric), std::abs(analytic), 1.0});
        REQUIRE(std::abs(numeric - analytic) / denom < 1e-5);
      }
    }
  };

  run(orgmol::init_theta_params(cfg, rng), true);
  run(orgmol::init_phi_params(cfg, rng), false);
}

TEST_CASE("parameter count tracks the power order") {
  NetConfig c1 = small_config();
  c1.powers = 1;
  NetConfig c3 = small_config();
  c3.powers = 3;
  std::mt19937 rng(2);
  size_t n1 = orgmol::param_count(orgmol::init_phi_params(c1, rng));
  size_t n3 = orgmol::param_count(orgmol::init_phi_params(c3, rng));

  const NetConfig& c = c1;
  size_t per_block = static_cast<size_t>(c.heads) * c.hidden * c.head_dim * 2 +
                     (2 * c.gmh_hidden + c.gmh_hidden) +
                     (c.gmh_hidden * c.gmh_out + c.gmh_out);
  size_t added_blocks = static_cast<size_t>(c.phi_layers) * 2 * per_block;
  size_t pair_in_growth =
      static_cast<size_t>(c.phi_layers) * 2 * c.heads * c.gmh_out * c.pair_hidden;
  REQUIRE(n3 - n1 == added_blocks + pair_in_growth);
}

TEST_CASE("deterministic forward at fixed seed") {
  NetConfig cfg = small_config();
  auto once = [&] {
    std::mt19937 rng(0);
    ParamMap tp = orgmol::init_theta_params(cfg, rng);
    Tape t;
    auto tn = orgmol::stage_params(t, tp);
    std::vector<int> live(cfg.n_max, 1);
    auto out = orgmol::eps_theta(t, cfg, tn, t.leaf(Tensor({cfg.n_max, cfg.k})),
                                 t.leaf(Tensor({cfg.n_max, cfg.n_max})), live,
                                 1.0);
    return t.value(out);
  };
  Tensor a = once();
  Tensor b = once();
  REQUIRE(a.data == b.data);
  REQUIRE(a.all_finite());
  // Zero input with zero-initialized biases pins the output at exactly zero.
  for (double v : a.data) REQUIRE(v == 0.0);
}
