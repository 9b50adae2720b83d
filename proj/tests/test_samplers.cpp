#include <doctest.h>

#include <cmath>

#include "pdl/analytic.hpp"
#include "pdl/ensemble.hpp"
#include "pdl/errors.hpp"
#include "pdl/problems.hpp"
#include "pdl/samplers.hpp"

using namespace pdl;

namespace {

GaussModel1D model(double lambda = 1.0) { return {1.0, 2.0, 1.5, lambda}; }

Vec s1(double a) { return Vec::Constant(1, a); }

SamplerParams params(Method m, double tau, double lambda, double theta = 1.0, std::uint64_t seed = 1) {
  SamplerParams p;
  p.method = m;
  p.tau = tau;
  p.lambda = lambda;
  p.theta = theta;
  p.seed = seed;
  return p;
}

// Hand-written ULPDA recursion for the 1D quadratic model.
struct Hand {
  double x, y, xp;
};
Hand hand_step(Hand s, double xi, double tau, double lambda, double theta, bool inner) {
  const double cf = 1.0, cg = 2.0, k = 1.5, sigma = lambda * tau;
  const double xt = s.x + theta * (s.x - s.xp);
  const double y = (s.y + sigma * k * xt) / (1.0 + sigma * cf);
  const double v = s.x - tau * k * y;
  const double x = inner ? (v + std::sqrt(2 * tau) * xi) / (1.0 + tau / cg)
                         : v / (1.0 + tau / cg) + std::sqrt(2 * tau) * xi;
  return {x, y, s.x};
}

}  // namespace

TEST_CASE("origin is a fixed point without noise") {
  const TargetSpec t = gauss1d_target(model());
  for (Method m : {Method::ulpda_outer, Method::ulpda_inner, Method::ula, Method::prox_sub, Method::modified_sde}) {
    const Sampler s(t, params(m, 1e-3, 1.0));
    auto ws = s.workspace();
    ChainState st = ChainState::start(s1(0.0), s1(0.0));
    s.step(st, Vec::Zero(s.noise_dim()), ws);
    CHECK(st.x[0] == 0.0);
    CHECK(st.y[0] == 0.0);
    CHECK(st.n == 1);
  }
}

TEST_CASE("ULPDA matches the hand recursion") {
  const TargetSpec t = gauss1d_target(model());
  for (bool inner : {false, true}) {
    for (double theta : {1.0, 0.5, 0.0}) {
      const double tau = 0.01, lambda = 3.0;
      const Sampler s(t, params(inner ? Method::ulpda_inner : Method::ulpda_outer, tau, lambda, theta));
      auto ws = s.workspace();
      ChainState st = ChainState::start(s1(0.7), s1(-0.4));
      Hand h{0.7, -0.4, 0.7};
      ChainRng rng(5, 0);
      for (int n = 0; n < 200; ++n) {
        const double xi = rng.normal();
        s.step(st, s1(xi), ws);
        h = hand_step(h, xi, tau, lambda, theta, inner);
        REQUIRE(st.x[0] == doctest::Approx(h.x).epsilon(1e-12));
        REQUIRE(st.y[0] == doctest::Approx(h.y).epsilon(1e-12));
        REQUIRE(st.x_prev[0] == doctest::Approx(h.xp).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("theta = 0 with tiny sigma freezes the dual") {
  const TargetSpec t = gauss1d_target(model());
  const double tau = 0.01;
  const SamplerParams p = params(Method::ulpda_outer, tau, 1e-12, 0.0);
  ChainState st = ChainState::start(s1(0.9), s1(0.3));
  ChainRng rng(1, 0), rng2(1, 0);
  const ChainState nx = ulpda_step(st, t, p, rng);
  CHECK(std::abs(nx.y[0] - 0.3) < 1e-12);
  const double expect = (0.9 - tau * 1.5 * nx.y[0]) / (1.0 + tau / 2.0) + std::sqrt(2 * tau) * rng2.normal();
  CHECK(nx.x[0] == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("generalized noise with B_X = (sqrt2 I, 0), B_Y = 0 reproduces the outer variant") {
  const TargetSpec t = tv2pixel_target((Vec(2) << 0.0, 1.0).finished(), 0.3, 4.0);
  SamplerParams po = params(Method::ulpda_outer, 1e-3, 10.0);
  SamplerParams pg = po;
  pg.method = Method::ulpda_general;
  pg.b_x = Mat::Zero(2, 3);
  pg.b_x.leftCols(2) = std::sqrt(2.0) * Mat::Identity(2, 2);
  pg.b_y = Mat::Zero(1, 3);
  const Sampler so(t, po), sg(t, pg);
  CHECK(sg.noise_dim() == 3);
  auto wo = so.workspace(), wg = sg.workspace();
  ChainState a = ChainState::start((Vec(2) << 0.2, 0.5).finished(), s1(0.1)), b = a;
  ChainRng rng(9, 0);
  Vec xi(3);
  for (int n = 0; n < 2000; ++n) {
    rng.fill_normal(xi);
    so.step(a, xi.head(2), wo);
    sg.step(b, xi, wg);
    REQUIRE((a.x - b.x).norm() <= 1e-12);
    REQUIRE((a.y - b.y).norm() <= 1e-12);
  }
}

TEST_CASE("generalized noise shape errors") {
  const TargetSpec t = gauss1d_target(model());
  SamplerParams p = params(Method::ulpda_general, 1e-3, 1.0);
  CHECK_THROWS_AS(Sampler(t, p), DimensionError);
  p.b_x = Mat::Zero(1, 2);
  p.b_y = Mat::Zero(1, 1);
  CHECK_THROWS_AS(Sampler(t, p), DimensionError);
}

TEST_CASE("ULA") {
  const GaussModel1D m = model();
  const TargetSpec t = gauss1d_target(m);
  // mode, no noise
  const Sampler s(t, params(Method::ula, 0.01, 1.0));
  auto ws = s.workspace();
  ChainState st = ChainState::start(s1(0.0), s1(0.5));
  s.step(st, s1(0.0), ws);
  CHECK(st.x[0] == 0.0);
  CHECK(st.y[0] == 0.5);
  // 1D quadratic: one step at tau = 2/(omega + L) = 1/h'' collapses a coupled pair.
  const double a = 1.0 / m.c_g + m.k * m.k / m.c_f;
  const Sampler s1d(t, params(Method::ula, 1.0 / a, 1.0));
  auto w1 = s1d.workspace();
  ChainState p = ChainState::start(s1(2.0), s1(0.0)), q = ChainState::start(s1(-1.0), s1(0.0));
  s1d.step(p, s1(0.3), w1);
  s1d.step(q, s1(0.3), w1);
  CHECK(std::abs(p.x[0] - q.x[0]) < 1e-14);
}

TEST_CASE("ULA coupled contraction rate on an anisotropic quadratic") {
  // h(x) = |A x|^2/2 + |x|^2/(2 c_g) with f = |.|^2/2, K = A.
  Mat A(2, 2);
  A << 2.0, 0.0, 0.0, 0.5;
  const double cg = 4.0;
  TargetSpec t;
  t.K = dense_map(A);
  t.g_prox = scaled_square_prox(cg);
  t.fstar_prox = scaled_square_prox(1.0);
  t.g_grad = VecMap([cg](ConstVecRef x, VecRef out) { out = x / cg; });
  t.f_grad = VecMap([](ConstVecRef z, VecRef out) { out = z; });
  const double L = 4.0 + 0.25, om = 0.25 + 0.25;
  const double tau = 2.0 / (om + L), rate = (L - om) / (L + om);
  const Sampler s(t, params(Method::ula, tau, 1.0));
  auto ws = s.workspace();
  ChainState p = ChainState::start((Vec(2) << 1.0, 1.0).finished(), Vec::Zero(2));
  ChainState q = ChainState::start(Vec::Zero(2), Vec::Zero(2));
  ChainRng rng(3, 0);
  Vec xi(2);
  double d0 = (p.x - q.x).norm();
  for (int n = 0; n < 20; ++n) {
    rng.fill_normal(xi);
    s.step(p, xi, ws);
    s.step(q, xi, ws);
    const double d1 = (p.x - q.x).norm();
    REQUIRE(d1 <= rate * d0 * (1 + 1e-12) + 1e-300);
    d0 = d1;
  }
}

TEST_CASE("ULA discrete stationary variance") {
  // x' = (1 - tau a) x + sqrt(2 tau) xi has variance 2 / (a (2 - tau a)).
  const GaussModel1D m = model();
  const TargetSpec t = gauss1d_target(m);
  const double tau = 0.05, a = 1.0 / m.c_g + m.k * m.k / m.c_f;
  EnsembleOptions o;
  o.n_chains = 4000;
  o.n_steps = 400;
  o.burn_in = 200;
  o.thinning = 20;
  o.init = InitSpec::point();
  const SampleStore st = run_ensemble(t, params(Method::ula, tau, 1.0, 1.0, 17), o);
  const Mat X = st.primal_matrix();
  const double var = X.squaredNorm() / X.cols();
  const double expect = 2.0 / (a * (2.0 - tau * a));
  CHECK(std::abs(var / expect - 1.0) < 0.03);
}

TEST_CASE("Prox-Sub dual selection") {
  const double alpha = 4.0;
  const TargetSpec t = tv2pixel_target((Vec(2) << 0.0, 1.0).finished(), 0.3, alpha);
  const Sampler s(t, params(Method::prox_sub, 1e-3, 1.0));
  auto ws = s.workspace();
  ChainState st = ChainState::start((Vec(2) << 0.0, 1.0).finished(), s1(0.0));
  s.step(st, Vec::Zero(2), ws);
  CHECK(st.y[0] == alpha);
  st = ChainState::start((Vec(2) << 1.0, 0.0).finished(), s1(0.0));
  s.step(st, Vec::Zero(2), ws);
  CHECK(st.y[0] == -alpha);
  st = ChainState::start((Vec(2) << 0.5, 0.5).finished(), s1(3.0));
  s.step(st, Vec::Zero(2), ws);
  CHECK(st.y[0] == 0.0);
  // the primal at a tie is the plain data prox
  CHECK(st.x[0] == doctest::Approx(0.5 / (1.0 + 1e-3 / 0.09)));
}

TEST_CASE("group subgradient is minimal norm") {
  const VecMap sg = group_l21_subgrad(2.0, 2);
  Vec out(4);
  sg((Vec(4) << 3.0, 4.0, 0.0, 0.0).finished(), out);
  CHECK(out[0] == doctest::Approx(1.2));
  CHECK(out[1] == doctest::Approx(1.6));
  CHECK(out[2] == 0.0);
  CHECK(out[3] == 0.0);
}

TEST_CASE("modified SDE keeps the manifold residual decaying") {
  const GaussModel1D m = model(10.0);
  const TargetSpec t = gauss1d_target(m);
  const Sampler s(t, params(Method::modified_sde, 1e-3, 10.0));
  auto ws = s.workspace();
  // on the manifold y = f'(kx) = kx/c_f the residual stays zero
  ChainState st = ChainState::start(s1(0.8), s1(1.5 * 0.8));
  for (int n = 0; n < 100; ++n) {
    s.step(st, s1(0.0), ws);
    REQUIRE(std::abs(st.y[0] - 1.5 * st.x[0]) < 1e-12);
  }
  // off the manifold it shrinks
  st = ChainState::start(s1(0.8), s1(0.0));
  double r0 = std::abs(st.y[0] - 1.5 * st.x[0]);
  for (int n = 0; n < 100; ++n) {
    s.step(st, s1(0.0), ws);
    const double r1 = std::abs(st.y[0] - 1.5 * st.x[0]);
    REQUIRE(r1 < r0);
    r0 = r1;
  }
  // noise enters along the direction (1, k/c_f)
  st = ChainState::start(s1(0.0), s1(0.0));
  s.step(st, s1(1.0), ws);
  CHECK(st.y[0] == doctest::Approx(1.5 * st.x[0]).epsilon(1e-14));
}

TEST_CASE("missing data errors") {
  TargetSpec t = gauss1d_target(model());
  t.f_subgrad.reset();
  CHECK_THROWS_AS(Sampler(t, params(Method::prox_sub, 1e-3, 1.0)), DomainError);
  t = gauss1d_target(model());
  t.g_grad.reset();
  CHECK_THROWS_AS(Sampler(t, params(Method::ula, 1e-3, 1.0)), DomainError);
  CHECK_THROWS_AS(Sampler(t, params(Method::modified_sde, 1e-3, 1.0)), DomainError);
  t = gauss1d_target(model());
  t.f_hess.reset();
  CHECK_THROWS_AS(Sampler(t, params(Method::modified_sde, 1e-3, 1.0)), DomainError);
  CHECK_THROWS_AS(method_from_string("mala"), ConfigError);
  CHECK(method_from_string("prox_sub") == Method::prox_sub);
  CHECK(to_string(Method::ulpda_inner) == "ulpda_inner");
}

TEST_CASE("step dimension checks") {
  const TargetSpec t = gauss1d_target(model());
  ChainRng rng(1, 0);
  const ChainState bad = ChainState::start(Vec::Zero(2), s1(0.0));
  CHECK_THROWS_AS(ulpda_step(bad, t, params(Method::ulpda_outer, 1e-3, 1.0), rng), DimensionError);
  CHECK_THROWS_AS(ulpda_step(ChainState::start(s1(0), s1(0)), t, params(Method::ula, 1e-3, 1.0), rng), DomainError);
  CHECK(ChainState::start(s1(0.3), s1(0.0)).x_prev[0] == 0.3);
}

TEST_CASE("validate_params") {
  const TargetSpec t = tv2pixel_target((Vec(2) << 0.0, 1.0).finished(), 0.3, 4.0);
  const double L = t.K.norm();
  CHECK(L == doctest::Approx(std::sqrt(2.0)));
  // tau = sigma = 1/(2L)
  ValidationReport r = validate_params(t, params(Method::ulpda_outer, 0.5 / L, 1.0));
  CHECK(r.stability_regime);
  CHECK(r.theta_tau_sigma_L2 == doctest::Approx(0.25));
  // omega_fstar = 0 for TV, so contraction needs theta >= 1
  r = validate_params(t, params(Method::ulpda_outer, 0.5 / L, 1.0, 0.99));
  CHECK_FALSE(r.contraction_regime);
  CHECK_FALSE(r.stability_regime);
  CHECK_THROWS_AS(validate_params(t, params(Method::ulpda_outer, 1.0, 1.0)), RegimeError);
  // Prox-Sub and ULA are not bound by the primal-dual condition
  CHECK_NOTHROW(validate_params(t, params(Method::prox_sub, 1.0, 1.0)));
  CHECK_THROWS_AS(validate_params(t, params(Method::ulpda_outer, 0.0, 1.0)), DomainError);
  CHECK_THROWS_AS(validate_params(t, params(Method::ulpda_outer, 1e-3, -1.0)), DomainError);
  CHECK_THROWS_AS(validate_params(t, params(Method::ulpda_outer, 1e-3, 1.0, 1.5)), DomainError);
  CHECK_THROWS_AS(validate_params(t, params(Method::ulpda_outer, NAN, 1.0)), DomainError);
}

TEST_CASE("validate_params contraction arithmetic") {
  // c_g = 2 gives omega_g = 0.5; f* = c_f y^2/2 gives omega_f* = c_f = 1.
  const TargetSpec t = gauss1d_target(model());
  const double tau = 0.1, sigma = 0.1, theta = 0.95;
  const ValidationReport r = validate_params(t, params(Method::ulpda_outer, tau, sigma / tau, theta));
  CHECK(r.omega_g == doctest::Approx(0.5));
  CHECK(r.omega_fstar == doctest::Approx(1.0));
  const double need_c = std::max(1.0 / (1.0 + 2 * 0.5 * tau), 1.0 / (1.0 + 2 * 1.0 * sigma));
  const double need_b = std::max(1.0 / (1.0 + 0.5 * tau), 1.0 / (1.0 + 1.0 * sigma));
  CHECK(r.contraction_regime == (theta >= need_c));
  CHECK(r.bias_regime == (theta >= need_b));
  CHECK(r.contraction_regime);
  CHECK_FALSE(r.bias_regime);
  CHECK(r.theta_tau_sigma_L2 == doctest::Approx(theta * tau * sigma * 2.25));
}

TEST_CASE("record_schedule") {
  CHECK(record_schedule(0, 0, 1) == std::vector<std::uint64_t>{0});
  CHECK(record_schedule(10, 4, 3) == std::vector<std::uint64_t>{4, 7, 10});
  CHECK(record_schedule(10, 11, 1).empty());
}

TEST_CASE("run_ensemble") {
  const TargetSpec t = tv2pixel_target((Vec(2) << 0.0, 1.0).finished(), 0.3, 4.0);
  EnsembleOptions o;
  o.n_chains = 1;
  o.n_steps = 0;
  o.init = InitSpec::point((Vec(2) << 0.25, 0.5).finished(), s1(1.0));
  SampleStore st = run_ensemble(t, params(Method::ulpda_outer, 1e-2, 10.0), o);
  REQUIRE(st.n_records() == 1);
  CHECK(st.x(0, 0)[0] == 0.25);
  CHECK(st.y(0, 0)[0] == 1.0);

  o.n_chains = 37;
  o.n_steps = 300;
  o.burn_in = 100;
  o.thinning = 50;
  o.init = InitSpec::gaussian(1.0, 0.5);
  const SamplerParams p = params(Method::ulpda_outer, 1e-2, 10.0, 1.0, 77);
  const SampleStore a = run_ensemble(t, p, o);
  const SampleStore b = run_ensemble(t, p, o);
  CHECK(a == b);
  for (unsigned w : {2u, 3u, 8u}) {
    o.workers = w;
    CHECK(run_ensemble(t, p, o) == a);
  }
  CHECK(a.n_records() == 5);
  CHECK(a.primal_matrix().cols() == 5 * 37);
  // chain streams do not depend on the ensemble size
  o.n_chains = 5;
  const SampleStore c = run_ensemble(t, p, o);
  for (std::size_t r = 0; r < c.n_records(); ++r)
    for (std::size_t i = 0; i < 5; ++i) REQUIRE(c.x(r, i) == a.x(r, i));
  SamplerParams p2 = p;
  p2.seed = 78;
  CHECK_FALSE(run_ensemble(t, p2, o) == c);
  o.n_chains = 0;
  CHECK_THROWS_AS(run_ensemble(t, p, o), DomainError);
}
