#include "oracles.hpp"
#include "pnp/denoisers.hpp"
#include "pnp/pnp_iterations.hpp"

#include <doctest.h>

#include <cmath>

using namespace pnp;

namespace {

struct Instance {
  KernelDenoiser w;
  ForwardModel fm;
  Vec b;
};

// n = 16 instances over the three forward models, DSG or row-normalized NLM.
Instance make_instance(std::uint64_t seed, bool symmetric = true) {
  const Image guide = synthetic_texture(4, 4, seed);
  KernelDenoiser w = KernelDenoiser::build(guide, {});
  if (symmetric) w = w.symmetrized();
  ForwardModel fm = seed % 3 == 0   ? ForwardModel::inpaint(InpaintMask::random(4, 4, 0.4, seed))
                    : seed % 3 == 1 ? ForwardModel::deblur(4, 4, BlurKernel::uniform(3))
                                    : ForwardModel::superres(4, 4, BlurKernel::uniform(3), 2);
  Vec b = oracle::random_vec(fm.m(), seed + 100);
  return {std::move(w), std::move(fm), std::move(b)};
}

}  // namespace

TEST_SUITE("pnp_iterations") {
  TEST_CASE("algorithm names round-trip") {
    CHECK(parse_algorithm(to_string(Algorithm::ista)) == Algorithm::ista);
    CHECK(parse_algorithm(to_string(Algorithm::admm)) == Algorithm::admm);
    CHECK_THROWS_AS(parse_algorithm("fista"), std::invalid_argument);
  }

  TEST_CASE("ISTA step edge cases") {
    const ForwardModel full = ForwardModel::inpaint(InpaintMask::full(4, 4));
    const Vec b = oracle::random_vec(16, 1), x = oracle::random_vec(16, 2);
    const LinOp id = LinOp::identity(16);
    CHECK((ista_step(x, id, full, b, 1.0) - b).norm() < 1e-14);
    const Instance in = make_instance(3);
    CHECK((ista_step(x, in.w.as_linop(), in.fm, in.b, 0.0) - in.w.apply(x)).norm() < 1e-14);
  }

  TEST_CASE("ISTA step matches the dense affine oracle") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const Instance in = make_instance(seed, seed % 2 == 0);
      const DenseMat w = in.w.dense_W();
      const DenseMat a = in.fm.dense();
      const double gamma = 0.7;
      const DenseMat p = w * (DenseMat::Identity(16, 16) - gamma * a.transpose() * a);
      const Vec q = gamma * w * a.transpose() * in.b;
      const Vec x = oracle::random_vec(16, seed + 50);
      CHECK((ista_step(x, in.w.as_linop(), in.fm, in.b, gamma) - (p * x + q)).norm() < 1e-12);

      const AffineIteration it = build_ista_affine(in.w.as_linop(), in.fm, in.b, gamma, true);
      CHECK((*it.dense - p).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((it.r - q).norm() < 1e-12);
      CHECK((it.step(x) - ista_step(x, in.w.as_linop(), in.fm, in.b, gamma)).norm() < 1e-12);
      CHECK(adjoint_mismatch(it.Q, 3, seed) < 1e-12);
    }
  }

  TEST_CASE("ISTA affine edge cases") {
    const Instance in = make_instance(4);
    const AffineIteration g0 = build_ista_affine(in.w.as_linop(), in.fm, in.b, 0.0, true);
    CHECK((*g0.dense - in.w.dense_W()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(g0.r.norm() == 0.0);

    const ForwardModel full = ForwardModel::inpaint(InpaintMask::full(4, 4));
    const Vec b = oracle::random_vec(16, 5);
    const AffineIteration g1 = build_ista_affine(LinOp::identity(16), full, b, 1.0, true);
    CHECK(g1.dense->cwiseAbs().maxCoeff() == 0.0);
    CHECK((g1.r - b).norm() == 0.0);
  }

  TEST_CASE("ADMM fixed point with identity denoiser and full mask") {
    const ForwardModel full = ForwardModel::inpaint(InpaintMask::full(4, 4));
    const Vec b = oracle::random_vec(16, 6);
    const AdmmState s0{b, b, Vec::Zero(16)};
    const AdmmState s1 = admm_step(s0, LinOp::identity(16), full, b, 0.8);
    CHECK((s1.x - b).norm() < 1e-14);
    CHECK((s1.y - b).norm() < 1e-14);
    CHECK(s1.z.norm() < 1e-14);
  }

  TEST_CASE("ADMM y-iterates equal W applied to the u-sequence") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const Instance in = make_instance(seed, seed % 2 == 1);
      const LinOp w = in.w.as_linop();
      const double rho = 0.5 + seed;
      const AffineIteration r = build_u_operator(w, in.fm, in.b, rho, false, 1e-14);
      AdmmState st{Vec::Zero(16), oracle::random_vec(16, seed), oracle::random_vec(16, seed + 1)};
      st = admm_step(st, w, in.fm, in.b, rho, 1e-14);
      Vec u = st.y + st.z;
      Vec u_engine = u;
      double worst = 0.0;
      for (int k = 1; k <= 50; ++k) {
        worst = std::max(worst, (st.y - w.apply(u)).norm());
        worst = std::max(worst, (u - u_engine).norm());
        st = admm_step(st, w, in.fm, in.b, rho, 1e-14);
        u = r.step(u);
        u_engine = u_step(u_engine, w, in.fm, in.b, rho, 1e-14);
      }
      CHECK(worst <= 1e-10);
    }
  }

  TEST_CASE("u-operator matches the dense formula") {
    const Instance in = make_instance(2);
    const double rho = 2.0;
    const DenseMat a = in.fm.dense();
    const DenseMat inv =
        (DenseMat::Identity(16, 16) + rho * a.transpose() * a).inverse();
    const DenseMat f = 2.0 * inv - DenseMat::Identity(16, 16);
    CHECK((dense_reflected_resolvent(in.fm, rho) - f).cwiseAbs().maxCoeff() < 1e-12);
    const DenseMat v = 2.0 * in.w.dense_W() - DenseMat::Identity(16, 16);
    const DenseMat r = 0.5 * (DenseMat::Identity(16, 16) + f * v);
    const AffineIteration it = build_u_operator(in.w.as_linop(), in.fm, in.b, rho, true, 1e-14);
    CHECK((*it.dense - r).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((it.r - inv * rho * a.transpose() * in.b).norm() < 1e-10);
    CHECK(adjoint_mismatch(it.Q, 3, 4) < 1e-10);
  }

  TEST_CASE("u-operator tends to W as rho vanishes") {
    const Instance in = make_instance(1);
    const AffineIteration it = build_u_operator(in.w.as_linop(), in.fm, in.b, 1e-8);
    const Vec x = oracle::random_vec(16, 9);
    CHECK((it.Q.apply(x) - in.w.apply(x)).norm() <= 1e-8 * x.norm() * 10);
  }

  TEST_CASE("engine and affine iterates agree over 100 steps") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const Instance in = make_instance(seed, false);
      const LinOp w = in.w.as_linop();
      const AffineIteration p = build_ista_affine(w, in.fm, in.b, 0.9);
      const AffineIteration r = build_u_operator(w, in.fm, in.b, 1.5, false, 1e-14);
      Vec xe = oracle::random_vec(16, seed), xa = xe, ue = xe, ua = xe;
      double worst = 0.0;
      for (int k = 0; k < 100; ++k) {
        xe = ista_step(xe, w, in.fm, in.b, 0.9);
        xa = p.step(xa);
        ue = u_step(ue, w, in.fm, in.b, 1.5, 1e-14);
        ua = r.step(ua);
        worst = std::max({worst, (xe - xa).norm(), (ue - ua).norm()});
      }
      CHECK(worst <= 1e-10);
    }
  }

  TEST_CASE("fixed-point driver: zero map and scalar geometric series") {
    RunConfig cfg;
    cfg.stop_tol = 1e-12;
    const Vec c = Vec::Constant(3, 0.25);
    const ConvergenceTrace t0 = iterate_map([&c](const Vec&) { return c; }, Vec::Zero(3), cfg);
    // One step lands on c; the second confirms it.
    CHECK(t0.iterations <= 2);
    CHECK(t0.converged);
    CHECK((t0.fixed_point - c).norm() == 0.0);

    AffineIteration half{AffineKind::ista_P, LinOp::diagonal(Vec::Constant(1, 0.5)),
                         Vec::Constant(1, 1.0), std::nullopt};
    RunConfig g;
    g.max_iter = 30;
    g.stop_tol = 0.0;
    g.reference = Vec::Constant(1, 2.0);
    const ConvergenceTrace t = run_to_fixed_point(half, Vec::Zero(1), g);
    REQUIRE(t.residuals.size() == 31);
    for (std::size_t k = 0; k < t.residuals.size(); ++k)
      CHECK(t.residuals[k] == doctest::Approx(2.0 * std::pow(0.5, double(k))).epsilon(1e-14));
    CHECK(t.fixed_point[0] == doctest::Approx(2.0));
  }

  TEST_CASE("fixed-point driver flags divergence and weights residuals") {
    RunConfig cfg;
    cfg.max_iter = 200;
    const ConvergenceTrace t =
        iterate_map([](const Vec& x) -> Vec { return 3.0 * x; }, Vec::Ones(2), cfg);
    CHECK(t.diverged);
    CHECK_FALSE(t.converged);

    RunConfig w;
    w.weights = Vec::Constant(2, 4.0);
    w.reference = Vec::Zero(2);
    w.max_iter = 3;
    int calls = 0;
    w.observer = [&calls](int, const Vec&) { ++calls; };
    const ConvergenceTrace tw =
        iterate_map([](const Vec& x) -> Vec { return 0.5 * x; }, Vec::Ones(2), w);
    CHECK(calls == 4);
    for (std::size_t k = 0; k < tw.residuals.size(); ++k)
      CHECK(tw.residuals_d[k] == doctest::Approx(2.0 * tw.residuals[k]));
  }

  TEST_CASE("projected output drives stopping and residuals") {
    RunConfig cfg;
    cfg.project = [](const Vec& s) -> Vec { return s.head(1); };
    cfg.stop_tol = 1e-12;
    cfg.max_iter = 10;
    // Head is fixed, tail keeps moving: the projected step is zero at once.
    const ConvergenceTrace t = iterate_map(
        [](const Vec& s) -> Vec { return Vec{{s[0], s[1] + 1.0}}; }, Vec{{1.0, 0.0}}, cfg);
    CHECK(t.converged);
    CHECK(t.iterations == 1);
    CHECK(t.residuals.front() == 0.0);
  }
}
