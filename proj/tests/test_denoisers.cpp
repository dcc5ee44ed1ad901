#include "oracles.hpp"
#include "pnp/denoisers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace pnp;

namespace {

KernelDenoiser nlm8(std::uint64_t seed = 3) {
  return KernelDenoiser::build(synthetic_texture(8, 8, seed), {});
}

}  // namespace

TEST_SUITE("denoisers") {
  TEST_CASE("constant guide gives the averaging denoiser") {
    const KernelDenoiser w = KernelDenoiser::build(Image(5, 5, 0.4), {});
    const Vec x = oracle::random_vec(25, 1);
    CHECK((w.apply(x) - Vec::Constant(25, x.mean())).cwiseAbs().maxCoeff() < 1e-13);
  }

  TEST_CASE("tiny bandwidth with distinct patches approaches identity") {
    KernelParams p;
    p.bandwidth = 1e-4;
    const KernelDenoiser w = KernelDenoiser::build(synthetic_texture(6, 6, 2, 0.3), p);
    CHECK((w.dense_W() - DenseMat::Identity(36, 36)).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("noise estimate and default bandwidth") {
    const Image flat(16, 16, 0.5);
    CHECK(estimate_noise_sigma(flat) == doctest::Approx(0.0));
    CHECK(default_bandwidth(flat) > 0.0);
    const Image tex = synthetic_texture(32, 32, 1);
    CHECK(estimate_noise_sigma(tex) > 0.0);
    CHECK(default_bandwidth(tex) >= 10.0 * estimate_noise_sigma(tex) - 1e-15);
  }

  TEST_CASE("Sinkhorn on the identity kernel") {
    const KernelDenoiser w = KernelDenoiser::from_kernel(DenseMat::Identity(5, 5)).symmetrized();
    CHECK((w.scaling() - Vec::Ones(5)).norm() < 1e-14);
    CHECK((w.dense_W() - DenseMat::Identity(5, 5)).norm() < 1e-14);
  }

  TEST_CASE("Sinkhorn on the all-ones kernel has the closed form 1/sqrt(n)") {
    const KernelDenoiser w = KernelDenoiser::from_kernel(DenseMat::Ones(4, 4)).symmetrized();
    CHECK(w.kind() == DenoiserKind::symmetric_ds);
    CHECK((w.scaling() - Vec::Constant(4, 0.5)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((w.dense_W() - DenseMat::Constant(4, 4, 0.25)).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("Sinkhorn failure reports the deviation") {
    SinkhornOptions opts;
    opts.max_iter = 1;
    opts.tol = 1e-15;
    DenseMat k = DenseMat::Ones(6, 6);
    k.diagonal().setConstant(5.0);
    k(0, 1) = k(1, 0) = 0.01;
    try {
      (void)KernelDenoiser::from_kernel(k).symmetrized(opts);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(e.last_residual() > 1e-15);
    }
  }

  TEST_CASE("symmetrized NLM on an 8x8 guide is doubly stochastic and certified") {
    const KernelDenoiser w = nlm8().symmetrized();
    const DenseMat wd = w.dense_W();
    CHECK((wd.rowwise().sum() - Vec::Ones(64)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((wd - wd.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    // Independent eigen oracle on the materialized matrix.
    Eigen::SelfAdjointEigenSolver<DenseMat> es(0.5 * (wd + wd.transpose()));
    const Vec ev = es.eigenvalues();
    CHECK(ev[0] >= -1e-9);
    CHECK(ev[63] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ev[62] < 1.0 - 1e-9);

    const SpectralCertificate cert = spectral_certificate(w);
    CHECK(cert.unit_simple);
    CHECK(cert.unit_multiplicity == 1);
    CHECK(std::abs(cert.second_eigenvalue - ev[62]) < 1e-10);
    CHECK(std::abs(cert.min_eigenvalue - ev[0]) < 1e-10);
  }

  TEST_CASE("row-normalized NLM certificate through the similar symmetric matrix") {
    const KernelDenoiser w = nlm8();
    const SpectralCertificate cert = spectral_certificate(w);
    CHECK(cert.min_eigenvalue >= -1e-9);
    CHECK(cert.max_eigenvalue <= 1.0 + 1e-12);
    CHECK(cert.unit_simple);
    // W and D^{1/2} W D^{-1/2} share eigenvalues; compare against the
    // nonsymmetric eigensolver applied to W directly.
    Eigen::EigenSolver<DenseMat> es(w.dense_W());
    Vec re = es.eigenvalues().real();
    std::sort(re.data(), re.data() + re.size());
    CHECK((re - cert.eigenvalues).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(es.eigenvalues().imag().cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("certificate examples: averaging and identity") {
    const KernelDenoiser avg = KernelDenoiser::from_kernel(DenseMat::Ones(6, 6)).symmetrized();
    const SpectralCertificate ca = spectral_certificate(avg);
    CHECK(ca.unit_simple);
    CHECK_FALSE(ca.nonsingular);
    CHECK(ca.eigenvalues.head(5).cwiseAbs().maxCoeff() < 1e-12);

    const KernelDenoiser id = KernelDenoiser::from_kernel(DenseMat::Identity(6, 6));
    const SpectralCertificate ci = spectral_certificate(id);
    CHECK(ci.unit_multiplicity == 6);
    CHECK_FALSE(ci.unit_simple);
    CHECK(ci.nonsingular);
  }

  TEST_CASE("apply is stochastic, linear and matches the dense matrix") {
    for (const KernelDenoiser& w : {nlm8(), nlm8().symmetrized()}) {
      CHECK((w.apply(Vec::Ones(64)) - Vec::Ones(64)).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((w.apply(Vec::Constant(64, 0.3)) - Vec::Constant(64, 0.3)).cwiseAbs().maxCoeff() < 1e-10);
      const Vec x = oracle::random_vec(64, 5), y = oracle::random_vec(64, 6);
      CHECK((w.apply(2.0 * x - 3.0 * y) - (2.0 * w.apply(x) - 3.0 * w.apply(y))).norm() < 1e-12);
      const DenseMat wd = w.dense_W();
      CHECK((w.apply(x) - wd * x).norm() < 1e-12);
      CHECK((w.apply_adjoint(x) - wd.transpose() * x).norm() < 1e-12);
      CHECK(adjoint_mismatch(w.as_linop(), 5, 1) < 1e-12);
    }
  }

  TEST_CASE("row-normalized adjoint is K D^{-1}") {
    const KernelDenoiser w = nlm8();
    const Vec x = oracle::random_vec(64, 8);
    const Vec expect = w.dense_kernel() * x.cwiseQuotient(w.degree());
    CHECK((w.apply_adjoint(x) - expect).norm() < 1e-12);
    const DenseMat s = w.symmetric_similar();
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("windowed search is sparse and agrees with a hand-built kernel") {
    KernelParams p;
    p.search_radius = 1;
    const Image guide = synthetic_texture(7, 7, 4);
    const KernelDenoiser w = KernelDenoiser::build(guide, p);
    CHECK_FALSE(w.is_dense());
    KernelParams full;
    full.bandwidth = default_bandwidth(guide);
    const DenseMat kf = KernelDenoiser::build(guide, full).dense_kernel();
    DenseMat masked = DenseMat::Zero(49, 49);
    for (int r = 0; r < 7; ++r)
      for (int c = 0; c < 7; ++c)
        for (int r2 = 0; r2 < 7; ++r2)
          for (int c2 = 0; c2 < 7; ++c2)
            if (std::abs(r - r2) <= 1 && std::abs(c - c2) <= 1)
              masked(r * 7 + c, r2 * 7 + c2) = kf(r * 7 + c, r2 * 7 + c2);
    CHECK((w.dense_kernel() - masked).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((w.apply(Vec::Ones(49)) - Vec::Ones(49)).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("invalid kernels are rejected") {
    DenseMat k = DenseMat::Identity(3, 3);
    k(0, 1) = 0.5;
    CHECK_THROWS_AS(KernelDenoiser::from_kernel(k), std::invalid_argument);
    k(1, 0) = 0.5;
    k(2, 2) = -1.0;
    CHECK_THROWS_AS(KernelDenoiser::from_kernel(k), std::invalid_argument);
    CHECK_THROWS_AS(nlm8().apply(Vec::Zero(3)), std::invalid_argument);
  }
}
