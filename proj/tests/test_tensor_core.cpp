#include "oracles.hpp"
#include "pnp/rng.hpp"
#include "pnp/tensor_core.hpp"

#include <doctest.h>

#include <cmath>

using namespace pnp;

TEST_SUITE("tensor_core") {
  TEST_CASE("rng is reproducible and stays in range") {
    Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
      const auto x = a.next_u64();
      CHECK(x == b.next_u64());
      differs = differs || x != c.next_u64();
    }
    CHECK(differs);
    Rng r(7);
    double mean = 0.0, sq = 0.0;
    const int samples = 20000;
    for (int i = 0; i < samples; ++i) {
      const double u = r.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      CHECK(r.below(5) < 5u);
      const double g = r.normal();
      mean += g;
      sq += g * g;
    }
    CHECK(std::abs(mean / samples) < 0.05);
    CHECK(std::abs(sq / samples - 1.0) < 0.05);
    CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  }

  TEST_CASE("LinOp checks dimensions and materializes") {
    const DenseMat m = oracle::random_mat(5, 5, 1);
    const LinOp op = LinOp::from_dense(m);
    const Vec x = oracle::random_vec(5, 2);
    CHECK((op.apply(x) - m * x).norm() < 1e-14);
    CHECK((op.adjoint(x) - m.transpose() * x).norm() < 1e-14);
    CHECK_THROWS_AS(op.apply(Vec::Zero(4)), std::invalid_argument);
    CHECK_THROWS_AS(op.adjoint(Vec::Zero(6)), std::invalid_argument);

    const LinOp fn(5, [m](const Vec& v) -> Vec { return m * v; },
                   [m](const Vec& v) -> Vec { return m.transpose() * v; });
    CHECK_FALSE(fn.has_dense());
    CHECK((fn.materialize() - m).norm() < 1e-14);
    CHECK((fn.transposed().materialize() - m.transpose()).norm() < 1e-14);
    CHECK(adjoint_mismatch(fn, 10, 3) < 1e-12);

    const LinOp composed = compose(LinOp::diagonal(Vec::Constant(5, 2.0)), op);
    CHECK((composed.apply(x) - 2.0 * m * x).norm() < 1e-12);

    // An operator whose declared adjoint is wrong is detected.
    const LinOp broken(5, [m](const Vec& v) -> Vec { return m * v; },
                       [m](const Vec& v) -> Vec { return m * v; });
    CHECK(adjoint_mismatch(broken, 10, 3) > 1e-3);
  }

  TEST_CASE("power method on identity and scaled identity") {
    const PowerResult id = power_method_sv(LinOp::identity(5));
    CHECK(id.converged);
    CHECK(id.sigma_max == doctest::Approx(1.0).epsilon(1e-12));
    const PowerResult half = power_method_sv(LinOp::diagonal(Vec::Constant(5, 0.5)));
    CHECK(half.sigma_max == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("power method matches dense SVD on random 8x8 matrices") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const DenseMat m = oracle::random_mat(8, 8, seed);
      PowerOptions opts;
      opts.tol = 1e-10;
      opts.max_iter = 100000;
      const PowerResult pr = power_method_sv(LinOp::from_dense(m), opts);
      CHECK(pr.converged);
      CHECK(std::abs(pr.sigma_max - oracle::sigma_max(m)) < 1e-8 * oracle::sigma_max(m));
    }
  }

  TEST_CASE("power method flags non-convergence") {
    DenseMat m = DenseMat::Identity(6, 6);
    m(0, 0) = 1.0;
    m(1, 1) = 0.999999;
    PowerOptions opts;
    opts.tol = 1e-16;
    opts.max_iter = 3;
    const PowerResult pr = power_method_sv(LinOp::from_dense(oracle::random_mat(6, 6, 9)), opts);
    CHECK_FALSE(pr.converged);
    CHECK(pr.sigma_max > 0.0);
  }

  TEST_CASE("eig_sym on diagonal, identity and random symmetric input") {
    const SymEigen id = eig_sym(DenseMat::Identity(3, 3));
    CHECK((id.values - Vec::Ones(3)).norm() < 1e-15);

    DenseMat d = DenseMat::Zero(3, 3);
    d(1, 1) = 0.5;
    d(2, 2) = 1.0;
    const SymEigen de = eig_sym(d);
    CHECK(de.values[0] == doctest::Approx(0.0));
    CHECK(de.values[1] == doctest::Approx(0.5));
    CHECK(de.values[2] == doctest::Approx(1.0));
    CHECK((de.vectors.cwiseAbs() - DenseMat::Identity(3, 3)).norm() < 1e-12);

    DenseMat r = oracle::random_mat(10, 10, 5);
    r = (0.5 * (r + r.transpose())).eval();
    const SymEigen re = eig_sym(r);
    const DenseMat back = re.vectors * re.values.asDiagonal() * re.vectors.transpose();
    CHECK((back - r).norm() < 1e-8);
    CHECK((re.vectors.transpose() * re.vectors - DenseMat::Identity(10, 10)).cwiseAbs().maxCoeff() <
          1e-10);
    for (Index i = 0; i < 10; ++i) {
      CHECK((r * re.vectors.col(i) - re.values[i] * re.vectors.col(i)).norm() < 1e-9);
      if (i > 0) CHECK(re.values[i - 1] <= re.values[i]);
    }
    CHECK((eigvals_sym(r) - re.values).norm() < 1e-12);
  }

  TEST_CASE("eig_sym rejects nonsymmetric input") {
    DenseMat m = DenseMat::Identity(3, 3);
    m(0, 1) = 1e-6;
    CHECK_THROWS_AS(eig_sym(m), std::invalid_argument);
  }

  TEST_CASE("eigenspaces at +-1") {
    Vec values(4);
    values << -1.0, 0.2, 0.7, 1.0;
    const SymEigen eig = eig_sym(DenseMat(values.asDiagonal()));
    CHECK(eigenspace(eig, 1.0, 1e-9).cols() == 1);
    CHECK(eigenspace(eig, 0.5, 1e-9).cols() == 0);
    CHECK(unit_modulus_eigenspace(eig).cols() == 2);
  }

  TEST_CASE("subspace intersection dimension") {
    const DenseMat e = DenseMat::Identity(3, 3);
    CHECK(subspace_intersection_dim(e.col(0), e.col(1)) == 0);
    CHECK(subspace_intersection_dim(e.col(0), e.col(0)) == 1);
    CHECK(subspace_intersection_dim(DenseMat(3, 0), e) == 0);
    CHECK_THROWS_AS(subspace_intersection_dim(2.0 * e.col(0), e.col(0)), std::invalid_argument);

    // 2-dim and 3-dim subspaces of R^4 sharing one constructed vector.
    const Vec shared = oracle::random_vec(4, 11).normalized();
    DenseMat u(4, 2), v(4, 3);
    u << shared, oracle::random_vec(4, 12);
    v << shared, oracle::random_mat(4, 2, 13);
    const DenseMat uq = Eigen::HouseholderQR<DenseMat>(u).householderQ() * DenseMat::Identity(4, 2);
    const DenseMat vq = Eigen::HouseholderQR<DenseMat>(v).householderQ() * DenseMat::Identity(4, 3);
    CHECK(subspace_intersection_dim(uq, vq) == 1);
    // Rank oracle: dim(U ∩ V) = dim U + dim V - rank [U V].
    DenseMat stacked(4, 5);
    stacked << uq, vq;
    Eigen::FullPivLU<DenseMat> lu(stacked);
    lu.setThreshold(1e-10);
    CHECK(2 + 3 - lu.rank() == 1);
  }

  TEST_CASE("spectral norm agrees with SVD") {
    for (std::uint64_t seed = 20; seed < 25; ++seed) {
      const DenseMat m = oracle::random_mat(12, 12, seed);
      CHECK(std::abs(spectral_norm(m) - oracle::sigma_max(m)) < 1e-10 * oracle::sigma_max(m));
    }
  }

  TEST_CASE("random orthogonal matrices are orthogonal and reproducible") {
    const DenseMat q = random_orthogonal(9, 4);
    CHECK((q.transpose() * q - DenseMat::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(q == random_orthogonal(9, 4));
    CHECK(q != random_orthogonal(9, 5));
  }
}
