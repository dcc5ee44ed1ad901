#include "oracles.hpp"
#include "pnp/spectral_analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace pnp;

namespace {

Vec positive_weights(Index n, std::uint64_t seed) {
  return oracle::random_vec(n, seed).cwiseAbs().array() + 0.1;
}

std::vector<SweepRow> rows_of(const std::vector<SweepRow>& rows, NormKind kind) {
  std::vector<SweepRow> out;
  for (const SweepRow& r : rows)
    if (r.estimate.norm_kind == kind) out.push_back(r);
  return out;
}

}  // namespace

TEST_SUITE("spectral_analysis") {
  TEST_CASE("weighted norm identities") {
    const Vec x = oracle::random_vec(7, 1);
    CHECK(weighted_norm(x, WeightedNorm::euclidean()) == doctest::Approx(x.norm()));
    CHECK(weighted_norm(x, WeightedNorm::diagonal(Vec::Ones(7))) == doctest::Approx(x.norm()));
    CHECK(weighted_norm(Vec::Ones(1), WeightedNorm::diagonal(Vec::Constant(1, 4.0))) == 2.0);
    const Vec d = positive_weights(7, 2);
    const double direct = (d.cwiseSqrt().cwiseProduct(x)).norm();
    CHECK(std::abs(weighted_norm(x, WeightedNorm::diagonal(d)) - direct) < 1e-14);
    CHECK_THROWS_AS(WeightedNorm::diagonal(Vec::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(WeightedNorm::diagonal(Vec::Constant(2, NAN)), std::invalid_argument);
    CHECK_THROWS(WeightedNorm::euclidean().d());
  }

  TEST_CASE("conjugation matches the dense similarity") {
    const DenseMat q = oracle::random_mat(8, 8, 3);
    const Vec d = positive_weights(8, 4);
    const DenseMat expect = d.cwiseSqrt().asDiagonal() * q * d.cwiseSqrt().cwiseInverse().asDiagonal();
    CHECK((conjugate_dense(q, d) - expect).cwiseAbs().maxCoeff() < 1e-12);
    const LinOp c = conjugate(LinOp::from_dense(q), d);
    CHECK((c.materialize() - expect).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(adjoint_mismatch(c, 4, 2) < 1e-12);
  }

  TEST_CASE("D-norm of a random matrix matches the SVD oracle") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const DenseMat q = oracle::random_mat(8, 8, seed);
      const Vec d = positive_weights(8, seed + 10);
      const DenseMat c = d.cwiseSqrt().asDiagonal() * q * d.cwiseSqrt().cwiseInverse().asDiagonal();
      const double want = oracle::sigma_max(c);
      PowerOptions opts;
      opts.max_iter = 200000;
      const NormEstimate est = operator_norm(LinOp::from_dense(q), WeightedNorm::diagonal(d), opts);
      CHECK(est.norm_kind == NormKind::D);
      CHECK(est.converged);
      CHECK(std::abs(est.value - want) < 1e-8 * want);
      const NormEstimate dense = operator_norm_dense(q, WeightedNorm::diagonal(d));
      CHECK(std::abs(dense.value - want) < 1e-10 * want);
      CHECK(dense.iterations == 0);
    }
  }

  TEST_CASE("natural norms of denoisers are one") {
    const Image guide = synthetic_texture(8, 8, 5);
    const KernelDenoiser nlm = KernelDenoiser::build(guide, {});
    const KernelDenoiser dsg = nlm.symmetrized();
    const NormEstimate e = operator_norm(dsg.as_linop(), WeightedNorm::euclidean());
    CHECK(std::abs(e.value - 1.0) < 1e-6);
    const NormEstimate dn = operator_norm(nlm.as_linop(), WeightedNorm::diagonal(nlm.degree()));
    CHECK(std::abs(dn.value - 1.0) < 1e-6);
    // The row-normalized W is not Euclidean-nonexpansive in general, only in D.
    CHECK(operator_norm_dense(nlm.dense_W(), WeightedNorm::euclidean()).value >= 1.0 - 1e-12);
  }

  TEST_CASE("symmetric denoiser sweeps stay below one on every task") {
    const Image guide = synthetic_texture(8, 8, 6);
    const KernelDenoiser dsg = KernelDenoiser::build(guide, {}).symmetrized();
    const std::vector<ForwardModel> models{
        ForwardModel::inpaint(InpaintMask::random(8, 8, 0.3, 1)),
        ForwardModel::deblur(8, 8, BlurKernel::uniform(3)),
        ForwardModel::superres(8, 8, BlurKernel::uniform(3), 2)};
    for (const ForwardModel& fm : models) {
      const auto ista =
          contraction_sweep(Algorithm::ista, dsg, fm, {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75});
      CHECK(ista.size() == 7);
      for (const SweepRow& r : ista) {
        CHECK(r.estimate.norm_kind == NormKind::euclid);
        CHECK(r.estimate.value < 1.0);
      }
      for (const SweepRow& r : contraction_sweep(Algorithm::admm, dsg, fm, {0.1, 1.0, 10.0}))
        CHECK(r.estimate.value < 1.0);
    }
  }

  TEST_CASE("kernel denoiser sweep reports both norms; D-norms contract") {
    const Image guide = synthetic_texture(8, 8, 7);
    const KernelDenoiser nlm = KernelDenoiser::build(guide, {});
    const ForwardModel fm = ForwardModel::inpaint(InpaintMask::random(8, 8, 0.3, 2));
    const auto rows = contraction_sweep(Algorithm::ista, nlm, fm, {0.25, 0.5, 0.75});
    CHECK(rows_of(rows, NormKind::euclid).size() == 3);
    const auto d = rows_of(rows, NormKind::D);
    REQUIRE(d.size() == 3);
    for (const SweepRow& r : d) CHECK(r.estimate.value < 1.0);

    // Dense oracle for the first D row.
    const DenseMat a = fm.dense();
    const DenseMat p = nlm.dense_W() * (DenseMat::Identity(64, 64) - 0.25 * a.transpose() * a);
    const Vec deg = nlm.degree();
    const DenseMat c =
        deg.cwiseSqrt().asDiagonal() * p * deg.cwiseSqrt().cwiseInverse().asDiagonal();
    CHECK(std::abs(d[0].estimate.value - oracle::sigma_max(c)) < 1e-9);
  }

  TEST_CASE("vanishing step size recovers the denoiser norm") {
    const Image guide = synthetic_texture(8, 8, 8);
    const KernelDenoiser nlm = KernelDenoiser::build(guide, {});
    const ForwardModel fm = ForwardModel::inpaint(InpaintMask::random(8, 8, 0.3, 3));
    for (const SweepRow& r : contraction_sweep(Algorithm::ista, nlm, fm, {1e-9})) {
      if (r.estimate.norm_kind == NormKind::D) CHECK(std::abs(r.estimate.value - 1.0) < 1e-6);
    }
    const KernelDenoiser dsg = nlm.symmetrized();
    for (const SweepRow& r : contraction_sweep(Algorithm::ista, dsg, fm, {1e-9}))
      CHECK(std::abs(r.estimate.value - 1.0) < 1e-6);
  }

  TEST_CASE("matrix-free sweep agrees with the dense one") {
    const Image guide = synthetic_texture(6, 6, 9);
    const KernelDenoiser dsg = KernelDenoiser::build(guide, {}).symmetrized();
    const ForwardModel fm = ForwardModel::deblur(6, 6, BlurKernel::uniform(3));
    SweepOptions mf;
    mf.dense_limit = 0;
    mf.power.max_iter = 200000;
    const auto dense = contraction_sweep(Algorithm::admm, dsg, fm, {0.5, 2.0});
    const auto free = contraction_sweep(Algorithm::admm, dsg, fm, {0.5, 2.0}, mf);
    REQUIRE(dense.size() == free.size());
    for (std::size_t i = 0; i < dense.size(); ++i)
      CHECK(std::abs(dense[i].estimate.value - free[i].estimate.value) < 1e-6);
  }

  TEST_CASE("sweep CSV schema") {
    CHECK_THROWS_AS(contraction_sweep(Algorithm::ista,
                                      KernelDenoiser::from_kernel(DenseMat::Identity(4, 4)),
                                      ForwardModel::inpaint(InpaintMask::full(2, 2)), {}),
                    std::invalid_argument);
    std::ostringstream os;
    write_sweep_csv_header(os);
    SweepRow row;
    row.param = 0.5;
    row.estimate.value = 0.75;
    row.estimate.converged = true;
    write_sweep_csv_rows(os, Task::deblur, {row});
    CHECK(os.str() ==
          "task,param_kind,param_value,norm_kind,value,converged,iterations\n"
          "deblur,gamma,0.5,euclid,0.75,true,0\n");
  }
}
