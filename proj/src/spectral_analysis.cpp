#include "pnp/spectral_analysis.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace pnp {

std::string_view to_string(NormKind kind) { return kind == NormKind::euclid ? "euclid" : "D"; }

WeightedNorm WeightedNorm::diagonal(Vec d) {
  if (d.size() == 0 || !d.allFinite() || !(d.minCoeff() > 0.0)) {
    throw std::invalid_argument("WeightedNorm: diagonal must be finite and strictly positive");
  }
  WeightedNorm wn;
  wn.d_ = std::move(d);
  return wn;
}

const Vec& WeightedNorm::d() const {
  if (!d_) throw std::logic_error("WeightedNorm: Euclidean norm has no diagonal");
  return *d_;
}

double weighted_norm(const Vec& x, const WeightedNorm& wn) {
  if (wn.kind() == NormKind::euclid) return x.norm();
  if (x.size() != wn.d().size()) throw std::invalid_argument("weighted_norm: dimension mismatch");
  return std::sqrt(x.cwiseAbs2().dot(wn.d()));
}

LinOp conjugate(const LinOp& q, const Vec& d) {
  if (d.size() != q.dim()) throw std::invalid_argument("conjugate: dimension mismatch");
  const Vec sqrt_d = d.cwiseSqrt();
  const Vec inv_sqrt_d = sqrt_d.cwiseInverse();
  // (D^{1/2} Q D^{-1/2})^T = D^{-1/2} Q^T D^{1/2}
  return LinOp(
      q.dim(),
      [q, sqrt_d, inv_sqrt_d](const Vec& x) -> Vec {
        return sqrt_d.cwiseProduct(q.apply(inv_sqrt_d.cwiseProduct(x)));
      },
      [q, sqrt_d, inv_sqrt_d](const Vec& y) -> Vec {
        return inv_sqrt_d.cwiseProduct(q.adjoint(sqrt_d.cwiseProduct(y)));
      });
}

DenseMat conjugate_dense(const DenseMat& q, const Vec& d) {
  if (q.rows() != q.cols() || d.size() != q.rows()) {
    throw std::invalid_argument("conjugate_dense: dimension mismatch");
  }
  const Vec sqrt_d = d.cwiseSqrt();
  return sqrt_d.asDiagonal() * q * sqrt_d.cwiseInverse().asDiagonal();
}

NormEstimate operator_norm(const LinOp& q, const WeightedNorm& wn, const PowerOptions& options) {
  const PowerResult pr = wn.kind() == NormKind::euclid
                             ? power_method_sv(q, options)
                             : power_method_sv(conjugate(q, wn.d()), options);
  return {pr.sigma_max, wn.kind(), pr.converged, pr.iterations};
}

NormEstimate operator_norm_dense(const DenseMat& q, const WeightedNorm& wn) {
  const double value =
      wn.kind() == NormKind::euclid ? spectral_norm(q) : spectral_norm(conjugate_dense(q, wn.d()));
  return {value, wn.kind(), true, 0};
}

std::string_view param_name(Algorithm alg) { return alg == Algorithm::ista ? "gamma" : "rho"; }

std::vector<SweepRow> contraction_sweep(Algorithm alg, const KernelDenoiser& denoiser,
                                        const ForwardModel& fm, const std::vector<double>& params,
                                        const SweepOptions& options) {
  if (params.empty()) throw std::invalid_argument("contraction_sweep: empty parameter list");
  if (denoiser.dim() != fm.n()) throw std::invalid_argument("contraction_sweep: dimension mismatch");
  const bool dense = fm.n() <= options.dense_limit;
  const LinOp w = denoiser.as_linop();
  const Vec zero_b = Vec::Zero(fm.m());

  std::vector<WeightedNorm> norms{WeightedNorm::euclidean()};
  if (options.d_norm && denoiser.kind() == DenoiserKind::row_normalized) {
    norms.push_back(WeightedNorm::diagonal(denoiser.degree()));
  }

  std::vector<SweepRow> rows;
  for (double param : params) {
    const AffineIteration it = alg == Algorithm::ista
                                   ? build_ista_affine(w, fm, zero_b, param, dense)
                                   : build_u_operator(w, fm, zero_b, param, dense, options.prox_tol);
    for (const WeightedNorm& wn : norms) {
      const NormEstimate est =
          dense ? operator_norm_dense(*it.dense, wn) : operator_norm(it.Q, wn, options.power);
      rows.push_back({alg, param, est});
    }
  }
  return rows;
}

void write_sweep_csv_header(std::ostream& os) {
  os << "task,param_kind,param_value,norm_kind,value,converged,iterations\n";
}

void write_sweep_csv_rows(std::ostream& os, Task task, const std::vector<SweepRow>& rows) {
  const auto flags = os.flags();
  const auto precision = os.precision();
  for (const SweepRow& row : rows) {
    os << to_string(task) << ',' << param_name(row.algorithm) << ',' << std::setprecision(6)
       << row.param << ',' << to_string(row.estimate.norm_kind) << ',' << std::setprecision(10)
       << row.estimate.value << ',' << (row.estimate.converged ? "true" : "false") << ','
       << row.estimate.iterations << '\n';
  }
  os.flags(flags);
  os.precision(precision);
}

}  // namespace pnp
