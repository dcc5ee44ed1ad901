#pragma once

#include "pnp/denoisers.hpp"
#include "pnp/forward_models.hpp"
#include "pnp/pnp_iterations.hpp"
#include "pnp/tensor_core.hpp"

#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace pnp {

enum class NormKind { euclid, D };

std::string_view to_string(NormKind kind);

/// ||x||_D = sqrt(x^T D x) for a positive diagonal D; Euclidean when D is absent.
class WeightedNorm {
 public:
  static WeightedNorm euclidean() { return WeightedNorm(); }
  /// Throws std::invalid_argument unless every entry is finite and > 0.
  static WeightedNorm diagonal(Vec d);

  NormKind kind() const { return d_ ? NormKind::D : NormKind::euclid; }
  /// Diagonal of D; only valid for NormKind::D.
  const Vec& d() const;

 private:
  WeightedNorm() = default;
  std::optional<Vec> d_;
};

double weighted_norm(const Vec& x, const WeightedNorm& wn);

struct NormEstimate {
  double value = 0.0;
  NormKind norm_kind = NormKind::euclid;
  bool converged = false;
  int iterations = 0;  ///< power iterations; 0 for a dense eigensolve
};

/// x ↦ D^{1/2} Q D^{-1/2} x, matrix-free.
LinOp conjugate(const LinOp& q, const Vec& d);

/// D^{1/2} Q D^{-1/2} as a dense matrix.
DenseMat conjugate_dense(const DenseMat& q, const Vec& d);

/// Induced norm of Q by power iteration (on the conjugated operator for D).
NormEstimate operator_norm(const LinOp& q, const WeightedNorm& wn,
                           const PowerOptions& options = {});

/// Induced norm of a dense Q through a symmetric eigensolve.
NormEstimate operator_norm_dense(const DenseMat& q, const WeightedNorm& wn);

struct SweepOptions {
  /// Use dense operators and eigensolves up to this n, power iteration above.
  Index dense_limit = 1024;
  /// Add D-norm rows with D = diag(K e). Ignored for symmetric denoisers.
  bool d_norm = true;
  PowerOptions power;
  double prox_tol = 1e-12;
};

struct SweepRow {
  Algorithm algorithm = Algorithm::ista;
  double param = 0.0;  ///< gamma for ISTA, rho for ADMM
  NormEstimate estimate;
};

std::string_view param_name(Algorithm alg);

/// Norm of P (ISTA) or R (ADMM u-sequence) for each parameter value.
std::vector<SweepRow> contraction_sweep(Algorithm alg, const KernelDenoiser& denoiser,
                                        const ForwardModel& fm, const std::vector<double>& params,
                                        const SweepOptions& options = {});

/// Header: task,param_kind,param_value,norm_kind,value,converged,iterations.
void write_sweep_csv_header(std::ostream& os);
void write_sweep_csv_rows(std::ostream& os, Task task, const std::vector<SweepRow>& rows);

}  // namespace pnp
