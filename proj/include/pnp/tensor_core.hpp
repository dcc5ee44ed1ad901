#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace pnp {

using Vec = Eigen::VectorXd;
using DenseMat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when an iterative numerical routine cannot reach its target.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

/// Largest problem size for which dense n x n materialization is allowed.
/// Defaults to 4096; overridden by the PNP_DENSE_MAX environment variable.
Index dense_max();

/// A square linear map on R^n given by its action and the action of its
/// adjoint. May additionally carry a dense materialization.
class LinOp {
 public:
  using Fn = std::function<Vec(const Vec&)>;

  LinOp(Index n, Fn apply, Fn adjoint);

  static LinOp from_dense(DenseMat m);
  static LinOp identity(Index n);
  static LinOp diagonal(Vec d);

  Index dim() const { return n_; }
  Vec apply(const Vec& x) const;
  Vec adjoint(const Vec& y) const;

  LinOp transposed() const;
  bool has_dense() const { return dense_ != nullptr; }

  /// Dense matrix of the operator; applies it to basis vectors when no
  /// stored matrix is available.
  DenseMat materialize() const;

 private:
  Index n_;
  Fn apply_;
  Fn adjoint_;
  std::shared_ptr<const DenseMat> dense_;
};

/// outer ∘ inner, i.e. x ↦ outer(inner(x)).
LinOp compose(const LinOp& outer, const LinOp& inner);

/// Largest |<Ax, y> - <x, A^T y>| / (|x| |y|) over random probes.
double adjoint_mismatch(const LinOp& op, int probes, std::uint64_t seed);

struct PowerOptions {
  double tol = 1e-10;
  int max_iter = 5000;
  std::uint64_t seed = 1;
};

struct PowerResult {
  double sigma_max = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Largest singular value of `op` by power iteration on op^T op.
///
/// Converged once successive Rayleigh quotients differ by less than
/// `tol` relatively. The iteration is run from two seeded start vectors and
/// the larger estimate is kept.
PowerResult power_method_sv(const LinOp& op, const PowerOptions& options = {});

struct SymEigen {
  Vec values;        ///< ascending
  DenseMat vectors;  ///< orthonormal columns, matching `values`
};

/// Eigendecomposition of a symmetric matrix. Throws std::invalid_argument
/// if max |M_ij - M_ji| > 1e-12 or the matrix exceeds the dense cap.
SymEigen eig_sym(const DenseMat& m);

/// Ascending eigenvalues only; same checks as eig_sym.
Vec eigvals_sym(const DenseMat& m);

/// Columns of `eig.vectors` whose eigenvalue lies within `tol` of `target`.
DenseMat eigenspace(const SymEigen& eig, double target, double tol);

/// Span of the eigenvectors for eigenvalues +1 and -1.
DenseMat unit_modulus_eigenspace(const SymEigen& eig, double tol = 1e-9);

/// dim(U ∩ V) for orthonormal bases U and V, counted as the singular values
/// of U^T V within `tol` of 1.
int subspace_intersection_dim(const DenseMat& u_basis, const DenseMat& v_basis,
                              double tol = 1e-9);

/// ||M||_2 as sqrt(lambda_max(M^T M)).
double spectral_norm(const DenseMat& m);

/// Random n x n orthogonal matrix (Haar, via QR with sign correction).
DenseMat random_orthogonal(Index n, std::uint64_t seed);

}  // namespace pnp
