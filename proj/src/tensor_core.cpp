#include "pnp/tensor_core.hpp"

#include "pnp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace pnp {

Index dense_max() {
  if (const char* env = std::getenv("PNP_DENSE_MAX")) {
    try {
      const long long v = std::stoll(env);
      if (v > 0) return static_cast<Index>(v);
    } catch (const std::exception&) {
    }
  }
  return 4096;
}

LinOp::LinOp(Index n, Fn apply, Fn adjoint)
    : n_(n), apply_(std::move(apply)), adjoint_(std::move(adjoint)) {
  if (n < 1) throw std::invalid_argument("LinOp: dimension must be >= 1");
}

LinOp LinOp::from_dense(DenseMat m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("LinOp::from_dense: matrix must be square");
  }
  auto shared = std::make_shared<const DenseMat>(std::move(m));
  LinOp op(
      shared->rows(), [shared](const Vec& x) -> Vec { return *shared * x; },
      [shared](const Vec& y) -> Vec { return shared->transpose() * y; });
  op.dense_ = shared;
  return op;
}

LinOp LinOp::identity(Index n) {
  auto same = [](const Vec& x) -> Vec { return x; };
  return LinOp(n, same, same);
}

LinOp LinOp::diagonal(Vec d) {
  const Index n = d.size();
  auto shared = std::make_shared<const Vec>(std::move(d));
  auto scale = [shared](const Vec& x) -> Vec {
    return shared->cwiseProduct(x);
  };
  return LinOp(n, scale, scale);
}

Vec LinOp::apply(const Vec& x) const {
  if (x.size() != n_) throw std::invalid_argument("LinOp::apply: dimension mismatch");
  return apply_(x);
}

Vec LinOp::adjoint(const Vec& y) const {
  if (y.size() != n_) throw std::invalid_argument("LinOp::adjoint: dimension mismatch");
  return adjoint_(y);
}

LinOp LinOp::transposed() const {
  LinOp t(n_, adjoint_, apply_);
  if (dense_) t.dense_ = std::make_shared<const DenseMat>(dense_->transpose());
  return t;
}

DenseMat LinOp::materialize() const {
  if (dense_) return *dense_;
  if (n_ > dense_max()) {
    throw std::invalid_argument("LinOp::materialize: dimension exceeds dense cap");
  }
  DenseMat m(n_, n_);
  Vec basis = Vec::Zero(n_);
  for (Index j = 0; j < n_; ++j) {
    basis[j] = 1.0;
    m.col(j) = apply_(basis);
    basis[j] = 0.0;
  }
  return m;
}

LinOp compose(const LinOp& outer, const LinOp& inner) {
  if (outer.dim() != inner.dim()) {
    throw std::invalid_argument("compose: dimension mismatch");
  }
  return LinOp(
      outer.dim(),
      [outer, inner](const Vec& x) -> Vec { return outer.apply(inner.apply(x)); },
      [outer, inner](const Vec& y) -> Vec { return inner.adjoint(outer.adjoint(y)); });
}

double adjoint_mismatch(const LinOp& op, int probes, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    Vec x(op.dim()), y(op.dim());
    for (Index i = 0; i < op.dim(); ++i) x[i] = rng.normal();
    for (Index i = 0; i < op.dim(); ++i) y[i] = rng.normal();
    const double lhs = op.apply(x).dot(y);
    const double rhs = x.dot(op.adjoint(y));
    worst = std::max(worst, std::abs(lhs - rhs) / (x.norm() * y.norm()));
  }
  return worst;
}

namespace {

PowerResult power_iteration(const LinOp& op, const PowerOptions& options,
                            std::uint64_t seed) {
  Rng rng(seed);
  Vec v(op.dim());
  for (Index i = 0; i < op.dim(); ++i) v[i] = rng.normal();
  v.normalize();

  PowerResult result;
  double previous = -1.0;
  for (int it = 1; it <= options.max_iter; ++it) {
    const Vec qv = op.apply(v);
    const double rayleigh = qv.squaredNorm();  // v^T Q^T Q v, |v| = 1
    result.sigma_max = std::sqrt(rayleigh);
    result.iterations = it;
    if (rayleigh == 0.0) {
      result.converged = true;
      return result;
    }
    if (previous >= 0.0 && std::abs(rayleigh - previous) < options.tol * rayleigh) {
      result.converged = true;
      return result;
    }
    previous = rayleigh;
    v = op.adjoint(qv);
    const double norm = v.norm();
    if (norm == 0.0) {
      result.converged = true;
      return result;
    }
    v /= norm;
  }
  return result;
}

void check_symmetric(const DenseMat& m, const char* who) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(who) + ": matrix must be square");
  }
  if (m.rows() > dense_max()) {
    throw std::invalid_argument(std::string(who) + ": dimension exceeds dense cap");
  }
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) {
    throw std::invalid_argument(std::string(who) + ": matrix is not symmetric");
  }
}

}  // namespace

PowerResult power_method_sv(const LinOp& op, const PowerOptions& options) {
  if (!(options.tol > 0.0) || options.max_iter < 1) {
    throw std::invalid_argument("power_method_sv: need tol > 0 and max_iter >= 1");
  }
  const PowerResult first = power_iteration(op, options, options.seed);
  const PowerResult second = power_iteration(op, options, mix_seed(options.seed, 1));
  return second.sigma_max > first.sigma_max ? second : first;
}

SymEigen eig_sym(const DenseMat& m) {
  check_symmetric(m, "eig_sym");
  const DenseMat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<DenseMat> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eig_sym: eigensolver failed", 0.0);
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Vec eigvals_sym(const DenseMat& m) {
  check_symmetric(m, "eigvals_sym");
  const DenseMat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<DenseMat> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigvals_sym: eigensolver failed", 0.0);
  }
  return solver.eigenvalues();
}

DenseMat eigenspace(const SymEigen& eig, double target, double tol) {
  std::vector<Index> keep;
  for (Index i = 0; i < eig.values.size(); ++i) {
    if (std::abs(eig.values[i] - target) < tol) keep.push_back(i);
  }
  DenseMat basis(eig.vectors.rows(), static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    basis.col(static_cast<Index>(k)) = eig.vectors.col(keep[k]);
  }
  return basis;
}

DenseMat unit_modulus_eigenspace(const SymEigen& eig, double tol) {
  const DenseMat plus = eigenspace(eig, 1.0, tol);
  const DenseMat minus = eigenspace(eig, -1.0, tol);
  DenseMat basis(eig.vectors.rows(), plus.cols() + minus.cols());
  basis << plus, minus;
  return basis;
}

int subspace_intersection_dim(const DenseMat& u_basis, const DenseMat& v_basis,
                              double tol) {
  if (u_basis.rows() != v_basis.rows()) {
    throw std::invalid_argument("subspace_intersection_dim: ambient dimension mismatch");
  }
  for (const DenseMat* basis : {&u_basis, &v_basis}) {
    if (basis->cols() == 0) continue;
    const DenseMat gram = basis->transpose() * *basis;
    const double dev =
        (gram - DenseMat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (dev > 1e-8) {
      throw std::invalid_argument("subspace_intersection_dim: basis is not orthonormal");
    }
  }
  if (u_basis.cols() == 0 || v_basis.cols() == 0) return 0;

  const DenseMat cross = u_basis.transpose() * v_basis;
  Eigen::JacobiSVD<DenseMat> svd(cross);
  int count = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i) {
    if (std::abs(svd.singularValues()[i] - 1.0) < tol) ++count;
  }
  return count;
}

double spectral_norm(const DenseMat& m) {
  const DenseMat gram = m.transpose() * m;
  const Vec values = eigvals_sym(0.5 * (gram + gram.transpose()));
  return std::sqrt(std::max(values[values.size() - 1], 0.0));
}

DenseMat random_orthogonal(Index n, std::uint64_t seed) {
  Rng rng(seed);
  DenseMat g(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<DenseMat> qr(g);
  DenseMat q = qr.householderQ() * DenseMat::Identity(n, n);
  const DenseMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

}  // namespace pnp
