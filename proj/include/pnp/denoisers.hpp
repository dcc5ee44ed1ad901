#pragma once

#include "pnp/image.hpp"
#include "pnp/tensor_core.hpp"

#include <Eigen/SparseCore>

#include <optional>
#include <string_view>
#include <variant>

namespace pnp {

using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct KernelParams {
  int patch_radius = 1;             ///< patches are (2r+1)^2, circular boundary
  std::optional<int> search_radius;  ///< nullopt: FULL search (every pixel pair)
  double bandwidth = 0.0;           ///< h; <= 0 selects default_bandwidth(guide)
};

/// Immerkaer's Laplacian-residual estimate of the noise level of `image`.
double estimate_noise_sigma(const Image& image);

/// h = 10 * sigma_patch with sigma_patch = max(noise estimate, 0.05 * std(guide)).
/// The floor keeps h meaningful for smooth guides (blurred observations).
double default_bandwidth(const Image& guide);

enum class DenoiserKind { row_normalized, symmetric_ds };

std::string_view to_string(DenoiserKind kind);

struct SinkhornOptions {
  double tol = 1e-12;
  int max_iter = 10000;
};

/// Linear kernel denoiser built from a fixed, nonnegative symmetric kernel K.
///
/// row_normalized: W = D^{-1} K with D = diag(K e).
/// symmetric_ds:   W = L K L with positive diagonal L chosen so that W e = e.
///
/// The kernel is held dense when built with FULL search (or given explicitly)
/// and as a sparse matrix in windowed mode.
class KernelDenoiser {
 public:
  /// K_ij = exp(-|patch_i - patch_j|^2 / h^2) between guide patches.
  static KernelDenoiser build(const Image& guide, const KernelParams& params);
  /// Row-normalized denoiser for an explicit kernel matrix.
  static KernelDenoiser from_kernel(DenseMat kernel);

  /// Symmetric doubly-stochastic version via symmetric Sinkhorn scaling.
  /// Throws NumericalError with the max row-sum deviation on failure.
  KernelDenoiser symmetrized(const SinkhornOptions& options = {}) const;

  DenoiserKind kind() const { return kind_; }
  Index dim() const { return degree_.size(); }
  bool is_dense() const { return std::holds_alternative<DenseMat>(kernel_); }
  bool full_search() const { return full_search_; }

  /// diag(K e).
  const Vec& degree() const { return degree_; }
  /// Sinkhorn scaling L (all ones for row_normalized).
  const Vec& scaling() const { return scaling_; }

  Vec apply(const Vec& x) const;
  Vec apply_adjoint(const Vec& x) const;
  LinOp as_linop() const;

  DenseMat dense_kernel() const;
  DenseMat dense_W() const;
  /// D^{1/2} W D^{-1/2} = D^{-1/2} K D^{-1/2} for row_normalized; W itself
  /// for symmetric_ds.
  DenseMat symmetric_similar() const;

 private:
  KernelDenoiser() = default;
  Vec kernel_times(const Vec& x) const;

  DenoiserKind kind_ = DenoiserKind::row_normalized;
  std::variant<DenseMat, SparseMat> kernel_;
  Vec degree_;
  Vec scaling_;
  bool full_search_ = true;
};

struct SpectralCertificate {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double second_eigenvalue = 0.0;  ///< second largest
  int unit_multiplicity = 0;       ///< eigenvalues within 1e-9 of 1
  bool unit_simple = false;
  bool nonsingular = false;        ///< min |eigenvalue| > 1e-9
  double norm2 = 0.0;              ///< ||W_0||_2
  Vec eigenvalues;
};

/// Dense eigen-analysis of the symmetric matrix similar to W.
SpectralCertificate spectral_certificate(const KernelDenoiser& denoiser);

}  // namespace pnp
