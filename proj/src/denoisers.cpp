#include "pnp/denoisers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pnp {

std::string_view to_string(DenoiserKind kind) {
  return kind == DenoiserKind::row_normalized ? "row_normalized" : "symmetric_ds";
}

double estimate_noise_sigma(const Image& image) {
  if (image.width < 3 || image.height < 3) return 0.0;
  double total = 0.0;
  for (int r = 1; r + 1 < image.height; ++r) {
    for (int c = 1; c + 1 < image.width; ++c) {
      const double v = image.at(r - 1, c - 1) - 2 * image.at(r - 1, c) + image.at(r - 1, c + 1) -
                       2 * image.at(r, c - 1) + 4 * image.at(r, c) - 2 * image.at(r, c + 1) +
                       image.at(r + 1, c - 1) - 2 * image.at(r + 1, c) + image.at(r + 1, c + 1);
      total += std::abs(v);
    }
  }
  const double interior = 6.0 * (image.width - 2) * (image.height - 2);
  return std::sqrt(std::numbers::pi / 2.0) * total / interior;
}

double default_bandwidth(const Image& guide) {
  const double mean = guide.pixels.mean();
  const double stddev =
      std::sqrt((guide.pixels.array() - mean).square().sum() / static_cast<double>(guide.size()));
  const double sigma = std::max({estimate_noise_sigma(guide), 0.05 * stddev, 1e-6});
  return 10.0 * sigma;
}

namespace {

// Row i holds the (2r+1)^2 patch centred at pixel i, circular boundary.
DenseMat extract_patches(const Image& guide, int radius) {
  const int side = 2 * radius + 1;
  DenseMat patches(guide.size(), side * side);
  for (int row = 0; row < guide.height; ++row) {
    for (int col = 0; col < guide.width; ++col) {
      const Index i = guide.index(row, col);
      int k = 0;
      for (int dr = -radius; dr <= radius; ++dr) {
        const int rr = (((row + dr) % guide.height) + guide.height) % guide.height;
        for (int dc = -radius; dc <= radius; ++dc) {
          const int cc = (((col + dc) % guide.width) + guide.width) % guide.width;
          patches(i, k++) = guide.at(rr, cc);
        }
      }
    }
  }
  return patches;
}

double patch_distance2(const DenseMat& patches, Index i, Index j) {
  double d2 = 0.0;
  for (Index k = 0; k < patches.cols(); ++k) {
    const double diff = patches(i, k) - patches(j, k);
    d2 += diff * diff;
  }
  return d2;
}

void validate_kernel(const DenseMat& k) {
  if (k.rows() != k.cols() || k.rows() < 1) {
    throw std::invalid_argument("KernelDenoiser: kernel must be square and nonempty");
  }
  if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("KernelDenoiser: kernel must be symmetric");
  }
  if (k.minCoeff() < 0.0) {
    throw std::invalid_argument("KernelDenoiser: kernel must be nonnegative");
  }
}

}  // namespace

KernelDenoiser KernelDenoiser::build(const Image& guide, const KernelParams& params) {
  if (params.patch_radius < 0) throw std::invalid_argument("KernelParams: negative patch radius");
  if (!guide.pixels.allFinite()) throw std::invalid_argument("KernelDenoiser: guide has non-finite pixels");
  const double h = params.bandwidth > 0.0 ? params.bandwidth : default_bandwidth(guide);
  const double inv_h2 = 1.0 / (h * h);
  const DenseMat patches = extract_patches(guide, params.patch_radius);
  const Index n = guide.size();

  KernelDenoiser wd;
  wd.kind_ = DenoiserKind::row_normalized;
  wd.scaling_ = Vec::Ones(n);

  if (!params.search_radius) {
    if (n > dense_max()) {
      throw std::invalid_argument("KernelDenoiser: FULL search exceeds the dense cap");
    }
    DenseMat k(n, n);
    for (Index i = 0; i < n; ++i) {
      k(i, i) = 1.0;
      for (Index j = i + 1; j < n; ++j) {
        const double w = std::exp(-patch_distance2(patches, i, j) * inv_h2);
        k(i, j) = w;
        k(j, i) = w;
      }
    }
    wd.degree_ = k.rowwise().sum();
    wd.kernel_ = std::move(k);
    wd.full_search_ = true;
  } else {
    const int s = *params.search_radius;
    if (s < 0) throw std::invalid_argument("KernelParams: negative search radius");
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(n) * (2 * s + 1) * (2 * s + 1));
    for (int row = 0; row < guide.height; ++row) {
      for (int col = 0; col < guide.width; ++col) {
        const Index i = guide.index(row, col);
        for (int r2 = std::max(0, row - s); r2 <= std::min(guide.height - 1, row + s); ++r2) {
          for (int c2 = std::max(0, col - s); c2 <= std::min(guide.width - 1, col + s); ++c2) {
            const Index j = guide.index(r2, c2);
            const double w = i == j ? 1.0 : std::exp(-patch_distance2(patches, i, j) * inv_h2);
            triplets.emplace_back(i, j, w);
          }
        }
      }
    }
    SparseMat k(n, n);
    k.setFromTriplets(triplets.begin(), triplets.end());
    wd.degree_ = k * Vec::Ones(n);
    wd.kernel_ = std::move(k);
    wd.full_search_ = false;
  }
  if (!(wd.degree_.minCoeff() > 0.0)) {
    throw std::logic_error("KernelDenoiser: zero row sum in kernel");
  }
  return wd;
}

KernelDenoiser KernelDenoiser::from_kernel(DenseMat kernel) {
  validate_kernel(kernel);
  KernelDenoiser wd;
  wd.kind_ = DenoiserKind::row_normalized;
  wd.degree_ = kernel.rowwise().sum();
  if (!(wd.degree_.minCoeff() > 0.0)) {
    throw std::invalid_argument("KernelDenoiser: K e must be strictly positive");
  }
  wd.scaling_ = Vec::Ones(kernel.rows());
  wd.kernel_ = std::move(kernel);
  wd.full_search_ = true;
  return wd;
}

Vec KernelDenoiser::kernel_times(const Vec& x) const {
  return std::visit([&x](const auto& k) -> Vec { return k * x; }, kernel_);
}

KernelDenoiser KernelDenoiser::symmetrized(const SinkhornOptions& options) const {
  Vec scale = Vec::Ones(dim());
  double deviation = 0.0;
  for (int it = 0; it <= options.max_iter; ++it) {
    const Vec ks = kernel_times(scale);
    deviation = (scale.cwiseProduct(ks).array() - 1.0).abs().maxCoeff();
    if (deviation <= options.tol) {
      KernelDenoiser out = *this;
      out.kind_ = DenoiserKind::symmetric_ds;
      out.scaling_ = std::move(scale);
      return out;
    }
    if (it == options.max_iter) break;
    // Damped symmetric Sinkhorn step: geometric mean of scale and 1 / (K scale).
    scale = (scale.array() / ks.array()).sqrt().matrix();
  }
  throw NumericalError("symmetrize_sinkhorn: no convergence, max |row sum - 1| = " +
                           std::to_string(deviation),
                       deviation);
}

Vec KernelDenoiser::apply(const Vec& x) const {
  if (x.size() != dim()) throw std::invalid_argument("KernelDenoiser::apply: dimension mismatch");
  if (kind_ == DenoiserKind::row_normalized) {
    return kernel_times(x).cwiseQuotient(degree_);
  }
  return scaling_.cwiseProduct(kernel_times(scaling_.cwiseProduct(x)));
}

Vec KernelDenoiser::apply_adjoint(const Vec& x) const {
  if (x.size() != dim()) {
    throw std::invalid_argument("KernelDenoiser::apply_adjoint: dimension mismatch");
  }
  if (kind_ == DenoiserKind::row_normalized) {
    return kernel_times(x.cwiseQuotient(degree_));
  }
  return apply(x);
}

LinOp KernelDenoiser::as_linop() const {
  if (is_dense() && dim() <= dense_max()) return LinOp::from_dense(dense_W());
  auto self = std::make_shared<const KernelDenoiser>(*this);
  return LinOp(
      dim(), [self](const Vec& x) { return self->apply(x); },
      [self](const Vec& x) { return self->apply_adjoint(x); });
}

DenseMat KernelDenoiser::dense_kernel() const {
  if (dim() > dense_max()) throw std::invalid_argument("KernelDenoiser: exceeds dense cap");
  if (const auto* dense = std::get_if<DenseMat>(&kernel_)) return *dense;
  return DenseMat(std::get<SparseMat>(kernel_));
}

DenseMat KernelDenoiser::dense_W() const {
  DenseMat w = dense_kernel();
  const Index n = dim();
  if (kind_ == DenoiserKind::row_normalized) {
    for (Index i = 0; i < n; ++i) w.row(i) /= degree_[i];
  } else {
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) w(i, j) *= scaling_[i] * scaling_[j];
  }
  return w;
}

DenseMat KernelDenoiser::symmetric_similar() const {
  if (kind_ == DenoiserKind::symmetric_ds) return dense_W();
  DenseMat w = dense_kernel();
  const Vec inv_sqrt = degree_.cwiseSqrt().cwiseInverse();
  const Index n = dim();
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) w(i, j) *= inv_sqrt[i] * inv_sqrt[j];
  return w;
}

SpectralCertificate spectral_certificate(const KernelDenoiser& denoiser) {
  SpectralCertificate cert;
  cert.eigenvalues = eigvals_sym(denoiser.symmetric_similar());
  const Vec& ev = cert.eigenvalues;
  const Index n = ev.size();
  cert.min_eigenvalue = ev[0];
  cert.max_eigenvalue = ev[n - 1];
  cert.second_eigenvalue = n > 1 ? ev[n - 2] : ev[0];
  for (Index i = 0; i < n; ++i) {
    if (std::abs(ev[i] - 1.0) < 1e-9) ++cert.unit_multiplicity;
  }
  cert.unit_simple = cert.unit_multiplicity == 1 && (n == 1 || ev[n - 1] - ev[n - 2] > 1e-9);
  cert.nonsingular = ev.cwiseAbs().minCoeff() > 1e-9;
  cert.norm2 = std::max(std::abs(ev[0]), std::abs(ev[n - 1]));
  return cert;
}

}  // namespace pnp
