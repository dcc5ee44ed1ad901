#pragma once

#include "pnp/tensor_core.hpp"

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

namespace pnp {

enum class Task { inpaint, deblur, superres };

std::string_view to_string(Task task);
Task parse_task(std::string_view name);

/// Observed-pixel indicator for inpainting.
struct InpaintMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> observed;

  static InpaintMask full(int width, int height);
  static InpaintMask empty(int width, int height);
  /// Each pixel observed independently with probability `fraction`; if that
  /// leaves nothing observed, one seeded pixel is switched on.
  static InpaintMask random(int width, int height, double fraction, std::uint64_t seed);

  Index count() const;
  double sampling_fraction() const;
};

/// k x k blur taps (k odd), nonnegative and summing to 1, centered.
struct BlurKernel {
  int size = 1;
  std::vector<double> taps{1.0};

  static BlurKernel uniform(int size);
  static BlurKernel identity() { return {}; }
  static BlurKernel from_taps(int size, std::vector<double> taps);

  double tap(int dr, int dc) const {
    const int r = size / 2;
    return taps[static_cast<std::size_t>((dr + r) * size + (dc + r))];
  }
};

/// Measurement operator A with circular boundary handling.
///
/// Inpainting keeps A square and diagonal (unobserved pixels are zeroed,
/// not dropped), so m == n. Deblurring is circular convolution, m == n.
/// Superresolution blurs and then keeps every factor-th pixel along both
/// axes, m == n / factor^2.
class ForwardModel {
 public:
  static ForwardModel inpaint(InpaintMask mask);
  /// As inpaint() but accepts an empty mask; only meaningful for
  /// constructing degenerate instances in verification code.
  static ForwardModel inpaint_allow_empty(InpaintMask mask);
  static ForwardModel deblur(int width, int height, BlurKernel kernel);
  static ForwardModel superres(int width, int height, BlurKernel kernel, int factor);

  Task task() const { return task_; }
  int width() const { return width_; }
  int height() const { return height_; }
  Index n() const { return static_cast<Index>(width_) * height_; }
  Index m() const;
  int factor() const { return factor_; }
  const InpaintMask& mask() const;
  const BlurKernel& kernel() const { return kernel_; }

  Vec apply(const Vec& x) const;
  Vec adjoint(const Vec& y) const;
  /// A^T A x.
  Vec normal(const Vec& x) const;

  /// Dense m x n matrix of A (n bounded by the dense cap).
  DenseMat dense() const;

  /// rho(A^T A). Exactly 1 for nonempty inpainting masks (0 if empty);
  /// power iteration on A^T A otherwise.
  double spectral_radius_AtA(const PowerOptions& options = {}) const;

  /// (I + rho A^T A)^{-1} rhs. Per-pixel for inpainting, frequency-domain
  /// division for deblurring, conjugate gradient for superresolution (throws
  /// NumericalError when the relative residual does not reach `tol` within
  /// 2000 iterations).
  Vec solve_shifted(double rho, const Vec& rhs, double tol = 1e-10) const;

  /// argmin_x 1/2 |v - x|^2 + rho/2 |A x - b|^2.
  Vec prox_quadratic(double rho, const Vec& v, const Vec& b, double tol = 1e-10) const;

  /// b = A xi + w with w ~ N(0, sigma^2) drawn from `seed`.
  Vec observe(const Vec& xi, double noise_sigma, std::uint64_t seed) const;

 private:
  ForwardModel() = default;

  Vec convolve(const Vec& x) const;
  Vec correlate(const Vec& x) const;
  Vec cg_solve(double rho, const Vec& rhs, double tol) const;

  Task task_ = Task::inpaint;
  int width_ = 0;
  int height_ = 0;
  int factor_ = 1;
  InpaintMask mask_;
  BlurKernel kernel_;
  // |DFT of the circularly embedded kernel|^2, i.e. the spectrum of B^T B.
  std::shared_ptr<const Vec> blur_power_;
};

}  // namespace pnp
