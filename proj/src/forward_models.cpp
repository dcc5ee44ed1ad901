#include "pnp/forward_models.hpp"

#include "pnp/rng.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pnp {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::inpaint: return "inpaint";
    case Task::deblur: return "deblur";
    case Task::superres: return "superres";
  }
  return "unknown";
}

Task parse_task(std::string_view name) {
  if (name == "inpaint") return Task::inpaint;
  if (name == "deblur") return Task::deblur;
  if (name == "superres") return Task::superres;
  throw std::invalid_argument("unknown task: " + std::string(name));
}

// ---------------------------------------------------------------------------
// InpaintMask / BlurKernel

InpaintMask InpaintMask::full(int width, int height) {
  InpaintMask mask{width, height, {}};
  mask.observed.assign(static_cast<std::size_t>(width) * height, 1);
  return mask;
}

InpaintMask InpaintMask::empty(int width, int height) {
  InpaintMask mask{width, height, {}};
  mask.observed.assign(static_cast<std::size_t>(width) * height, 0);
  return mask;
}

InpaintMask InpaintMask::random(int width, int height, double fraction,
                                std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("InpaintMask::random: fraction must lie in (0, 1]");
  }
  Rng rng(seed);
  InpaintMask mask = empty(width, height);
  for (auto& bit : mask.observed) bit = rng.uniform() < fraction ? 1 : 0;
  if (mask.count() == 0) mask.observed[rng.below(mask.observed.size())] = 1;
  return mask;
}

Index InpaintMask::count() const {
  return static_cast<Index>(std::count(observed.begin(), observed.end(), 1));
}

double InpaintMask::sampling_fraction() const {
  return observed.empty() ? 0.0 : static_cast<double>(count()) / observed.size();
}

BlurKernel BlurKernel::uniform(int size) {
  if (size < 1 || size % 2 == 0) {
    throw std::invalid_argument("BlurKernel::uniform: size must be odd and positive");
  }
  const auto count = static_cast<std::size_t>(size) * size;
  return {size, std::vector<double>(count, 1.0 / static_cast<double>(count))};
}

BlurKernel BlurKernel::from_taps(int size, std::vector<double> taps) {
  if (size < 1 || size % 2 == 0) {
    throw std::invalid_argument("BlurKernel: size must be odd and positive");
  }
  if (taps.size() != static_cast<std::size_t>(size) * size) {
    throw std::invalid_argument("BlurKernel: expected size*size taps");
  }
  double total = 0.0;
  for (double t : taps) {
    if (!(t >= 0.0)) throw std::invalid_argument("BlurKernel: taps must be nonnegative");
    total += t;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("BlurKernel: taps must sum to 1");
  }
  return {size, std::move(taps)};
}

// ---------------------------------------------------------------------------
// FFT helpers

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place 2-D complex DFT of a height x width row-major grid.
void dft2(std::vector<std::complex<double>>& data, int height, int width, int sign) {
  auto* buffer = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan = nullptr;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(height, width, buffer, buffer, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

Vec blur_power_spectrum(const BlurKernel& kernel, int width, int height) {
  std::vector<std::complex<double>> grid(static_cast<std::size_t>(width) * height);
  const int r = kernel.size / 2;
  for (int dr = -r; dr <= r; ++dr) {
    for (int dc = -r; dc <= r; ++dc) {
      const int row = ((dr % height) + height) % height;
      const int col = ((dc % width) + width) % width;
      grid[static_cast<std::size_t>(row) * width + col] += kernel.tap(dr, dc);
    }
  }
  dft2(grid, height, width, FFTW_FORWARD);
  Vec power(static_cast<Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) power[static_cast<Index>(i)] = std::norm(grid[i]);
  return power;
}

void check_size(const Vec& v, Index expected, const char* who) {
  if (v.size() != expected) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch (got " +
                                std::to_string(v.size()) + ", expected " +
                                std::to_string(expected) + ")");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ForwardModel

ForwardModel ForwardModel::inpaint(InpaintMask mask) {
  if (mask.count() == 0) {
    throw std::invalid_argument("ForwardModel::inpaint: mask must observe at least one pixel");
  }
  return inpaint_allow_empty(std::move(mask));
}

ForwardModel ForwardModel::inpaint_allow_empty(InpaintMask mask) {
  if (mask.width < 1 || mask.height < 1 ||
      mask.observed.size() != static_cast<std::size_t>(mask.width) * mask.height) {
    throw std::invalid_argument("ForwardModel::inpaint: malformed mask");
  }
  ForwardModel fm;
  fm.task_ = Task::inpaint;
  fm.width_ = mask.width;
  fm.height_ = mask.height;
  fm.mask_ = std::move(mask);
  return fm;
}

ForwardModel ForwardModel::deblur(int width, int height, BlurKernel kernel) {
  if (width < 1 || height < 1) throw std::invalid_argument("ForwardModel: bad dimensions");
  kernel = BlurKernel::from_taps(kernel.size, std::move(kernel.taps));
  ForwardModel fm;
  fm.task_ = Task::deblur;
  fm.width_ = width;
  fm.height_ = height;
  fm.blur_power_ = std::make_shared<const Vec>(blur_power_spectrum(kernel, width, height));
  fm.kernel_ = std::move(kernel);
  return fm;
}

ForwardModel ForwardModel::superres(int width, int height, BlurKernel kernel, int factor) {
  if (factor < 1) throw std::invalid_argument("ForwardModel::superres: factor must be >= 1");
  if (width % factor != 0 || height % factor != 0) {
    throw std::invalid_argument(
        "ForwardModel::superres: image dimensions must be divisible by the factor");
  }
  ForwardModel fm = deblur(width, height, std::move(kernel));
  fm.task_ = Task::superres;
  fm.factor_ = factor;
  return fm;
}

Index ForwardModel::m() const {
  if (task_ == Task::superres) {
    return static_cast<Index>(width_ / factor_) * (height_ / factor_);
  }
  return n();
}

const InpaintMask& ForwardModel::mask() const {
  if (task_ != Task::inpaint) throw std::logic_error("ForwardModel::mask: not an inpainting model");
  return mask_;
}

Vec ForwardModel::convolve(const Vec& x) const {
  const int r = kernel_.size / 2;
  Vec y = Vec::Zero(n());
  for (int row = 0; row < height_; ++row) {
    for (int col = 0; col < width_; ++col) {
      double acc = 0.0;
      for (int dr = -r; dr <= r; ++dr) {
        const int src_row = (((row - dr) % height_) + height_) % height_;
        for (int dc = -r; dc <= r; ++dc) {
          const int src_col = (((col - dc) % width_) + width_) % width_;
          acc += kernel_.tap(dr, dc) * x[static_cast<Index>(src_row) * width_ + src_col];
        }
      }
      y[static_cast<Index>(row) * width_ + col] = acc;
    }
  }
  return y;
}

Vec ForwardModel::correlate(const Vec& x) const {
  const int r = kernel_.size / 2;
  Vec y = Vec::Zero(n());
  for (int row = 0; row < height_; ++row) {
    for (int col = 0; col < width_; ++col) {
      double acc = 0.0;
      for (int dr = -r; dr <= r; ++dr) {
        const int src_row = (((row + dr) % height_) + height_) % height_;
        for (int dc = -r; dc <= r; ++dc) {
          const int src_col = (((col + dc) % width_) + width_) % width_;
          acc += kernel_.tap(dr, dc) * x[static_cast<Index>(src_row) * width_ + src_col];
        }
      }
      y[static_cast<Index>(row) * width_ + col] = acc;
    }
  }
  return y;
}

Vec ForwardModel::apply(const Vec& x) const {
  check_size(x, n(), "ForwardModel::apply");
  switch (task_) {
    case Task::inpaint: {
      Vec y = x;
      for (Index i = 0; i < n(); ++i) {
        if (!mask_.observed[static_cast<std::size_t>(i)]) y[i] = 0.0;
      }
      return y;
    }
    case Task::deblur:
      return convolve(x);
    case Task::superres: {
      const Vec blurred = convolve(x);
      const int out_w = width_ / factor_;
      const int out_h = height_ / factor_;
      Vec y(m());
      for (int r = 0; r < out_h; ++r)
        for (int c = 0; c < out_w; ++c)
          y[static_cast<Index>(r) * out_w + c] =
              blurred[static_cast<Index>(r * factor_) * width_ + c * factor_];
      return y;
    }
  }
  return {};
}

Vec ForwardModel::adjoint(const Vec& y) const {
  check_size(y, m(), "ForwardModel::adjoint");
  switch (task_) {
    case Task::inpaint:
      return apply(y);
    case Task::deblur:
      return correlate(y);
    case Task::superres: {
      const int out_w = width_ / factor_;
      const int out_h = height_ / factor_;
      Vec up = Vec::Zero(n());
      for (int r = 0; r < out_h; ++r)
        for (int c = 0; c < out_w; ++c)
          up[static_cast<Index>(r * factor_) * width_ + c * factor_] =
              y[static_cast<Index>(r) * out_w + c];
      return correlate(up);
    }
  }
  return {};
}

Vec ForwardModel::normal(const Vec& x) const { return adjoint(apply(x)); }

DenseMat ForwardModel::dense() const {
  if (n() > dense_max()) throw std::invalid_argument("ForwardModel::dense: exceeds dense cap");
  DenseMat a(m(), n());
  Vec basis = Vec::Zero(n());
  for (Index j = 0; j < n(); ++j) {
    basis[j] = 1.0;
    a.col(j) = apply(basis);
    basis[j] = 0.0;
  }
  return a;
}

double ForwardModel::spectral_radius_AtA(const PowerOptions& options) const {
  if (task_ == Task::inpaint) return mask_.count() > 0 ? 1.0 : 0.0;
  // A^T A is self-adjoint, so its largest singular value is its spectral radius.
  const ForwardModel& self = *this;
  auto gram = [&self](const Vec& x) -> Vec { return self.normal(x); };
  return power_method_sv(LinOp(n(), gram, gram), options).sigma_max;
}

Vec ForwardModel::cg_solve(double rho, const Vec& rhs, double tol) const {
  constexpr int kMaxIter = 2000;
  const double rhs_norm = rhs.norm();
  Vec x = Vec::Zero(n());
  if (rhs_norm == 0.0) return x;

  Vec r = rhs;
  Vec p = r;
  double rr = r.squaredNorm();
  for (int it = 0; it < kMaxIter; ++it) {
    if (std::sqrt(rr) <= tol * rhs_norm) return x;
    const Vec ap = p + rho * normal(p);
    const double alpha = rr / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  if (std::sqrt(rr) <= tol * rhs_norm) return x;
  throw NumericalError("prox_quadratic: conjugate gradient did not converge",
                       std::sqrt(rr) / rhs_norm);
}

Vec ForwardModel::solve_shifted(double rho, const Vec& rhs, double tol) const {
  check_size(rhs, n(), "ForwardModel::solve_shifted");
  if (!(rho > 0.0)) throw std::invalid_argument("prox_quadratic: rho must be positive");
  switch (task_) {
    case Task::inpaint: {
      Vec x = rhs;
      for (Index i = 0; i < n(); ++i) {
        if (mask_.observed[static_cast<std::size_t>(i)]) x[i] /= (1.0 + rho);
      }
      return x;
    }
    case Task::deblur: {
      std::vector<std::complex<double>> grid(static_cast<std::size_t>(n()));
      for (Index i = 0; i < n(); ++i) grid[static_cast<std::size_t>(i)] = rhs[i];
      dft2(grid, height_, width_, FFTW_FORWARD);
      for (Index i = 0; i < n(); ++i) {
        grid[static_cast<std::size_t>(i)] /= (1.0 + rho * (*blur_power_)[i]);
      }
      dft2(grid, height_, width_, FFTW_BACKWARD);
      Vec x(n());
      const double scale = 1.0 / static_cast<double>(n());
      for (Index i = 0; i < n(); ++i) x[i] = grid[static_cast<std::size_t>(i)].real() * scale;
      return x;
    }
    case Task::superres:
      return cg_solve(rho, rhs, tol);
  }
  return {};
}

Vec ForwardModel::prox_quadratic(double rho, const Vec& v, const Vec& b, double tol) const {
  check_size(v, n(), "ForwardModel::prox_quadratic");
  check_size(b, m(), "ForwardModel::prox_quadratic");
  return solve_shifted(rho, v + rho * adjoint(b), tol);
}

Vec ForwardModel::observe(const Vec& xi, double noise_sigma, std::uint64_t seed) const {
  Vec b = apply(xi);
  if (noise_sigma > 0.0) {
    Rng rng(seed);
    for (Index i = 0; i < b.size(); ++i) b[i] += noise_sigma * rng.normal();
  }
  return b;
}

}  // namespace pnp
