#pragma once

#include "pnp/denoisers.hpp"
#include "pnp/forward_models.hpp"
#include "pnp/image.hpp"
#include "pnp/pnp_iterations.hpp"
#include "pnp/spectral_analysis.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pnp {

/// 10 log10(1 / MSE) against peak 1; +infinity for identical images.
double psnr(const Image& x, const Image& ref);

/// 3x3 median with replicated borders.
Image median_filter3(const Image& image);

/// 3x3 median over observed pixels only; the window grows until it holds an
/// observed pixel. Throws if nothing is observed.
Image masked_median_filter(const Image& image, const InpaintMask& mask);

enum class DenoiserChoice { nlm, dsg_nlm };

std::string_view to_string(DenoiserChoice choice);
DenoiserChoice parse_denoiser(std::string_view name);

enum class InitKind { guide, zeros, ones, noise };

struct ExperimentConfig {
  Task task = Task::inpaint;
  Algorithm algorithm = Algorithm::ista;
  DenoiserChoice denoiser = DenoiserChoice::dsg_nlm;
  double gamma = 1.0;
  double rho = 1.0;
  double sample = 0.3;  ///< inpainting sampling fraction
  int blur_size = 11;
  int sr_factor = 2;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  int iterations = 100;
  double stop_tol = 1e-9;
  std::optional<int> search_radius;  ///< nullopt: FULL when n <= dense_max()
  double prox_tol = 1e-10;
  InitKind init = InitKind::guide;
  /// Residuals are measured against this point instead of the final iterate.
  std::optional<Vec> reference;
  /// Reject parameters outside the theorem hypotheses.
  bool theorem_mode = false;
};

/// Throws std::invalid_argument for an inconsistent configuration.
void validate(const ExperimentConfig& cfg, const Image& ground_truth);

struct ExperimentResult {
  ConvergenceTrace trace;       ///< residuals of the reconstruction iterate
  std::vector<double> psnr;     ///< PSNR of each recorded iterate
  Image reconstruction;         ///< x for ISTA, y for ADMM
  Image guide;
  double psnr_final = 0.0;
  double psnr_baseline = 0.0;   ///< observation, zero-filled or pixel-replicated
  std::string fixed_point_hash;
};

struct ExperimentSetup {
  ForwardModel fm;
  Vec b;
  Image guide;
  KernelDenoiser denoiser;
  Vec init;
};

/// b = A xi + w, guide and initialization, and the frozen denoiser.
ExperimentSetup prepare_experiment(const ExperimentConfig& cfg, const Image& ground_truth);

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Image& ground_truth);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Image& ground_truth,
                                const ExperimentSetup& setup);

/// 16-hex-digit FNV-1a digest of the raw bytes of x.
std::string digest(const Vec& x);

struct ReportOptions {
  int first = 10;
  int last = 90;
  double slack = 0.1;        ///< relative slack on log10 ||Q||
  double ratio_tol = 1e-6;
  double floor_rel = 1e-10;  ///< residuals below floor_rel * r_0 are excluded
};

struct ConvergenceReport {
  bool certified = false;  ///< norm < 1, so linear convergence is claimed
  double slope = 0.0;      ///< fitted log10 residual per iteration
  double expected = 0.0;   ///< log10(norm)
  bool slope_ok = false;
  double max_ratio = 0.0;
  bool ratio_ok = false;
  int fit_points = 0;
  bool passed() const { return certified && slope_ok && ratio_ok; }
};

/// Declines to certify when norm.value >= 1. Throws std::invalid_argument when
/// fewer than three residuals are usable for the fit.
ConvergenceReport convergence_report(const std::vector<double>& residuals, const NormEstimate& norm,
                                     const ReportOptions& options = {});

/// Header: iteration,residual_l2,residual_D,psnr.
void write_trace_csv(std::ostream& os, const ExperimentResult& result);

}  // namespace pnp
