#pragma once

#include "pnp/forward_models.hpp"
#include "pnp/tensor_core.hpp"

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace pnp {

struct IstaConfig {
  double gamma = 1.0;
  int max_iter = 100;
  double stop_tol = 1e-9;
};

struct AdmmConfig {
  double rho = 1.0;
  int max_iter = 100;
  double stop_tol = 1e-9;
  double prox_tol = 1e-10;  ///< CG tolerance for superresolution
};

/// PnP-ISTA: x' = W(x - gamma (A^T A x - A^T b)).
Vec ista_step(const Vec& x, const LinOp& denoiser, const ForwardModel& fm, const Vec& b,
              double gamma);

struct AdmmState {
  Vec x;
  Vec y;
  Vec z;
};

/// PnP-ADMM, in order: x' = prox_{rho f}(y - z), y' = W(x' + z), z' = z + x' - y'.
AdmmState admm_step(const AdmmState& state, const LinOp& denoiser, const ForwardModel& fm,
                    const Vec& b, double rho, double prox_tol = 1e-10);

/// Douglas-Rachford u-sequence map:
/// u' = u/2 + (2 prox_{rho f} - I)(2W - I)(u) / 2.
Vec u_step(const Vec& u, const LinOp& denoiser, const ForwardModel& fm, const Vec& b, double rho,
           double prox_tol = 1e-10);

enum class Algorithm { ista, admm };

std::string_view to_string(Algorithm alg);
Algorithm parse_algorithm(std::string_view name);

enum class AffineKind { ista_P, admm_R };

std::string_view to_string(AffineKind kind);

/// x ↦ Q x + r, equivalent to one PnP step.
struct AffineIteration {
  AffineKind kind;
  LinOp Q;
  Vec r;
  std::optional<DenseMat> dense;  ///< Q materialized, when requested

  Vec step(const Vec& x) const { return Q.apply(x) + r; }
};

/// P = W (I - gamma A^T A), q = gamma W A^T b.
AffineIteration build_ista_affine(const LinOp& denoiser, const ForwardModel& fm, const Vec& b,
                                  double gamma, bool dense = false);

/// R = (I + F V) / 2 with F = 2 (I + rho A^T A)^{-1} - I and V = 2W - I;
/// s is the image of 0 under the u-map, (I + rho A^T A)^{-1} rho A^T b.
AffineIteration build_u_operator(const LinOp& denoiser, const ForwardModel& fm, const Vec& b,
                                 double rho, bool dense = false, double prox_tol = 1e-10);

/// Dense F = 2 (I + rho A^T A)^{-1} - I.
DenseMat dense_reflected_resolvent(const ForwardModel& fm, double rho);

struct RunConfig {
  int max_iter = 100;
  double stop_tol = 1e-9;
  /// Record |x_k - x*| per iteration; needs a second pass over the iterates.
  bool record_residuals = true;
  /// Residuals are taken against this point when given, else the final iterate.
  std::optional<Vec> reference;
  /// Extra weighted residual |x_k - x*|_D when set.
  std::optional<Vec> weights;
  /// Called with (k, x_k) for k = 0..iterations during the recording pass.
  std::function<void(int, const Vec&)> observer;
  /// Output extracted from the state (e.g. y from a stacked ADMM state).
  /// Stopping, residuals and the observer use the output when set.
  std::function<Vec(const Vec&)> project;
};

struct ConvergenceTrace {
  std::vector<double> residuals;    ///< |x_k - x*|_2, k = 0..iterations
  std::vector<double> residuals_d;  ///< |x_k - x*|_D when weights were given
  std::vector<double> step_norms;   ///< |x_{k+1} - x_k|_2
  Vec fixed_point;                  ///< final iterate x*
  int iterations = 0;
  bool converged = false;  ///< stop_tol reached before max_iter
  bool diverged = false;   ///< residuals grew by 3 consecutive decades
};

/// Generic fixed-point driver; `step` must be deterministic.
ConvergenceTrace iterate_map(const std::function<Vec(const Vec&)>& step, const Vec& x0,
                             const RunConfig& config);

ConvergenceTrace run_to_fixed_point(const AffineIteration& it, const Vec& x0,
                                    const RunConfig& config);

}  // namespace pnp
