#include "pnp/pnp_iterations.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pnp {

std::string_view to_string(Algorithm alg) { return alg == Algorithm::ista ? "ista" : "admm"; }

Algorithm parse_algorithm(std::string_view name) {
  if (name == "ista") return Algorithm::ista;
  if (name == "admm") return Algorithm::admm;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "' (expected ista|admm)");
}

std::string_view to_string(AffineKind kind) {
  return kind == AffineKind::ista_P ? "ista_P" : "admm_R";
}

Vec ista_step(const Vec& x, const LinOp& denoiser, const ForwardModel& fm, const Vec& b,
              double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("ista_step: gamma must be nonnegative");
  return denoiser.apply(x - gamma * (fm.normal(x) - fm.adjoint(b)));
}

AdmmState admm_step(const AdmmState& state, const LinOp& denoiser, const ForwardModel& fm,
                    const Vec& b, double rho, double prox_tol) {
  AdmmState next;
  next.x = fm.prox_quadratic(rho, state.y - state.z, b, prox_tol);
  next.y = denoiser.apply(next.x + state.z);
  next.z = state.z + next.x - next.y;
  return next;
}

Vec u_step(const Vec& u, const LinOp& denoiser, const ForwardModel& fm, const Vec& b, double rho,
           double prox_tol) {
  const Vec reflected = 2.0 * denoiser.apply(u) - u;
  const Vec prox = fm.prox_quadratic(rho, reflected, b, prox_tol);
  return 0.5 * u + 0.5 * (2.0 * prox - reflected);
}

AffineIteration build_ista_affine(const LinOp& denoiser, const ForwardModel& fm, const Vec& b,
                                  double gamma, bool dense) {
  if (denoiser.dim() != fm.n()) throw std::invalid_argument("build_ista_affine: dimension mismatch");
  LinOp p(
      fm.n(),
      [denoiser, fm, gamma](const Vec& x) -> Vec {
        return denoiser.apply(x - gamma * fm.normal(x));
      },
      [denoiser, fm, gamma](const Vec& y) -> Vec {
        const Vec wy = denoiser.adjoint(y);
        return wy - gamma * fm.normal(wy);
      });
  AffineIteration it{AffineKind::ista_P, p, gamma * denoiser.apply(fm.adjoint(b)), std::nullopt};
  if (dense) {
    const DenseMat w = denoiser.materialize();
    const DenseMat a = fm.dense();
    const DenseMat ata = a.transpose() * a;
    it.dense = w - gamma * (w * ata);
  }
  return it;
}

DenseMat dense_reflected_resolvent(const ForwardModel& fm, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const Index n = fm.n();
  if (fm.task() == Task::inpaint) {
    Vec diag(n);
    for (Index i = 0; i < n; ++i) {
      diag[i] = fm.mask().observed[static_cast<std::size_t>(i)] ? (1.0 - rho) / (1.0 + rho) : 1.0;
    }
    return diag.asDiagonal();
  }
  const DenseMat a = fm.dense();
  DenseMat shifted = DenseMat::Identity(n, n) + rho * (a.transpose() * a);
  shifted = 0.5 * (shifted + shifted.transpose());
  const DenseMat inverse = shifted.llt().solve(DenseMat::Identity(n, n));
  DenseMat f = 2.0 * inverse - DenseMat::Identity(n, n);
  return 0.5 * (f + f.transpose());
}

AffineIteration build_u_operator(const LinOp& denoiser, const ForwardModel& fm, const Vec& b,
                                 double rho, bool dense, double prox_tol) {
  if (!(rho > 0.0)) throw std::invalid_argument("build_u_operator: rho must be positive");
  if (denoiser.dim() != fm.n()) throw std::invalid_argument("build_u_operator: dimension mismatch");
  auto reflect_resolvent = [fm, rho, prox_tol](const Vec& x) -> Vec {
    return 2.0 * fm.solve_shifted(rho, x, prox_tol) - x;
  };
  LinOp r(
      fm.n(),
      [denoiser, reflect_resolvent](const Vec& u) -> Vec {
        const Vec vu = 2.0 * denoiser.apply(u) - u;
        return 0.5 * (u + reflect_resolvent(vu));
      },
      [denoiser, reflect_resolvent](const Vec& y) -> Vec {
        const Vec fy = reflect_resolvent(y);
        return 0.5 * (y + 2.0 * denoiser.adjoint(fy) - fy);
      });
  const Vec offset = fm.solve_shifted(rho, rho * fm.adjoint(b), prox_tol);
  AffineIteration it{AffineKind::admm_R, r, offset, std::nullopt};
  if (dense) {
    const Index n = fm.n();
    const DenseMat f = dense_reflected_resolvent(fm, rho);
    const DenseMat v = 2.0 * denoiser.materialize() - DenseMat::Identity(n, n);
    it.dense = 0.5 * (DenseMat::Identity(n, n) + f * v);
  }
  return it;
}

ConvergenceTrace iterate_map(const std::function<Vec(const Vec&)>& step, const Vec& x0,
                             const RunConfig& config) {
  if (config.max_iter < 0) throw std::invalid_argument("iterate_map: negative max_iter");
  constexpr Index kMaxStored = Index{1} << 23;

  ConvergenceTrace trace;
  std::vector<Vec> stored;
  bool storing = config.record_residuals;
  if (storing) stored.push_back(x0);

  auto output = [&config](const Vec& state) -> Vec {
    return config.project ? config.project(state) : state;
  };

  Vec x = x0;
  double smallest_step = std::numeric_limits<double>::infinity();
  int growth_run = 0;
  for (int k = 0; k < config.max_iter; ++k) {
    Vec next = step(x);
    const double step_norm = config.project ? (output(next) - output(x)).norm() : (next - x).norm();
    trace.step_norms.push_back(step_norm);
    x = std::move(next);
    trace.iterations = k + 1;
    if (storing) {
      if (static_cast<Index>(stored.size() + 1) * x.size() > kMaxStored) {
        storing = false;
        stored.clear();
      } else {
        stored.push_back(x);
      }
    }
    if (!std::isfinite(step_norm)) {
      trace.diverged = true;
      break;
    }
    if (step_norm < config.stop_tol) {
      trace.converged = true;
      break;
    }
    // Divergence: the step has grown by three decades, one decade at a time.
    smallest_step = std::min(smallest_step, step_norm);
    if (step_norm > smallest_step * std::pow(10.0, growth_run + 1)) {
      if (++growth_run >= 3) {
        trace.diverged = true;
        break;
      }
    }
  }
  trace.fixed_point = x;

  if (config.record_residuals) {
    const Vec reference = config.reference ? *config.reference : output(trace.fixed_point);
    auto record = [&](int k, const Vec& state) {
      const Vec xk = output(state);
      const Vec diff = xk - reference;
      trace.residuals.push_back(diff.norm());
      if (config.weights) {
        trace.residuals_d.push_back(std::sqrt(diff.cwiseAbs2().dot(*config.weights)));
      }
      if (config.observer) config.observer(k, xk);
    };
    if (!stored.empty()) {
      for (std::size_t k = 0; k < stored.size(); ++k) record(static_cast<int>(k), stored[k]);
    } else {
      Vec xk = x0;
      record(0, xk);
      for (int k = 1; k <= trace.iterations; ++k) {
        xk = step(xk);
        record(k, xk);
      }
    }
  }
  return trace;
}

ConvergenceTrace run_to_fixed_point(const AffineIteration& it, const Vec& x0,
                                    const RunConfig& config) {
  if (it.dense) {
    const DenseMat& q = *it.dense;
    return iterate_map([&q, &it](const Vec& x) -> Vec { return q * x + it.r; }, x0, config);
  }
  return iterate_map([&it](const Vec& x) { return it.step(x); }, x0, config);
}

}  // namespace pnp
