#include "pnp/harness.hpp"

#include "pnp/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pnp {

double psnr(const Image& x, const Image& ref) {
  if (x.width != ref.width || x.height != ref.height) {
    throw std::invalid_argument("psnr: image sizes differ");
  }
  const double mse = (x.pixels - ref.pixels).squaredNorm() / static_cast<double>(ref.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

Image median_filter3(const Image& image) {
  Image out(image.width, image.height);
  std::array<double, 9> window{};
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      int k = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        const int rr = std::clamp(r + dr, 0, image.height - 1);
        for (int dc = -1; dc <= 1; ++dc) {
          window[k++] = image.at(rr, std::clamp(c + dc, 0, image.width - 1));
        }
      }
      std::nth_element(window.begin(), window.begin() + 4, window.end());
      out.at(r, c) = window[4];
    }
  }
  return out;
}

Image masked_median_filter(const Image& image, const InpaintMask& mask) {
  if (mask.width != image.width || mask.height != image.height) {
    throw std::invalid_argument("masked_median_filter: mask size differs from image");
  }
  if (mask.count() == 0) throw std::invalid_argument("masked_median_filter: nothing observed");
  Image out(image.width, image.height);
  std::vector<double> values;
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      for (int radius = 1;; ++radius) {
        values.clear();
        for (int rr = std::max(0, r - radius); rr <= std::min(image.height - 1, r + radius); ++rr) {
          for (int cc = std::max(0, c - radius); cc <= std::min(image.width - 1, c + radius); ++cc) {
            if (mask.observed[static_cast<std::size_t>(image.index(rr, cc))]) {
              values.push_back(image.at(rr, cc));
            }
          }
        }
        if (!values.empty()) break;
      }
      // Lower median for even counts keeps the result an observed value.
      const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
      std::nth_element(values.begin(), mid, values.end());
      out.at(r, c) = *mid;
    }
  }
  return out;
}

std::string_view to_string(DenoiserChoice choice) {
  return choice == DenoiserChoice::nlm ? "nlm" : "dsg_nlm";
}

DenoiserChoice parse_denoiser(std::string_view name) {
  if (name == "nlm") return DenoiserChoice::nlm;
  if (name == "dsg_nlm") return DenoiserChoice::dsg_nlm;
  throw std::invalid_argument("unknown denoiser '" + std::string(name) + "' (expected nlm|dsg_nlm)");
}

void validate(const ExperimentConfig& cfg, const Image& ground_truth) {
  if (ground_truth.width < 1 || ground_truth.height < 1) {
    throw std::invalid_argument("experiment: empty ground-truth image");
  }
  if (!ground_truth.pixels.allFinite()) {
    throw std::invalid_argument("experiment: ground truth has non-finite pixels");
  }
  if (cfg.iterations < 0) throw std::invalid_argument("experiment: iterations must be >= 0");
  if (!(cfg.noise_sigma >= 0.0)) throw std::invalid_argument("experiment: noise sigma must be >= 0");
  if (cfg.algorithm == Algorithm::ista) {
    if (!(cfg.gamma > 0.0)) throw std::invalid_argument("experiment: gamma must be positive");
    if (cfg.theorem_mode && !(cfg.gamma < 2.0)) {
      throw std::invalid_argument("experiment: theorem mode needs gamma in (0, 2), got " +
                                  std::to_string(cfg.gamma));
    }
  } else if (!(cfg.rho > 0.0)) {
    throw std::invalid_argument("experiment: rho must be positive");
  }
  if (cfg.task == Task::inpaint && !(cfg.sample > 0.0 && cfg.sample <= 1.0)) {
    throw std::invalid_argument("experiment: sampling fraction must lie in (0, 1]");
  }
  if (cfg.task != Task::inpaint && (cfg.blur_size < 1 || cfg.blur_size % 2 == 0)) {
    throw std::invalid_argument("experiment: blur size must be odd and positive");
  }
  if (cfg.task == Task::superres) {
    if (cfg.sr_factor < 1 || ground_truth.width % cfg.sr_factor != 0 ||
        ground_truth.height % cfg.sr_factor != 0) {
      throw std::invalid_argument("experiment: image size must be divisible by the superres factor");
    }
  }
  if (cfg.theorem_mode && (cfg.search_radius || ground_truth.size() > dense_max())) {
    throw std::invalid_argument("experiment: theorem mode requires FULL search (n <= dense cap)");
  }
  if (cfg.reference && cfg.reference->size() != ground_truth.size()) {
    throw std::invalid_argument("experiment: reference has the wrong size");
  }
}

ExperimentSetup prepare_experiment(const ExperimentConfig& cfg, const Image& ground_truth) {
  validate(cfg, ground_truth);
  const int w = ground_truth.width;
  const int h = ground_truth.height;
  const Index n = ground_truth.size();

  ForwardModel fm = [&] {
    switch (cfg.task) {
      case Task::inpaint:
        return ForwardModel::inpaint(InpaintMask::random(w, h, cfg.sample, mix_seed(cfg.seed, 1)));
      case Task::deblur:
        return ForwardModel::deblur(w, h, BlurKernel::uniform(cfg.blur_size));
      case Task::superres:
        return ForwardModel::superres(w, h, BlurKernel::uniform(cfg.blur_size), cfg.sr_factor);
    }
    throw std::logic_error("unreachable task");
  }();
  Vec b = fm.observe(ground_truth.pixels, cfg.noise_sigma, mix_seed(cfg.seed, 2));

  Image guide;
  switch (cfg.task) {
    case Task::inpaint: guide = masked_median_filter(Image(w, h, b), fm.mask()); break;
    case Task::deblur: guide = Image(w, h, b); break;
    case Task::superres: guide = median_filter3(Image(w, h, fm.adjoint(b))); break;
  }

  KernelParams params;
  if (cfg.search_radius) {
    params.search_radius = cfg.search_radius;
  } else if (n > dense_max()) {
    params.search_radius = 5;
  }
  KernelDenoiser nlm = KernelDenoiser::build(guide, params);
  KernelDenoiser denoiser = cfg.denoiser == DenoiserChoice::nlm ? std::move(nlm) : nlm.symmetrized();

  Vec init;
  switch (cfg.init) {
    case InitKind::guide: init = guide.pixels; break;
    case InitKind::zeros: init = Vec::Zero(n); break;
    case InitKind::ones: init = Vec::Ones(n); break;
    case InitKind::noise: {
      Rng rng(mix_seed(cfg.seed, 3));
      init.resize(n);
      for (Index i = 0; i < n; ++i) init[i] = rng.uniform();
      break;
    }
  }
  return {std::move(fm), std::move(b), std::move(guide), std::move(denoiser), std::move(init)};
}

namespace {

Image baseline_image(const ExperimentSetup& setup, int w, int h) {
  if (setup.fm.task() != Task::superres) return Image(w, h, setup.b);
  const int f = setup.fm.factor();
  const int lw = w / f;
  Image out(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out.at(r, c) = setup.b[static_cast<Index>(r / f) * lw + c / f];
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Image& ground_truth) {
  return run_experiment(cfg, ground_truth, prepare_experiment(cfg, ground_truth));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Image& ground_truth,
                                const ExperimentSetup& setup) {
  validate(cfg, ground_truth);
  const int w = ground_truth.width;
  const int h = ground_truth.height;
  const Index n = ground_truth.size();
  const LinOp wop = setup.denoiser.as_linop();
  const ForwardModel& fm = setup.fm;
  const Vec& b = setup.b;

  ExperimentResult result;
  result.guide = setup.guide;

  RunConfig run;
  run.max_iter = cfg.iterations;
  run.stop_tol = cfg.stop_tol;
  run.reference = cfg.reference;
  run.weights = setup.denoiser.degree();
  run.observer = [&result, &ground_truth, w, h](int, const Vec& xk) {
    result.psnr.push_back(psnr(Image(w, h, xk), ground_truth));
  };

  if (cfg.algorithm == Algorithm::ista) {
    const double gamma = cfg.gamma;
    result.trace = iterate_map(
        [&](const Vec& x) { return ista_step(x, wop, fm, b, gamma); }, setup.init, run);
  } else {
    // State [y; z], starting from y0 = init, z0 = 0; the output is y.
    const double rho = cfg.rho;
    const double prox_tol = cfg.prox_tol;
    Vec state0(2 * n);
    state0 << setup.init, Vec::Zero(n);
    run.project = [n](const Vec& s) -> Vec { return s.head(n); };
    result.trace = iterate_map(
        [&](const Vec& s) -> Vec {
          AdmmState st{Vec(), s.head(n), s.tail(n)};
          const AdmmState next = admm_step(st, wop, fm, b, rho, prox_tol);
          Vec out(2 * n);
          out << next.y, next.z;
          return out;
        },
        state0, run);
    result.trace.fixed_point = Vec(result.trace.fixed_point.head(n));
  }
  if (!result.trace.fixed_point.allFinite()) {
    throw NumericalError("run_experiment: iterates became non-finite", std::nan(""));
  }

  result.reconstruction = Image(w, h, result.trace.fixed_point);
  result.psnr_final = psnr(result.reconstruction, ground_truth);
  result.psnr_baseline = psnr(baseline_image(setup, w, h), ground_truth);
  result.fixed_point_hash = digest(result.trace.fixed_point);
  return result;
}

std::string digest(const Vec& x) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(x.data());
  const std::size_t count = static_cast<std::size_t>(x.size()) * sizeof(double);
  for (std::size_t i = 0; i < count; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << hash;
  return os.str();
}

ConvergenceReport convergence_report(const std::vector<double>& residuals, const NormEstimate& norm,
                                     const ReportOptions& options) {
  ConvergenceReport report;
  report.certified = norm.value < 1.0;
  if (!report.certified || residuals.empty()) return report;
  report.expected = std::log10(norm.value);

  const double floor = options.floor_rel * residuals.front();
  const int last = std::min<int>(options.last, static_cast<int>(residuals.size()) - 1);
  double sk = 0.0, sy = 0.0, skk = 0.0, sky = 0.0;
  for (int k = options.first; k <= last; ++k) {
    if (!(residuals[k] > floor)) continue;
    const double y = std::log10(residuals[k]);
    sk += k;
    sy += y;
    skk += static_cast<double>(k) * k;
    sky += k * y;
    ++report.fit_points;
  }
  if (report.fit_points < 3) {
    throw std::invalid_argument("convergence_report: fewer than 3 residuals in the fit window");
  }
  const double m = report.fit_points;
  report.slope = (m * sky - sk * sy) / (m * skk - sk * sk);
  report.slope_ok = report.slope <= report.expected + options.slack * std::abs(report.expected);

  report.ratio_ok = true;
  for (std::size_t k = 0; k + 1 < residuals.size(); ++k) {
    if (!(residuals[k] > floor)) continue;
    const double ratio = residuals[k + 1] / residuals[k];
    report.max_ratio = std::max(report.max_ratio, ratio);
    if (ratio > norm.value + options.ratio_tol) report.ratio_ok = false;
  }
  return report;
}

void write_trace_csv(std::ostream& os, const ExperimentResult& result) {
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << "iteration,residual_l2,residual_D,psnr\n" << std::setprecision(12);
  const auto& tr = result.trace;
  for (std::size_t k = 0; k < tr.residuals.size(); ++k) {
    os << k << ',' << tr.residuals[k] << ',' << (k < tr.residuals_d.size() ? tr.residuals_d[k] : 0.0)
       << ',';
    const double p = k < result.psnr.size() ? result.psnr[k] : std::nan("");
    if (std::isinf(p)) {
      os << "inf";
    } else {
      os << p;
    }
    os << '\n';
  }
  os.flags(flags);
  os.precision(precision);
}

}  // namespace pnp
