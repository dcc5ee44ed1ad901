#include "pnp/theory_checks.hpp"

#include "pnp/pnp_iterations.hpp"
#include "pnp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pnp {

namespace {

TheoremVerdict make_verdict(std::string theorem_id, bool condition_holds, double norm_value,
                            NormKind kind) {
  TheoremVerdict v;
  v.theorem_id = std::move(theorem_id);
  v.condition_holds = condition_holds;
  v.norm_value = norm_value;
  v.norm_kind = kind;
  v.norm_lt_one = norm_value < 1.0 - kUnitTol;
  v.agree = v.condition_holds == v.norm_lt_one;
  v.margin = std::abs(1.0 - norm_value);
  return v;
}

std::string format_param(double value) {
  std::ostringstream os;
  os << value;
  return os.str();
}

DenseMat hcat(const DenseMat& a, const DenseMat& b) {
  DenseMat out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

// Columns for eigenvalues 1 and 0 of a symmetric matrix.
DenseMat fixed_and_null_basis(const SymEigen& eig) {
  return hcat(eigenspace(eig, 1.0, kUnitTol), eigenspace(eig, 0.0, kUnitTol));
}

// Certifies a symmetric denoiser: W e = e, eigenvalues within [0, 1].
void certify_symmetric_denoiser(const DenseMat& w, const Vec& eigenvalues) {
  const Index n = w.rows();
  const double row_dev = (w * Vec::Ones(n) - Vec::Ones(n)).cwiseAbs().maxCoeff();
  if (row_dev > kUnitTol) {
    throw std::invalid_argument("theorem check: W is not stochastic (max |We - e| = " +
                                std::to_string(row_dev) + ")");
  }
  if (eigenvalues[0] < -kUnitTol || eigenvalues[n - 1] > 1.0 + kUnitTol) {
    throw std::invalid_argument("theorem check: W has eigenvalues outside [0, 1]");
  }
}

// Shared spectral data for the iff checks on a fixed (W, A) pair.
struct IffContext {
  DenseMat w;
  DenseMat ata;
  DenseMat fixed_w;
  DenseMat null_a;
  double rho_ata = 0.0;
  int intersection = 0;
};

IffContext make_iff_context(const KernelDenoiser& w, const ForwardModel& fm) {
  if (w.kind() != DenoiserKind::symmetric_ds) {
    throw std::invalid_argument("theorem check: requires a symmetric denoiser");
  }
  if (w.dim() != fm.n()) throw std::invalid_argument("theorem check: dimension mismatch");
  IffContext ctx;
  ctx.w = w.dense_W();
  const SymEigen eig = eig_sym(ctx.w);
  certify_symmetric_denoiser(ctx.w, eig.values);
  ctx.fixed_w = eigenspace(eig, 1.0, kUnitTol);

  const DenseMat a = fm.dense();
  ctx.ata = a.transpose() * a;
  ctx.ata = 0.5 * (ctx.ata + ctx.ata.transpose());
  if (fm.task() == Task::inpaint) {
    ctx.null_a = null_space_basis(fm);
    ctx.rho_ata = fm.mask().count() > 0 ? 1.0 : 0.0;
  } else {
    const SymEigen ata_eig = eig_sym(ctx.ata);
    ctx.null_a = eigenspace(ata_eig, 0.0, kUnitTol);
    ctx.rho_ata = ata_eig.values[ata_eig.values.size() - 1];
  }
  ctx.intersection = subspace_intersection_dim(ctx.fixed_w, ctx.null_a, kUnitTol);
  return ctx;
}

std::string iff_note(const IffContext& ctx) {
  return "dim N(I-W)=" + std::to_string(ctx.fixed_w.cols()) +
         " dim N(A)=" + std::to_string(ctx.null_a.cols()) +
         " dim intersection=" + std::to_string(ctx.intersection);
}

}  // namespace

SymNonexpansive make_sym_nonexpansive(const DenseMat& m) {
  SymNonexpansive out;
  out.eig = eig_sym(m);
  const Vec& ev = out.eig.values;
  if (std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1])) > 1.0 + kUnitTol) {
    throw std::invalid_argument("make_sym_nonexpansive: ||M||_2 exceeds 1");
  }
  out.M = 0.5 * (m + m.transpose());
  return out;
}

SymNonexpansive make_sym_nonexpansive(const DenseMat& q, const Vec& values) {
  if (q.rows() != q.cols() || q.cols() != values.size()) {
    throw std::invalid_argument("make_sym_nonexpansive: dimension mismatch");
  }
  if (values.cwiseAbs().maxCoeff() > 1.0) {
    throw std::invalid_argument("make_sym_nonexpansive: eigenvalues must lie in [-1, 1]");
  }
  const DenseMat m = q * values.asDiagonal() * q.transpose();
  return make_sym_nonexpansive(DenseMat(0.5 * (m + m.transpose())));
}

SymNonexpansive make_random_sym_nonexpansive(Index n, SpectrumSpec spec, std::uint64_t seed) {
  if (n < 1 || n > 64) throw std::invalid_argument("make_random_sym_nonexpansive: need 1 <= n <= 64");
  if (spec.pm1_count < 0 || spec.pm1_count > n) {
    throw std::invalid_argument("make_random_sym_nonexpansive: pm1_count out of range");
  }
  Rng rng(mix_seed(seed, 1));
  Vec values(n);
  for (Index i = 0; i < n; ++i) {
    values[i] = i < spec.pm1_count ? (rng.below(2) == 0 ? 1.0 : -1.0) : rng.uniform(-0.95, 0.95);
  }
  return make_sym_nonexpansive(random_orthogonal(n, mix_seed(seed, 0)), values);
}

TheoremVerdict check_lemma1(const SymNonexpansive& m, const SymNonexpansive& n) {
  if (m.M.rows() != n.M.rows()) throw std::invalid_argument("check_lemma1: dimension mismatch");
  const DenseMat u = unit_modulus_eigenspace(m.eig, kUnitTol);
  const DenseMat v = unit_modulus_eigenspace(n.eig, kUnitTol);
  const int dim = subspace_intersection_dim(u, v, kUnitTol);
  const DenseMat mn = m.M * n.M;
  Eigen::JacobiSVD<DenseMat> svd(mn);
  TheoremVerdict verdict = make_verdict("lemma1", dim == 0, svd.singularValues()[0], NormKind::euclid);
  verdict.note = "dim U=" + std::to_string(u.cols()) + " dim V=" + std::to_string(v.cols()) +
                 " dim intersection=" + std::to_string(dim);
  return verdict;
}

Prop3Report check_prop3(const SymNonexpansive& t, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_prop3: trials must be positive");
  const Index n = t.M.rows();
  const DenseMat y = unit_modulus_eigenspace(t.eig, kUnitTol);
  Rng rng(seed);
  auto gaussian = [&rng](Index size) {
    Vec g(size);
    for (Index i = 0; i < size; ++i) g[i] = rng.normal();
    return g;
  };

  Prop3Report report;
  report.y_dim = static_cast<int>(y.cols());
  report.min_decrease = std::numeric_limits<double>::infinity();
  report.passed = true;
  for (int k = 0; k < trials; ++k) {
    if (y.cols() < n) {
      Vec z = gaussian(n);
      const Vec off = z - y * (y.transpose() * z);
      if (off.norm() < 1e-6 * z.norm()) continue;
      z.normalize();
      const double decrease = 1.0 - (t.M * z).norm();
      report.min_decrease = std::min(report.min_decrease, decrease);
      if (!(decrease > 1e-12)) report.passed = false;
      ++report.off_samples;
    }
    if (y.cols() > 0) {
      const Vec z = (y * gaussian(y.cols())).normalized();
      const double err = std::abs((t.M * z).norm() - 1.0);
      report.max_on_error = std::max(report.max_on_error, err);
      if (err > 1e-10) report.passed = false;
      ++report.on_samples;
    }
  }
  if (report.off_samples == 0) report.min_decrease = 0.0;
  return report;
}

DenseMat null_space_basis(const ForwardModel& fm) {
  const Index n = fm.n();
  if (fm.task() == Task::inpaint) {
    const auto& observed = fm.mask().observed;
    const Index missing = n - fm.mask().count();
    DenseMat basis = DenseMat::Zero(n, missing);
    Index col = 0;
    for (Index i = 0; i < n; ++i) {
      if (!observed[static_cast<std::size_t>(i)]) basis(i, col++) = 1.0;
    }
    return basis;
  }
  const DenseMat a = fm.dense();
  DenseMat ata = a.transpose() * a;
  ata = 0.5 * (ata + ata.transpose());
  return eigenspace(eig_sym(ata), 0.0, kUnitTol);
}

DenseMat fixed_space_basis(const KernelDenoiser& w) {
  if (w.kind() != DenoiserKind::symmetric_ds) {
    throw std::invalid_argument("fixed_space_basis: requires a symmetric denoiser");
  }
  return eigenspace(eig_sym(w.dense_W()), 1.0, kUnitTol);
}

std::vector<TheoremVerdict> check_theorem1(const KernelDenoiser& w, const ForwardModel& fm,
                                           const std::vector<double>& gammas) {
  const IffContext ctx = make_iff_context(w, fm);
  std::vector<TheoremVerdict> out;
  for (double gamma : gammas) {
    const double upper = ctx.rho_ata > 0.0 ? 2.0 / ctx.rho_ata
                                           : std::numeric_limits<double>::infinity();
    if (!(gamma > 0.0 && gamma < upper)) {
      throw std::invalid_argument("check_theorem1: gamma = " + format_param(gamma) +
                                  " outside (0, 2 / rho(A^T A))");
    }
    const DenseMat p = ctx.w - gamma * (ctx.w * ctx.ata);
    TheoremVerdict v = make_verdict("theorem1", ctx.intersection == 0, spectral_norm(p),
                                    NormKind::euclid);
    v.instance_id = "gamma=" + format_param(gamma);
    v.note = iff_note(ctx);
    out.push_back(std::move(v));
  }
  return out;
}

TheoremVerdict check_theorem1(const KernelDenoiser& w, const ForwardModel& fm, double gamma) {
  return check_theorem1(w, fm, std::vector<double>{gamma}).front();
}

std::vector<TheoremVerdict> check_theorem2(const KernelDenoiser& w, const ForwardModel& fm,
                                           const std::vector<double>& rhos) {
  const IffContext ctx = make_iff_context(w, fm);
  const Index n = fm.n();
  const DenseMat v_op = 2.0 * ctx.w - DenseMat::Identity(n, n);
  std::vector<TheoremVerdict> out;
  for (double rho : rhos) {
    if (!(rho > 0.0)) throw std::invalid_argument("check_theorem2: rho must be positive");
    const DenseMat f = dense_reflected_resolvent(fm, rho);
    const DenseMat r = 0.5 * (DenseMat::Identity(n, n) + f * v_op);
    TheoremVerdict v = make_verdict("theorem2", ctx.intersection == 0, spectral_norm(r),
                                    NormKind::euclid);
    v.instance_id = "rho=" + format_param(rho);
    v.note = iff_note(ctx);
    out.push_back(std::move(v));
  }
  return out;
}

TheoremVerdict check_theorem2(const KernelDenoiser& w, const ForwardModel& fm, double rho) {
  return check_theorem2(w, fm, std::vector<double>{rho}).front();
}

Theorem3Report check_theorem3(const KernelDenoiser& w, const ForwardModel& fm,
                              std::optional<double> gamma, std::optional<double> rho) {
  if (w.kind() != DenoiserKind::row_normalized) {
    throw std::invalid_argument("check_theorem3: requires a row-normalized kernel denoiser");
  }
  if (fm.task() != Task::inpaint) throw std::invalid_argument("check_theorem3: requires inpainting");
  if (w.dim() != fm.n()) throw std::invalid_argument("check_theorem3: dimension mismatch");
  if (gamma && !(*gamma > 0.0 && *gamma < 2.0)) {
    throw std::invalid_argument("check_theorem3: gamma must lie in (0, 2)");
  }
  if (rho && !(*rho > 0.0)) throw std::invalid_argument("check_theorem3: rho must be positive");

  const Index n = fm.n();
  const DenseMat w0 = w.symmetric_similar();
  const SpectralCertificate cert = spectral_certificate(w);
  const bool sampled = fm.mask().count() > 0;
  const bool hypotheses = sampled && cert.unit_simple && cert.min_eigenvalue >= -kUnitTol;
  Vec mask(n);
  for (Index i = 0; i < n; ++i) mask[i] = fm.mask().observed[static_cast<std::size_t>(i)] ? 1.0 : 0.0;

  Theorem3Report report;
  if (!sampled) report.note = "empty mask; ";
  if (!cert.unit_simple) report.note += "eigenvalue 1 of W not simple; ";

  // One-directional claim: the verdict agrees when the norm is below one, or
  // when the hypotheses fail (nothing is claimed then).
  auto claim = [&](std::string id, double value, bool holds) {
    TheoremVerdict v = make_verdict(std::move(id), holds, value, NormKind::D);
    v.agree = !holds || v.norm_lt_one;
    return v;
  };

  if (gamma) {
    const Vec g = Vec::Ones(n) - *gamma * mask;
    const DenseMat w0g = w0 * g.asDiagonal();
    TheoremVerdict v = claim("theorem3_ista", spectral_norm(w0g), hypotheses);
    v.instance_id = "gamma=" + format_param(*gamma);
    const DenseMat p = w.dense_W() * g.asDiagonal();
    report.p_d_direct = spectral_norm(conjugate_dense(p, w.degree()));
    report.p_euclid = spectral_norm(p);
    report.ista = std::move(v);
  }
  if (rho) {
    if (!cert.nonsingular) {
      report.note += "W singular: ADMM half skipped; ";
    } else {
      Vec f(n);
      for (Index i = 0; i < n; ++i) f[i] = mask[i] > 0.0 ? (1.0 - *rho) / (1.0 + *rho) : 1.0;
      const DenseMat v0 = 2.0 * w0 - DenseMat::Identity(n, n);
      const DenseMat j = f.asDiagonal() * v0;
      report.j_d = spectral_norm(j);
      const DenseMat r = 0.5 * (DenseMat::Identity(n, n) + f.asDiagonal() *
                                                              (2.0 * w.dense_W() -
                                                               DenseMat::Identity(n, n)));
      TheoremVerdict v =
          claim("theorem3_admm", spectral_norm(conjugate_dense(r, w.degree())), hypotheses);
      v.instance_id = "rho=" + format_param(*rho);
      v.note = "||J||_D=" + format_param(*report.j_d);
      report.r_euclid = spectral_norm(r);
      report.admm = std::move(v);
    }
  }
  return report;
}

SplitReport check_orthogonal_split(const KernelDenoiser& w, int trials, std::uint64_t seed) {
  if (w.kind() != DenoiserKind::symmetric_ds) {
    throw std::invalid_argument("check_orthogonal_split: requires a symmetric denoiser");
  }
  const DenseMat basis = fixed_and_null_basis(eig_sym(w.dense_W()));
  Rng rng(seed);
  SplitReport report;
  for (int k = 0; k < trials; ++k) {
    Vec x(w.dim());
    for (Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
    const Vec y = basis * (basis.transpose() * x);
    const Vec z = x - y;
    const double err = std::abs(x.squaredNorm() - y.squaredNorm() - z.squaredNorm()) / x.squaredNorm();
    report.max_rel_error = std::max(report.max_rel_error, err);
    ++report.trials;
  }
  return report;
}

SubcaseReport theorem2_subcase(const DenseMat& w, const ForwardModel& fm, double rho) {
  if (w.rows() != fm.n()) throw std::invalid_argument("theorem2_subcase: dimension mismatch");
  const DenseMat basis = fixed_and_null_basis(eig_sym(w));
  SubcaseReport report;
  if (basis.cols() == 0) return report;

  const DenseMat vb = 2.0 * (w * basis) - basis;
  const DenseMat avb = fm.dense() * vb;
  Eigen::JacobiSVD<DenseMat> svd(avb, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const Index k = basis.cols();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > kUnitTol) ++rank;
  }
  report.dim = static_cast<int>(k - rank);
  if (report.dim == 0) return report;

  const DenseMat subspace = basis * svd.matrixV().rightCols(report.dim);
  const LinOp r = build_u_operator(LinOp::from_dense(w), fm, Vec::Zero(fm.m()), rho).Q;
  for (Index c = 0; c < subspace.cols(); ++c) {
    const Vec x = subspace.col(c);
    report.max_ratio = std::max(report.max_ratio, r.apply(x).norm() / x.norm());
  }
  return report;
}

KernelDenoiser averaging_denoiser(Index n) {
  return KernelDenoiser::from_kernel(DenseMat::Ones(n, n)).symmetrized();
}

// Campaigns ------------------------------------------------------------------

namespace {

enum class PairMode { generic, disjoint, planted, forced };

const char* mode_name(PairMode mode) {
  switch (mode) {
    case PairMode::generic: return "generic";
    case PairMode::disjoint: return "disjoint";
    case PairMode::planted: return "planted";
    case PairMode::forced: return "forced";
  }
  return "?";
}

int between(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

// N sharing `shared` of M's +-1 eigenvectors, plus `extra` unrelated +-1 directions.
SymNonexpansive planted_partner(const SymNonexpansive& m, int shared, int extra, Rng& rng) {
  const Index n = m.M.rows();
  const DenseMat u = unit_modulus_eigenspace(m.eig, kUnitTol);
  DenseMat seedmat(n, n);
  seedmat.leftCols(shared) = u.leftCols(shared);
  for (Index j = shared; j < n; ++j)
    for (Index i = 0; i < n; ++i) seedmat(i, j) = rng.normal();
  Eigen::HouseholderQR<DenseMat> qr(seedmat);
  const DenseMat q = qr.householderQ() * DenseMat::Identity(n, n);
  Vec values(n);
  for (Index i = 0; i < n; ++i) {
    values[i] = i < shared + extra ? (rng.below(2) == 0 ? 1.0 : -1.0) : rng.uniform(-0.95, 0.95);
  }
  return make_sym_nonexpansive(q, values);
}

void corrupt_unit_eigenvalues(SymNonexpansive& m) {
  for (Index i = 0; i < m.eig.values.size(); ++i) {
    if (std::abs(std::abs(m.eig.values[i]) - 1.0) < kUnitTol) m.eig.values[i] = 0.5;
  }
}

}  // namespace

std::vector<TheoremVerdict> lemma1_campaign(const CampaignOptions& options) {
  std::vector<TheoremVerdict> out;
  for (int t = 0; t < options.lemma1_trials; ++t) {
    const std::uint64_t seed = mix_seed(options.seed, static_cast<std::uint64_t>(t));
    const int n = options.matrix_n > 0 ? options.matrix_n : 6 + t % 7;
    const auto mode = static_cast<PairMode>(t % 4);
    Rng rng(mix_seed(seed, 2));
    SymNonexpansive m;
    SymNonexpansive partner;
    switch (mode) {
      case PairMode::generic:
        m = make_random_sym_nonexpansive(n, SpectrumSpec::generic(), mix_seed(seed, 3));
        partner = make_random_sym_nonexpansive(n, SpectrumSpec::generic(), mix_seed(seed, 4));
        break;
      case PairMode::disjoint: {
        const int k1 = between(rng, 1, n / 2);
        const int k2 = between(rng, 1, n - k1);
        m = make_random_sym_nonexpansive(n, SpectrumSpec::with_pm1_eigs(k1), mix_seed(seed, 3));
        partner = make_random_sym_nonexpansive(n, SpectrumSpec::with_pm1_eigs(k2), mix_seed(seed, 4));
        break;
      }
      case PairMode::planted: {
        const int k1 = between(rng, 1, n / 2);
        m = make_random_sym_nonexpansive(n, SpectrumSpec::with_pm1_eigs(k1), mix_seed(seed, 3));
        const int shared = between(rng, 1, k1);
        const int extra = between(rng, 0, std::max(0, std::min(2, n - k1 - shared)));
        partner = planted_partner(m, shared, extra, rng);
        if (options.corrupt_planted) corrupt_unit_eigenvalues(m);
        break;
      }
      case PairMode::forced: {
        const int k1 = between(rng, n / 2 + 1, n - 1);
        const int k2 = between(rng, n - k1 + 1, n - 1);
        m = make_random_sym_nonexpansive(n, SpectrumSpec::with_pm1_eigs(k1), mix_seed(seed, 3));
        partner = make_random_sym_nonexpansive(n, SpectrumSpec::with_pm1_eigs(k2), mix_seed(seed, 4));
        break;
      }
    }
    TheoremVerdict v = check_lemma1(m, partner);
    v.instance_id = "t" + std::to_string(t) + "-n" + std::to_string(n) + "-" + mode_name(mode);
    v.seed = seed;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<TheoremVerdict> prop3_campaign(const CampaignOptions& options) {
  std::vector<TheoremVerdict> out;
  for (int t = 0; t < options.prop3_matrices; ++t) {
    const std::uint64_t seed = mix_seed(mix_seed(options.seed, 0x9e3), static_cast<std::uint64_t>(t));
    const int n = options.matrix_n > 0 ? options.matrix_n : 6 + t % 7;
    Rng rng(seed);
    const int k = between(rng, 0, n / 2);
    const SymNonexpansive tm =
        make_random_sym_nonexpansive(n, SpectrumSpec::with_pm1_eigs(k), mix_seed(seed, 1));
    const Prop3Report report = check_prop3(tm, options.prop3_samples, mix_seed(seed, 2));
    TheoremVerdict v;
    v.theorem_id = "prop3";
    v.instance_id = "t" + std::to_string(t) + "-n" + std::to_string(n) + "-y" + std::to_string(k);
    v.condition_holds = true;
    v.norm_value = 1.0 - report.min_decrease;
    v.norm_kind = NormKind::euclid;
    v.norm_lt_one = v.norm_value < 1.0;
    v.agree = report.passed;
    v.margin = report.min_decrease;
    v.seed = seed;
    std::ostringstream note;
    note << "off=" << report.off_samples << " on=" << report.on_samples
         << " max_on_error=" << report.max_on_error;
    v.note = note.str();
    out.push_back(std::move(v));
  }
  return out;
}

TheoryInstance make_theory_instance(int size, std::uint64_t seed) {
  Image guide = synthetic_texture(size, size, seed);
  KernelDenoiser nlm = KernelDenoiser::build(guide, KernelParams{});
  KernelDenoiser dsg = nlm.symmetrized();
  return {std::move(guide), std::move(nlm), std::move(dsg)};
}

std::vector<std::pair<std::string, ForwardModel>> campaign_models(int size, std::uint64_t seed) {
  std::vector<std::pair<std::string, ForwardModel>> models;
  models.emplace_back("inpaint30",
                      ForwardModel::inpaint(InpaintMask::random(size, size, 0.3, mix_seed(seed, 11))));
  models.emplace_back("inpaint1",
                      ForwardModel::inpaint(InpaintMask::random(size, size, 0.01, mix_seed(seed, 12))));
  models.emplace_back("deblur", ForwardModel::deblur(size, size, BlurKernel::uniform(11)));
  models.emplace_back("superres", ForwardModel::superres(size, size, BlurKernel::uniform(11), 2));
  return models;
}

namespace {

std::string image_prefix(int size, const std::string& model) {
  return std::to_string(size) + "x" + std::to_string(size) + "-" + model + "-";
}

template <typename Check>
void image_iff_campaign(const CampaignOptions& options, const std::vector<double>& params,
                        Check check, std::vector<TheoremVerdict>& out) {
  for (int size : options.image_sizes) {
    const std::uint64_t seed = mix_seed(options.seed, static_cast<std::uint64_t>(size));
    const TheoryInstance inst = make_theory_instance(size, seed);
    const SpectralCertificate cert = spectral_certificate(inst.dsg);
    for (const auto& [name, fm] : campaign_models(size, seed)) {
      for (TheoremVerdict v : check(inst.dsg, fm, params)) {
        v.instance_id = image_prefix(size, name) + v.instance_id;
        v.seed = seed;
        if (!cert.unit_simple) v.note += " (eigenvalue 1 of W not simple)";
        out.push_back(std::move(v));
      }
    }
  }
}

}  // namespace

std::vector<TheoremVerdict> theorem1_campaign(const CampaignOptions& options) {
  std::vector<TheoremVerdict> out;
  image_iff_campaign(
      options, options.gammas,
      [](const KernelDenoiser& w, const ForwardModel& fm, const std::vector<double>& params) {
        return check_theorem1(w, fm, params);
      },
      out);
  // Negative direction: with nothing observed, N(A) is everything and holds e.
  const int size = options.image_sizes.empty() ? 16 : options.image_sizes.front();
  const std::uint64_t seed = mix_seed(options.seed, static_cast<std::uint64_t>(size));
  const TheoryInstance inst = make_theory_instance(size, seed);
  const ForwardModel empty = ForwardModel::inpaint_allow_empty(InpaintMask::empty(size, size));
  TheoremVerdict v = check_theorem1(inst.dsg, empty, 1.0);
  v.instance_id = image_prefix(size, "inpaint0") + v.instance_id;
  v.seed = seed;
  out.push_back(std::move(v));
  return out;
}

std::vector<TheoremVerdict> theorem2_campaign(const CampaignOptions& options) {
  std::vector<TheoremVerdict> out;
  image_iff_campaign(
      options, options.rhos,
      [](const KernelDenoiser& w, const ForwardModel& fm, const std::vector<double>& params) {
        return check_theorem2(w, fm, params);
      },
      out);

  const int size = options.image_sizes.empty() ? 16 : options.image_sizes.front();
  const std::uint64_t seed = mix_seed(options.seed, static_cast<std::uint64_t>(size));
  const ForwardModel fm =
      ForwardModel::inpaint(InpaintMask::random(size, size, 0.3, mix_seed(seed, 11)));
  const Index n = fm.n();

  // Negative direction: W = I fixes every vector, including N(A).
  const KernelDenoiser identity = KernelDenoiser::from_kernel(DenseMat::Identity(n, n)).symmetrized();
  for (TheoremVerdict v : check_theorem2(identity, fm, options.rhos)) {
    v.instance_id = image_prefix(size, "inpaint30-identityW") + v.instance_id;
    v.seed = seed;
    out.push_back(std::move(v));
  }

  // Subcase x in N(I-W) ⊕ N(W) with Vx in N(A): vacuous for the NLM instance,
  // planted with the averaging denoiser.
  const TheoryInstance inst = make_theory_instance(size, seed);
  const KernelDenoiser averaging = averaging_denoiser(n);
  for (const auto& [label, w] : {std::pair<std::string, const KernelDenoiser*>{"dsg", &inst.dsg},
                                 std::pair<std::string, const KernelDenoiser*>{"averagingW", &averaging}}) {
    const double rho = 1.0;
    const TheoremVerdict base = check_theorem2(*w, fm, rho);
    const SubcaseReport sub = theorem2_subcase(w->dense_W(), fm, rho);
    TheoremVerdict v;
    v.theorem_id = "theorem2_subcase";
    v.instance_id = image_prefix(size, "inpaint30-" + label) + "rho=1";
    v.seed = seed;
    v.condition_holds = base.condition_holds;
    v.norm_kind = NormKind::euclid;
    if (sub.vacuous()) {
      v.norm_value = base.norm_value;
      v.norm_lt_one = base.norm_lt_one;
      v.agree = base.agree;
      v.note = "subcase vacuous";
    } else {
      v.norm_value = sub.max_ratio;
      v.norm_lt_one = sub.max_ratio < 1.0 - kUnitTol;
      v.agree = v.condition_holds == v.norm_lt_one;
      v.note = "subcase dim=" + std::to_string(sub.dim);
    }
    v.margin = std::abs(1.0 - v.norm_value);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<TheoremVerdict> theorem3_campaign(const CampaignOptions& options) {
  std::vector<TheoremVerdict> out;
  std::optional<TheoremVerdict> gap;
  for (int size : options.image_sizes) {
    const std::uint64_t seed = mix_seed(options.seed, static_cast<std::uint64_t>(size));
    const TheoryInstance inst = make_theory_instance(size, seed);
    const auto models = campaign_models(size, seed);
    for (const auto& [name, fm] : models) {
      if (fm.task() != Task::inpaint) continue;
      const std::string prefix = image_prefix(size, name);
      for (double gamma : options.theorem3_gammas) {
        const Theorem3Report rep = check_theorem3(inst.nlm, fm, gamma, std::nullopt);
        TheoremVerdict v = *rep.ista;
        v.instance_id = prefix + v.instance_id;
        v.seed = seed;
        std::ostringstream note;
        note << std::setprecision(10) << "||P||_2=" << *rep.p_euclid
             << " ||P||_D direct=" << *rep.p_d_direct << (rep.note.empty() ? "" : " ") << rep.note;
        v.note = note.str();
        if (fm.mask().sampling_fraction() <= 0.01 && (!gap || *rep.p_euclid > gap->norm_value)) {
          TheoremVerdict g;
          g.theorem_id = "euclid_gap";
          g.instance_id = v.instance_id;
          g.seed = seed;
          g.condition_holds = v.norm_lt_one;
          g.norm_value = *rep.p_euclid;
          g.norm_kind = NormKind::euclid;
          g.norm_lt_one = g.norm_value < 1.0 - kUnitTol;
          g.agree = g.condition_holds && g.norm_value > 1.0;
          g.margin = std::abs(1.0 - g.norm_value);
          g.note = "||P||_D=" + format_param(v.norm_value);
          gap = std::move(g);
        }
        out.push_back(std::move(v));
      }
      for (double rho : options.rhos) {
        const Theorem3Report rep = check_theorem3(inst.nlm, fm, std::nullopt, rho);
        if (!rep.admm) {
          TheoremVerdict v;
          v.theorem_id = "theorem3_admm";
          v.instance_id = prefix + "rho=" + format_param(rho);
          v.seed = seed;
          v.agree = true;
          v.note = rep.note;
          out.push_back(std::move(v));
          continue;
        }
        TheoremVerdict v = *rep.admm;
        v.instance_id = prefix + v.instance_id;
        v.seed = seed;
        std::ostringstream note;
        note << std::setprecision(10) << v.note << " ||R||_2=" << *rep.r_euclid;
        v.note = note.str();
        out.push_back(std::move(v));
      }
    }
  }
  if (gap) out.push_back(std::move(*gap));
  return out;
}

void write_verdict_csv(std::ostream& os, const std::vector<TheoremVerdict>& verdicts) {
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << "theorem_id,instance_id,condition_holds,norm_value,norm_kind,agree,margin\n";
  os << std::setprecision(12);
  for (const TheoremVerdict& v : verdicts) {
    os << v.theorem_id << ',' << v.instance_id << ',' << (v.condition_holds ? "true" : "false")
       << ',' << v.norm_value << ',' << to_string(v.norm_kind) << ',' << (v.agree ? "true" : "false")
       << ',' << v.margin << '\n';
  }
  os.flags(flags);
  os.precision(precision);
}

}  // namespace pnp
