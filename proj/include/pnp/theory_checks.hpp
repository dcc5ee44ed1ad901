#pragma once

#include "pnp/denoisers.hpp"
#include "pnp/forward_models.hpp"
#include "pnp/spectral_analysis.hpp"
#include "pnp/tensor_core.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pnp {

/// Symmetric matrix with ||M||_2 <= 1, together with its eigendecomposition.
struct SymNonexpansive {
  DenseMat M;
  SymEigen eig;
};

/// Validates symmetry and ||M||_2 <= 1 + 1e-9; throws std::invalid_argument otherwise.
SymNonexpansive make_sym_nonexpansive(const DenseMat& m);

/// Q diag(values) Q^T; Q must be orthogonal and |values| <= 1.
SymNonexpansive make_sym_nonexpansive(const DenseMat& q, const Vec& values);

struct SpectrumSpec {
  int pm1_count = 0;  ///< eigenvalues forced to +1 or -1 (random signs)

  static SpectrumSpec generic() { return {}; }
  static SpectrumSpec with_pm1_eigs(int k) { return {k}; }
};

/// Random orthogonal eigenbasis with eigenvalues uniform in (-0.95, 0.95),
/// except `spec.pm1_count` of them set to +-1. Requires n <= 64.
SymNonexpansive make_random_sym_nonexpansive(Index n, SpectrumSpec spec, std::uint64_t seed);

struct TheoremVerdict {
  std::string theorem_id;
  std::string instance_id;
  bool condition_holds = false;
  bool norm_lt_one = false;  ///< norm_value < 1 - 1e-9
  bool agree = false;
  double norm_value = 0.0;
  NormKind norm_kind = NormKind::euclid;
  double margin = 0.0;  ///< |1 - norm_value|
  std::uint64_t seed = 0;
  std::string note;
};

inline constexpr double kUnitTol = 1e-9;

/// ||MN||_2 < 1 iff the +-1 eigenspaces of M and N meet only at 0.
/// Both sides are taken from the cached eigendecompositions.
TheoremVerdict check_lemma1(const SymNonexpansive& m, const SymNonexpansive& n);

struct Prop3Report {
  int off_samples = 0;
  int on_samples = 0;
  int y_dim = 0;
  double min_decrease = 0.0;  ///< min over off-Y samples of |z| - |Tz|, for unit z
  double max_on_error = 0.0;  ///< max over Y samples of ||Tz| - |z||, for unit z
  bool passed = false;
};

/// Strict norm decrease off the +-1 eigenspace Y of T, preservation on Y.
Prop3Report check_prop3(const SymNonexpansive& t, int trials, std::uint64_t seed);

/// Null space basis of A (eigenvectors of A^T A below 1e-9).
DenseMat null_space_basis(const ForwardModel& fm);

/// Fixed space basis of a symmetric denoiser (eigenvalues within 1e-9 of 1).
DenseMat fixed_space_basis(const KernelDenoiser& w);

/// ||P||_2 < 1 iff N(I - W) ∩ N(A) = {0}, for symmetric W and 0 < gamma < 2 / rho(A^T A).
/// Throws std::invalid_argument if W is not a certified symmetric denoiser or gamma is
/// out of range.
TheoremVerdict check_theorem1(const KernelDenoiser& w, const ForwardModel& fm, double gamma);
/// Same, sharing the eigendecompositions of W and A^T A across step sizes.
std::vector<TheoremVerdict> check_theorem1(const KernelDenoiser& w, const ForwardModel& fm,
                                           const std::vector<double>& gammas);

/// ||R||_2 < 1 iff N(I - W) ∩ N(A) = {0}, for symmetric W and rho > 0.
TheoremVerdict check_theorem2(const KernelDenoiser& w, const ForwardModel& fm, double rho);
std::vector<TheoremVerdict> check_theorem2(const KernelDenoiser& w, const ForwardModel& fm,
                                           const std::vector<double>& rhos);

struct Theorem3Report {
  std::optional<TheoremVerdict> ista;  ///< ||P||_D through W_0 G
  std::optional<TheoremVerdict> admm;  ///< ||R||_D; absent when W is singular
  std::optional<double> p_d_direct;    ///< ||D^{1/2} P D^{-1/2}||_2
  std::optional<double> p_euclid;
  std::optional<double> j_d;  ///< ||F (2 W_0 - I)||_2
  std::optional<double> r_euclid;
  std::string note;
};

/// D-norm contraction for a row-normalized kernel denoiser and inpainting.
/// The ISTA half runs when gamma is given, the ADMM half when rho is given.
Theorem3Report check_theorem3(const KernelDenoiser& w, const ForwardModel& fm,
                              std::optional<double> gamma, std::optional<double> rho);

struct SplitReport {
  int trials = 0;
  double max_rel_error = 0.0;  ///< max | |x|^2 - |y|^2 - |z|^2 | / |x|^2
};

/// x = y + z with y in N(I - W) ⊕ N(W) and z in its orthogonal complement.
SplitReport check_orthogonal_split(const KernelDenoiser& w, int trials, std::uint64_t seed);

struct SubcaseReport {
  int dim = 0;                 ///< dim{x in N(I-W) ⊕ N(W) : Vx in N(A)}
  double max_ratio = 0.0;      ///< max |R x| / |x| over a basis of that subspace
  bool vacuous() const { return dim == 0; }
};

/// The subspace of N(I - W) ⊕ N(W) that V = 2W - I maps into N(A), and how R acts on it.
SubcaseReport theorem2_subcase(const DenseMat& w, const ForwardModel& fm, double rho);

/// Symmetric averaging denoiser W = e e^T / n; planted so that the subcase above is not vacuous.
KernelDenoiser averaging_denoiser(Index n);

// Campaigns ------------------------------------------------------------------

struct CampaignOptions {
  std::uint64_t seed = 1;
  int lemma1_trials = 240;
  int matrix_n = 0;  ///< lemma1/prop3 matrix size; 0 cycles n through 6..12
  int prop3_matrices = 100;
  int prop3_samples = 100;
  std::vector<int> image_sizes{16, 32};
  std::vector<double> gammas{0.25, 0.5, 1.0, 1.5, 1.9};
  std::vector<double> theorem3_gammas{0.25, 0.5, 0.75, 1.0, 1.5, 1.9};
  std::vector<double> rhos{0.1, 1.0, 10.0};
  /// Misreports the planted +-1 eigenvalue of M in every planted lemma1 pair,
  /// so the campaign must detect disagreement.
  bool corrupt_planted = false;
};

std::vector<TheoremVerdict> lemma1_campaign(const CampaignOptions& options);
std::vector<TheoremVerdict> prop3_campaign(const CampaignOptions& options);
std::vector<TheoremVerdict> theorem1_campaign(const CampaignOptions& options);
std::vector<TheoremVerdict> theorem2_campaign(const CampaignOptions& options);
/// ISTA and ADMM halves, plus one "euclid_gap" row: the sparse-mask instance with the
/// largest ||P||_2, which should exceed 1 while ||P||_D stays below 1.
std::vector<TheoremVerdict> theorem3_campaign(const CampaignOptions& options);

/// Test images for the image-based campaigns: seeded texture guide, its
/// symmetric and row-normalized NLM denoisers.
struct TheoryInstance {
  Image guide;
  KernelDenoiser nlm;
  KernelDenoiser dsg;
};

TheoryInstance make_theory_instance(int size, std::uint64_t seed);

/// Forward models used by the campaigns: inpaint 30%, inpaint 1%, deblur 11x11, superres 2x.
std::vector<std::pair<std::string, ForwardModel>> campaign_models(int size, std::uint64_t seed);

/// Header: theorem_id,instance_id,condition_holds,norm_value,norm_kind,agree,margin.
void write_verdict_csv(std::ostream& os, const std::vector<TheoremVerdict>& verdicts);

}  // namespace pnp
