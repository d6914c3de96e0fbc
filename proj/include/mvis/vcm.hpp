#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mvis/models.hpp"
#include "mvis/statevec.hpp"

namespace mvis {

// Hermitian additive operator A = sum_{l,alpha} c_{alpha l} sigma_alpha(l).
// Coefficients are stored site-major: coeffs[3(l-1)+alpha].
struct AdditiveOperator {
  std::vector<cplx> coeffs;
  std::string label;
  bool hermitian = true;

  int n_sites() const { return static_cast<int>(coeffs.size()) / 3; }
  cplx coeff(int site, Axis axis) const { return coeffs[coeff_index(site, axis)]; }
  double norm_sq_coeffs() const { return norm_sq(coeffs); }

  // max |Im c| <= 1e-10 after removing the global phase of the largest
  // entry. This is the right notion for classifying VCM eigenvectors (their
  // phase is solver gauge); spectral decomposition additionally requires the
  // stored coefficients themselves to be real.
  static bool coeffs_hermitian(const std::vector<cplx>& c);
  void refresh_hermitian_flag() { hermitian = coeffs_hermitian(coeffs); }
};

// Named operator factories; all carry the sum |c|^2 = N normalization.
AdditiveOperator uniform_op(Axis axis, int n_sites, const std::string& label = "");
AdditiveOperator staggered_op(Axis axis, const std::vector<int>& signs,
                              const std::string& label = "");
AdditiveOperator staggered_op(Axis axis, int n_sites);  // (-1)^l signs
// per-site (-sx + sz)/sqrt(2)
AdditiveOperator diag_xz_op(int n_sites);
// sqrt(N/(N1-1)) * sum_{l=2..N1} sigma_x(l), and the y-staggered partner
AdditiveOperator shor_reg1_x_op(const ShorLayout& lay);
AdditiveOperator shor_reg1_y_staggered_op(const ShorLayout& lay);

// A|psi> as a raw state.
StateVector additive_apply(const AdditiveOperator& a, const StateVector& psi);

// 3N x 3N variance-covariance matrix V_{al,bl'} = <Dsigma_a(l) Dsigma_b(l')>.
struct Vcm {
  int n_sites = 0;
  Eigen::MatrixXcd entries;        // hermitian after symmetrization
  double hermiticity_defect = 0.0; // max |V - V^dag| before symmetrization

  double trace_real() const { return entries.real().trace(); }
};

Vcm compute_vcm(const StateVector& state, int threads = 1);

struct VcmSpectrum {
  int n_sites = 0;
  std::vector<double> eigenvalues;  // e1 >= e2 >= ... >= e_{3N}
  Eigen::MatrixXcd eigenvectors;    // column i ~ e_i, scaled to sum |c|^2 = N
  double max_residual = 0.0;        // max_i ||V c_i - e_i c_i||
};

VcmSpectrum spectrum(const Vcm& v);

// <Delta A^dag Delta A> as the quadratic form c^dag V c.
double operator_variance(const Vcm& v, const AdditiveOperator& a);
// Same moment evaluated directly on the state (cross-check path).
double operator_variance_direct(const StateVector& state, const AdditiveOperator& a);

// Fraction of the coefficient vector living in the e_i >= gamma*N eigenspace.
double macroscopic_component_weight(const AdditiveOperator& a, const VcmSpectrum& spec,
                                    double gamma = 0.1);

struct PEstimate {
  std::vector<int> sizes;
  std::vector<double> e1s;
  double p = 1.0;       // 1 + slope, clamped to [1,2]
  double p_raw = 1.0;   // unclamped
  double slope_stderr = 0.0;
  double epsilon = 0.25;
  bool classified_p2 = false;  // p_raw >= 2 - epsilon
};

// Least-squares fit of log e1(N) vs log N over a family of similar states.
PEstimate estimate_p(const std::function<StateVector(int)>& family_builder,
                     const std::vector<int>& sizes, double epsilon = 0.25, int threads = 1);
PEstimate estimate_p_from_points(const std::vector<int>& sizes, const std::vector<double>& e1s,
                                 double epsilon = 0.25);

// Candidate coefficient vectors used to resolve degenerate eigenspaces into
// the named operators (uniform/staggered per axis, register-restricted
// variants for a Shor layout).
struct Pattern {
  std::string name;
  std::vector<cplx> coeffs;        // sum |c|^2 = N normalization
  double idealized_per_site = 1.0; // the size-independent coefficient value
};

std::vector<Pattern> make_pattern_dictionary(int n_sites, const std::vector<int>& stagger_signs,
                                             const std::optional<ShorLayout>& shor = {});

struct ExtractedOperator {
  AdditiveOperator op;       // sum |c|^2 = N
  double eigenvalue = 0.0;   // block eigenvalue it came from
  int block = 0;
  std::string pattern;       // dictionary name when substituted, else ""
  double pattern_overlap = 0.0;
  double variance = 0.0;     // <(Delta A)^2> from the spectrum
  bool from_split = false;   // came out of a re/im split of a non-hermitian vector
};

struct SetExtraction {
  std::vector<ExtractedOperator> members;
  bool p2_candidate = true;  // false when no e_i >= gamma*N (empty S is valid)
  double gamma = 0.1;
  int n_blocks = 0;
};

// Builds the set S of macroscopically fluctuating hermitian additive
// operators from the VCM spectrum:
//   1. keep eigenvalues e_i >= max(gamma*N, gamma_rel*e1) — the relative
//      floor separates the O(N) block from finite-size stragglers at a
//      single size (gamma_rel = 0 disables it),
//   2. cluster them into degenerate blocks (relative gap < 1e-6),
//   3. replace block spans by dictionary patterns with squared overlap >= 0.98,
//   4. phase-fix leftover raw vectors,
//   5. split non-hermitian vectors into re/im parts, keeping parts with
//      variance >= gamma*N^2/4.
SetExtraction extract_S(const VcmSpectrum& spec, double gamma,
                        const std::vector<Pattern>& dictionary, double gamma_rel = 0.5);

// Smallest squared cosine between two coefficient subspaces (1 = identical).
double subspace_overlap(const std::vector<std::vector<cplx>>& a,
                        const std::vector<std::vector<cplx>>& b);

}  // namespace mvis
