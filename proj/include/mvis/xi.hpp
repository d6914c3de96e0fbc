#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mvis/additive.hpp"

namespace mvis {

// Exact W->0 kernel of the visualization function: for m operators the map
// (A'_1,...,A'_m) -> K with  Xi(A_1..A_m) = sum K * prod_i w(A_i - A'_i).
// Stored dense over the group-value axes; real by construction.
struct DiscreteKernel {
  int m = 0;
  std::vector<std::string> labels;          // operator labels
  std::vector<std::vector<double>> axes;    // per-operator sorted eigenvalues
  std::vector<double> values;               // row-major, axis 0 slowest

  double at(int i, int j) const { return values[std::size_t(i) * axes[1].size() + j]; }
  double at(int i, int j, int k) const {
    return values[(std::size_t(i) * axes[1].size() + j) * axes[2].size() + k];
  }
  double sum() const;
  double min_value() const;
  // Sum over all axes but `keep`; equals the single-operator weight list.
  std::vector<double> marginal(int keep) const;
  // m=3 -> m=2 by summing out the remaining axis.
  DiscreteKernel marginal_pair(int keep_a, int keep_b) const;
  DiscreteKernel transposed() const;  // m=2 only
};

// K(A',B') = Re <psi| P_A(A') P_B(B') |psi>, computed by projecting group by
// group in the local eigenframes; cost O(G_B * N * 2^N). The evaluation
// orientation is canonicalized so that kernel2(psi,a,b) and kernel2(psi,b,a)
// are exact transposes of each other.
DiscreteKernel kernel2(const StateVector& psi, const SpectralDecomposition& dec_a,
                       const SpectralDecomposition& dec_b, int threads = 1);

// Three-operator kernel, (1/3!) sum over permutations; symmetric under
// coordinate relabeling by construction. Only m = 3 is supported.
DiscreteKernel kernel_m(const StateVector& psi,
                        const std::vector<const SpectralDecomposition*>& decs,
                        int threads = 1);

// Provisional maximally mixed state rho = 2^-N: per-site overlap
// probabilities composed with a two-variable generating-function product.
// Requires site-uniform local terms (identical up to a per-site sign).
DiscreteKernel kernel2_maximally_mixed(int n, const AdditiveOperator& a,
                                       const AdditiveOperator& b);

struct GridAxis {
  double min = 0.0, step = 0.0;
  int n = 0;
  double point(int i) const { return min + i * step; }
  double max() const { return min + (n - 1) * step; }
};

// step = W/8, extent = [min axis value - 5W, max + 5W]
GridAxis default_grid(const std::vector<double>& axis_values, double W);

struct XiField {
  std::vector<std::string> labels;
  double W = 0.0;
  GridAxis ga, gb;
  std::vector<double> values;  // row-major, a slowest
  double min_value = 0.0;
  double integral = 0.0;       // trapezoid normalization check

  double at(int i, int j) const { return values[std::size_t(i) * gb.n + j]; }
};

// Separable Gaussian convolution of an m=2 kernel onto the grid.
XiField coarse_grain(const DiscreteKernel& kernel, double W, const GridAxis& ga,
                     const GridAxis& gb);
XiField coarse_grain(const DiscreteKernel& kernel, double W);  // default grids

struct NegativityResult {
  double I = 0.0;        // <= 0
  bool converged = true;
  int refinements = 0;
};

// I = integral of min(Xi, 0), trapezoid on the field grid, halving the step
// until the change is < tol (default 1e-6) or max_refine extra levels.
// W <= 0 is the W->0 convention: the sum of negative kernel weights.
NegativityResult negativity(const DiscreteKernel& kernel, double W, double tol = 1e-6,
                            int max_refine = 4);

enum class WRuleKind { LinearN, SqrtN };

struct WRule {
  WRuleKind kind = WRuleKind::LinearN;
  double c = 1.0 / 6.0;  // W = c*N, or W = sqrt(c*N)
  double operator()(int n) const;
  std::string name() const;
};

WRule parse_w_rule(const std::string& text);  // "N/6", "0.25N", "sqrtN", "sqrt0.5N"

struct ScanRow {
  int n = 0;
  double W = 0.0;
  double I = 0.0;
};

// Negativity of Xi(op1, op2) across system sizes with W set by the rule.
std::vector<ScanRow> w_scaling_scan(
    const std::function<StateVector(int)>& family_builder,
    const std::function<std::pair<AdditiveOperator, AdditiveOperator>(int)>& op_selector,
    const WRule& rule, const std::vector<int>& sizes, int threads = 1);

}  // namespace mvis
