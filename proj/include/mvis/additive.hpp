#pragma once

#include <cstdint>
#include <vector>

#include "mvis/statevec.hpp"
#include "mvis/vcm.hpp"

namespace mvis {

// Spectral decomposition of a hermitian additive operator. Each 2x2 local
// term is diagonalized in closed form; a computational-basis index in the
// rotated frame has total eigenvalue sum_l lambda_{l, bit_l}.
struct SpectralDecomposition {
  AdditiveOperator op;
  int n_sites = 0;
  std::vector<std::array<double, 2>> site_eigenvalues;  // [bit0, bit1] = [-rho, +rho]
  std::vector<LocalUnitary> site_rotations;             // columns are local eigenvectors
  std::vector<double> group_values;                     // ascending distinct totals
  std::vector<std::int64_t> group_counts;
  std::vector<std::int32_t> group_of_index;             // rotated-frame index -> group
  double norm_bound = 0.0;                              // sum_l rho_l

  int n_groups() const { return static_cast<int>(group_values.size()); }
};

// Errors on a non-hermitian operator. Group ordering is ascending eigenvalue;
// totals closer than 1e-9 * max(1, norm_bound) count as one eigenvalue.
SpectralDecomposition decompose(const AdditiveOperator& a);

// State expressed in the operator eigenframe (all local rotations applied).
std::vector<cplx> to_eigenframe(const StateVector& state, const SpectralDecomposition& dec);
StateVector from_eigenframe(std::vector<cplx> amps, const SpectralDecomposition& dec);

// P_A(A'_gid) |state>, unnormalized, in the computational basis. Idempotent;
// summed over groups it reproduces the state.
StateVector project_group(const StateVector& state, const SpectralDecomposition& dec, int gid);

// q(A') = ||P(A') psi||^2 for every group, one pass over the eigenframe.
std::vector<double> group_weights(const StateVector& state, const SpectralDecomposition& dec);

struct CoarseGrainConfig {
  enum class Mode { Delta, Gaussian };  // Delta = the W->0 limit, a distinct mode
  Mode mode = Mode::Gaussian;
  double W = 1.0;
  double grid_min = 0.0, grid_max = 0.0, grid_step = 0.0;

  static CoarseGrainConfig delta();
  // Grid defaults: step = W/8, extent = [spectrum_min - 5W, spectrum_max + 5W].
  static CoarseGrainConfig gaussian(double W, double spectrum_min, double spectrum_max);
  // Errors when the grid violates the coverage or step <= W/4 rules.
  void validate(double spectrum_min, double spectrum_max) const;

  int n_points() const;
  double point(int i) const { return grid_min + i * grid_step; }
};

// 1/(sqrt(2 pi) W) exp(-X^2 / 2 W^2)
double gaussian_kernel(double x, double w);

struct Density {
  CoarseGrainConfig::Mode mode;
  std::vector<double> group_values;  // A'
  std::vector<double> weights;       // q(A'), the W->0 "vertical lines"
  // Gaussian mode only:
  CoarseGrainConfig cfg;
  std::vector<double> samples;       // Xi_A on the grid
  double integral = 0.0;             // trapezoid; 1 within 1e-6 for valid grids
};

Density density(const StateVector& state, const SpectralDecomposition& dec,
                const CoarseGrainConfig& cfg);

}  // namespace mvis
