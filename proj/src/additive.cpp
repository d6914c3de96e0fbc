#include "mvis/additive.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace mvis {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Closed-form eigenbasis of h = cx sx + cy sy + cz sz (real coefficients),
// in the convention sz = diag(-1,+1), sy = [[0,i],[-i,0]]:
//   h = [[-cz, cx + i cy], [cx - i cy, cz]],  eigenvalues -+rho.
// Column 0 of the returned rotation is the -rho eigenvector, column 1 the
// +rho one; both are phase-fixed (largest-modulus entry real positive).
void local_eigenbasis(double cx, double cy, double cz, double& rho, LocalUnitary& u) {
  rho = std::sqrt(cx * cx + cy * cy + cz * cz);
  if (rho < 1e-300) {  // zero local term: eigenvalue 0 twice, identity rotation
    rho = 0.0;
    u = LocalUnitary::identity();
    return;
  }
  cplx vp0, vp1;  // +rho eigenvector
  if (cz >= 0.0) {
    vp0 = cplx(cx, cy);
    vp1 = cplx(cz + rho, 0.0);
  } else {
    vp0 = cplx(rho - cz, 0.0);
    vp1 = cplx(cx, -cy);
  }
  const double nrm = std::sqrt(std::norm(vp0) + std::norm(vp1));
  vp0 /= nrm;
  vp1 /= nrm;
  // orthogonal complement
  cplx vm0 = -std::conj(vp1), vm1 = std::conj(vp0);
  auto fix = [](cplx& a, cplx& b) {
    const cplx big = (std::abs(a) >= std::abs(b)) ? a : b;
    if (std::abs(big) > 0) {
      const cplx ph = std::abs(big) / big;
      a *= ph;
      b *= ph;
    }
  };
  fix(vp0, vp1);
  fix(vm0, vm1);
  u.u = {vm0, vp0, vm1, vp1};  // columns (v-, v+)
}

}  // namespace

SpectralDecomposition decompose(const AdditiveOperator& a) {
  // Genuine operator hermiticity: every Pauli coefficient real. (The weaker
  // up-to-global-phase notion used to classify VCM eigenvectors is not
  // enough here: applying the phase would silently reflect the spectrum.)
  std::vector<double> c(a.coeffs.size());
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
    if (std::abs(a.coeffs[i].imag()) > 1e-10)
      throw ConfigError("decompose requires a hermitian additive operator ('" + a.label +
                        "' has complex coefficients)");
    c[i] = a.coeffs[i].real();
  }
  SpectralDecomposition dec;
  dec.op = a;
  dec.n_sites = a.n_sites();
  const int n = dec.n_sites;
  dec.site_eigenvalues.resize(n);
  dec.site_rotations.resize(n);
  double bound = 0.0;
  for (int l = 1; l <= n; ++l) {
    double rho;
    LocalUnitary u;
    local_eigenbasis(c[coeff_index(l, Axis::X)], c[coeff_index(l, Axis::Y)],
                     c[coeff_index(l, Axis::Z)], rho, u);
    dec.site_eigenvalues[l - 1] = {-rho, rho};
    dec.site_rotations[l - 1] = u;
    bound += rho;
  }
  dec.norm_bound = bound;

  // Group the 2^N eigenvalue sums. Sums are rounded onto a grid of pitch
  // quantum = 1e-9 * max(1, ||A||) and hashed; adjacent occupied bins closer
  // than the quantum are merged afterwards so boundary straddles cannot
  // split a group.
  const std::uint64_t dim = std::uint64_t(1) << n;
  const double quantum = 1e-9 * std::max(1.0, bound);
  std::vector<double> sums(dim);
  for (std::uint64_t idx = 0; idx < dim; ++idx) {
    double s = 0.0;
    for (int l = 0; l < n; ++l) s += dec.site_eigenvalues[l][(idx >> l) & 1];
    sums[idx] = s;
  }
  std::unordered_map<std::int64_t, std::int32_t> bin_id;
  struct Bin {
    double value_sum = 0.0;
    std::int64_t count = 0;
  };
  std::vector<Bin> bins;
  std::vector<std::int32_t> bin_of_index(dim);
  for (std::uint64_t idx = 0; idx < dim; ++idx) {
    const std::int64_t key = std::llround(sums[idx] / quantum);
    auto [it, inserted] = bin_id.try_emplace(key, static_cast<std::int32_t>(bins.size()));
    if (inserted) bins.push_back({});
    bins[it->second].value_sum += sums[idx];
    bins[it->second].count += 1;
    bin_of_index[idx] = it->second;
  }
  // order bins by representative value, merge near-coincident neighbors
  std::vector<int> order(bins.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return bins[x].value_sum / bins[x].count < bins[y].value_sum / bins[y].count;
  });
  std::vector<std::int32_t> bin_to_group(bins.size());
  double prev_rep = 0.0;
  std::int32_t gid = -1;
  for (int b : order) {
    const double rep = bins[b].value_sum / bins[b].count;
    if (gid < 0 || rep - prev_rep > quantum) {
      ++gid;
      dec.group_values.push_back(0.0);
      dec.group_counts.push_back(0);
    }
    bin_to_group[b] = gid;
    dec.group_values[gid] += bins[b].value_sum;
    dec.group_counts[gid] += bins[b].count;
    prev_rep = rep;
  }
  for (std::size_t g = 0; g < dec.group_values.size(); ++g)
    dec.group_values[g] /= double(dec.group_counts[g]);
  dec.group_of_index.resize(dim);
  for (std::uint64_t idx = 0; idx < dim; ++idx)
    dec.group_of_index[idx] = bin_to_group[bin_of_index[idx]];
  return dec;
}

std::vector<cplx> to_eigenframe(const StateVector& state, const SpectralDecomposition& dec) {
  if (state.n_qubits() != dec.n_sites) throw ConfigError("state/decomposition size mismatch");
  std::vector<cplx> amps = state.amps();
  for (int l = 1; l <= dec.n_sites; ++l)
    apply_local_unitary_inplace(amps, dec.n_sites, l, dec.site_rotations[l - 1].dagger());
  return amps;
}

StateVector from_eigenframe(std::vector<cplx> amps, const SpectralDecomposition& dec) {
  for (int l = 1; l <= dec.n_sites; ++l)
    apply_local_unitary_inplace(amps, dec.n_sites, l, dec.site_rotations[l - 1]);
  return StateVector(dec.n_sites, std::move(amps), NormPolicy::Raw);
}

StateVector project_group(const StateVector& state, const SpectralDecomposition& dec, int gid) {
  if (gid < 0 || gid >= dec.n_groups()) throw ConfigError("invalid group id");
  std::vector<cplx> amps = to_eigenframe(state, dec);
  for (std::uint64_t idx = 0; idx < amps.size(); ++idx)
    if (dec.group_of_index[idx] != gid) amps[idx] = cplx(0.0, 0.0);
  return from_eigenframe(std::move(amps), dec);
}

std::vector<double> group_weights(const StateVector& state, const SpectralDecomposition& dec) {
  const std::vector<cplx> amps = to_eigenframe(state, dec);
  std::vector<long double> acc(dec.n_groups(), 0.0L);
  for (std::uint64_t idx = 0; idx < amps.size(); ++idx)
    acc[dec.group_of_index[idx]] += std::norm(amps[idx]);
  std::vector<double> q(dec.n_groups());
  for (int g = 0; g < dec.n_groups(); ++g) q[g] = static_cast<double>(acc[g]);
  return q;
}

CoarseGrainConfig CoarseGrainConfig::delta() {
  CoarseGrainConfig c;
  c.mode = Mode::Delta;
  c.W = 0.0;
  return c;
}

CoarseGrainConfig CoarseGrainConfig::gaussian(double W, double spectrum_min,
                                              double spectrum_max) {
  if (W <= 0.0) throw ConfigError("coarse-graining width W must be > 0");
  CoarseGrainConfig c;
  c.mode = Mode::Gaussian;
  c.W = W;
  c.grid_step = W / 8.0;
  c.grid_min = spectrum_min - 5.0 * W;
  c.grid_max = spectrum_max + 5.0 * W;
  // land exactly on an integer number of steps
  const int steps = static_cast<int>(std::ceil((c.grid_max - c.grid_min) / c.grid_step));
  c.grid_max = c.grid_min + steps * c.grid_step;
  return c;
}

void CoarseGrainConfig::validate(double spectrum_min, double spectrum_max) const {
  if (mode == Mode::Delta) return;
  if (W <= 0.0) throw ConfigError("coarse-graining width W must be > 0");
  if (grid_step <= 0.0 || grid_step > W / 4.0 + 1e-15)
    throw ConfigError("grid too coarse: step must be <= W/4");
  if (grid_min > spectrum_min - 5.0 * W + 1e-12 || grid_max < spectrum_max + 5.0 * W - 1e-12)
    throw ConfigError("grid must cover [spectrum_min - 5W, spectrum_max + 5W]");
}

int CoarseGrainConfig::n_points() const {
  if (mode == Mode::Delta) return 0;
  return static_cast<int>(std::floor((grid_max - grid_min) / grid_step + 0.5)) + 1;
}

double gaussian_kernel(double x, double w) {
  return std::exp(-x * x / (2.0 * w * w)) / (std::sqrt(kTwoPi) * w);
}

Density density(const StateVector& state, const SpectralDecomposition& dec,
                const CoarseGrainConfig& cfg) {
  Density d;
  d.mode = cfg.mode;
  d.group_values = dec.group_values;
  d.weights = group_weights(state, dec);
  if (cfg.mode == CoarseGrainConfig::Mode::Delta) return d;

  cfg.validate(dec.group_values.front(), dec.group_values.back());
  d.cfg = cfg;
  const int np = cfg.n_points();
  d.samples.assign(np, 0.0);
  for (int i = 0; i < np; ++i) {
    const double x = cfg.point(i);
    double v = 0.0;
    for (int g = 0; g < dec.n_groups(); ++g)
      v += d.weights[g] * gaussian_kernel(x - dec.group_values[g], cfg.W);
    d.samples[i] = v;
  }
  long double integral = 0.0L;
  for (int i = 0; i < np; ++i) {
    const double w = (i == 0 || i == np - 1) ? 0.5 : 1.0;
    integral += w * d.samples[i];
  }
  d.integral = static_cast<double>(integral) * cfg.grid_step;
  return d;
}

}  // namespace mvis
