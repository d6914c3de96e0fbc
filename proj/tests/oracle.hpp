// Dense-matrix oracle used by the tests. Everything here goes through
// explicit 2^N x 2^N matrices built with Kronecker products, independent of
// the bit-level paths in the library.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "mvis/additive.hpp"
#include "mvis/models.hpp"
#include "mvis/vcm.hpp"
#include "mvis/xi.hpp"

namespace oracle {

using mvis::cplx;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Pauli matrices in the library's convention: sz|0> = -|0>, sz|1> = +|1>.
inline Mat pauli(mvis::Axis ax) {
  Mat m(2, 2);
  switch (ax) {
    case mvis::Axis::X: m << 0, 1, 1, 0; break;
    case mvis::Axis::Y: m << 0, cplx(0, 1), cplx(0, -1), 0; break;
    case mvis::Axis::Z: m << -1, 0, 0, 1; break;
  }
  return m;
}

// Site 1 = least significant bit = last Kronecker factor.
inline Mat site_op(int n, int site, const Mat& m) {
  Mat out = Mat::Identity(1, 1);
  for (int s = n; s >= 1; --s) out = kron(out, s == site ? m : Mat::Identity(2, 2));
  return out;
}

inline Mat additive_matrix(const mvis::AdditiveOperator& a) {
  const int n = a.n_sites();
  const int dim = 1 << n;
  Mat out = Mat::Zero(dim, dim);
  for (int l = 1; l <= n; ++l)
    for (int ax = 0; ax < 3; ++ax) {
      const cplx c = a.coeff(l, static_cast<mvis::Axis>(ax));
      if (c != cplx(0, 0)) out += c * site_op(n, l, pauli(static_cast<mvis::Axis>(ax)));
    }
  return out;
}

inline Vec state_vec(const mvis::StateVector& s) {
  Vec v(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) v(i) = s.amp(i);
  return v;
}

inline Mat dense_vcm(const mvis::StateVector& s) {
  const int n = s.n_qubits();
  const Vec psi = state_vec(s);
  std::vector<Mat> sig(3 * n);
  std::vector<cplx> mean(3 * n);
  for (int l = 1; l <= n; ++l)
    for (int ax = 0; ax < 3; ++ax) {
      const int r = mvis::coeff_index(l, static_cast<mvis::Axis>(ax));
      sig[r] = site_op(n, l, pauli(static_cast<mvis::Axis>(ax)));
      mean[r] = psi.dot(sig[r] * psi);
    }
  Mat v(3 * n, 3 * n);
  for (int r = 0; r < 3 * n; ++r)
    for (int c = 0; c < 3 * n; ++c)
      v(r, c) = psi.dot(sig[r] * (sig[c] * psi)) - mean[r] * mean[c];
  return v;
}

// Spectral projectors built densely from the tensor products of the local
// eigenvectors (columns of the site rotations), one per eigenvalue group.
inline std::vector<Mat> dense_projectors(const mvis::SpectralDecomposition& dec) {
  const int n = dec.n_sites;
  const int dim = 1 << n;
  Mat ufull = Mat::Identity(1, 1);
  for (int s = n; s >= 1; --s) {
    Mat u(2, 2);
    const auto& lu = dec.site_rotations[s - 1].u;
    u << lu[0], lu[1], lu[2], lu[3];
    ufull = kron(ufull, u);
  }
  std::vector<Mat> projs(dec.n_groups(), Mat::Zero(dim, dim));
  for (int g = 0; g < dec.n_groups(); ++g) {
    Mat mask = Mat::Zero(dim, dim);
    for (int idx = 0; idx < dim; ++idx)
      if (dec.group_of_index[idx] == g) mask(idx, idx) = 1.0;
    projs[g] = ufull * mask * ufull.adjoint();
  }
  return projs;
}

// Re <psi| P_A P_B |psi> over all group pairs.
inline Eigen::MatrixXd dense_kernel2(const mvis::StateVector& s,
                                     const mvis::SpectralDecomposition& da,
                                     const mvis::SpectralDecomposition& db) {
  const Vec psi = state_vec(s);
  const auto pa = dense_projectors(da);
  const auto pb = dense_projectors(db);
  Eigen::MatrixXd k(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i)
    for (std::size_t j = 0; j < pb.size(); ++j)
      k(i, j) = psi.dot(pa[i] * (pb[j] * psi)).real();
  return k;
}

// (1/3!) sum over all six permutations. Each ordered term is the dense
// contraction <P_i psi | P_j | P_k psi>; the projected vectors are stacked
// into matrices once per ordering so N=6 stays fast.
inline std::vector<double> dense_kernel3(const mvis::StateVector& s,
                                         const mvis::SpectralDecomposition& d1,
                                         const mvis::SpectralDecomposition& d2,
                                         const mvis::SpectralDecomposition& d3) {
  const Vec psi = state_vec(s);
  const std::vector<Mat> projs[3] = {dense_projectors(d1), dense_projectors(d2),
                                     dense_projectors(d3)};
  const int g[3] = {int(projs[0].size()), int(projs[1].size()), int(projs[2].size())};
  const int dim = int(psi.size());
  Mat stacked[3];
  for (int o = 0; o < 3; ++o) {
    stacked[o].resize(dim, g[o]);
    for (int i = 0; i < g[o]; ++i) stacked[o].col(i) = projs[o][i] * psi;
  }
  std::vector<double> out(std::size_t(g[0]) * g[1] * g[2], 0.0);
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (const auto& p : perms) {
    // T[a_{p0}, a_{p1}, a_{p2}] = <psi| P_{p0} P_{p1} P_{p2} |psi>
    for (int mid = 0; mid < g[p[1]]; ++mid) {
      const Mat t = stacked[p[0]].adjoint() * (projs[p[1]][mid] * stacked[p[2]]);
      for (int first = 0; first < g[p[0]]; ++first)
        for (int last = 0; last < g[p[2]]; ++last) {
          int ids[3];
          ids[p[0]] = first;
          ids[p[1]] = mid;
          ids[p[2]] = last;
          out[(std::size_t(ids[0]) * g[1] + ids[1]) * g[2] + ids[2]] +=
              t(first, last).real() / 6.0;
        }
    }
  }
  return out;
}

inline Mat dense_hamiltonian(mvis::HamiltonianKind kind, const mvis::LatticeGraph& g) {
  const int n = g.n_sites;
  const int dim = 1 << n;
  Mat h = Mat::Zero(dim, dim);
  const double sign = (kind == mvis::HamiltonianKind::XY) ? -1.0 : 1.0;
  for (auto [a, b] : g.edges) {
    h += sign * site_op(n, a, pauli(mvis::Axis::X)) * site_op(n, b, pauli(mvis::Axis::X));
    h += sign * site_op(n, a, pauli(mvis::Axis::Y)) * site_op(n, b, pauli(mvis::Axis::Y));
    if (kind == mvis::HamiltonianKind::Heisenberg)
      h += site_op(n, a, pauli(mvis::Axis::Z)) * site_op(n, b, pauli(mvis::Axis::Z));
  }
  return h;
}

// Independent quadrature of the negative part on an explicit grid: direct
// per-point Gaussian sums, no separable factorization.
inline double dense_negative_integral(const mvis::DiscreteKernel& k, double W,
                                      const mvis::GridAxis& ga, const mvis::GridAxis& gb) {
  long double acc = 0.0L;
  for (int i = 0; i < ga.n; ++i) {
    const double wi = (i == 0 || i + 1 == ga.n) ? 0.5 : 1.0;
    for (int j = 0; j < gb.n; ++j) {
      const double wj = (j == 0 || j + 1 == gb.n) ? 0.5 : 1.0;
      long double v = 0.0L;
      for (std::size_t p = 0; p < k.axes[0].size(); ++p)
        for (std::size_t q = 0; q < k.axes[1].size(); ++q)
          v += k.values[p * k.axes[1].size() + q] *
               mvis::gaussian_kernel(ga.point(i) - k.axes[0][p], W) *
               mvis::gaussian_kernel(gb.point(j) - k.axes[1][q], W);
      if (v < 0.0L) acc += wi * wj * v;
    }
  }
  return double(acc) * ga.step * gb.step;
}

// Deterministic random states and operators for property tests.
inline mvis::StateVector random_state(int n, std::uint64_t seed) {
  mvis::NormalSampler rng(seed);
  std::vector<cplx> amps(std::size_t(1) << n);
  for (auto& a : amps) a = rng.complex_normal();
  return mvis::StateVector(n, std::move(amps), mvis::NormPolicy::Normalize);
}

inline mvis::AdditiveOperator random_hermitian_op(int n, std::uint64_t seed) {
  mvis::NormalSampler rng(seed);
  mvis::AdditiveOperator a;
  a.coeffs.resize(3 * n);
  for (auto& c : a.coeffs) c = cplx(rng(), 0.0);
  // scale to the sum |c|^2 = N convention
  const double s = std::sqrt(double(n) / mvis::norm_sq(a.coeffs));
  for (auto& c : a.coeffs) c *= s;
  a.label = "R";
  a.hermitian = true;
  return a;
}

}  // namespace oracle
