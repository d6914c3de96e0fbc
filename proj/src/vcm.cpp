#include "mvis/vcm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mvis {

namespace {

// Global phase that makes the largest-modulus entry real positive.
// Ties (same modulus within 1e-12) resolve to the lowest index.
cplx canonical_phase(const std::vector<cplx>& c) {
  double best = -1.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double m = std::abs(c[i]);
    if (m > best * (1.0 + 1e-12)) {
      best = m;
      arg = i;
    }
  }
  if (best <= 0.0) return {1.0, 0.0};
  return std::abs(c[arg]) / c[arg];
}

}  // namespace

bool AdditiveOperator::coeffs_hermitian(const std::vector<cplx>& c) {
  const cplx ph = canonical_phase(c);
  double max_im = 0.0;
  for (const cplx& v : c) max_im = std::max(max_im, std::abs((ph * v).imag()));
  return max_im <= 1e-10;
}

AdditiveOperator uniform_op(Axis axis, int n_sites, const std::string& label) {
  AdditiveOperator a;
  a.coeffs.assign(3 * n_sites, cplx(0.0, 0.0));
  for (int l = 1; l <= n_sites; ++l) a.coeffs[coeff_index(l, axis)] = 1.0;
  a.label = label.empty() ? (std::string("M") + axis_name(axis)) : label;
  a.hermitian = true;
  return a;
}

AdditiveOperator staggered_op(Axis axis, const std::vector<int>& signs,
                              const std::string& label) {
  AdditiveOperator a;
  const int n = static_cast<int>(signs.size());
  a.coeffs.assign(3 * n, cplx(0.0, 0.0));
  for (int l = 1; l <= n; ++l) a.coeffs[coeff_index(l, axis)] = double(signs[l - 1]);
  a.label = label.empty() ? (std::string("M") + axis_name(axis) + "_st") : label;
  a.hermitian = true;
  return a;
}

AdditiveOperator staggered_op(Axis axis, int n_sites) {
  std::vector<int> signs(n_sites);
  for (int l = 1; l <= n_sites; ++l) signs[l - 1] = (l % 2 == 0) ? 1 : -1;
  return staggered_op(axis, signs);
}

AdditiveOperator diag_xz_op(int n_sites) {
  AdditiveOperator a;
  a.coeffs.assign(3 * n_sites, cplx(0.0, 0.0));
  const double w = 1.0 / std::sqrt(2.0);
  for (int l = 1; l <= n_sites; ++l) {
    a.coeffs[coeff_index(l, Axis::X)] = -w;
    a.coeffs[coeff_index(l, Axis::Z)] = w;
  }
  a.label = "Mx-z";
  a.hermitian = true;
  return a;
}

AdditiveOperator shor_reg1_x_op(const ShorLayout& lay) {
  const int n = lay.total_qubits();
  AdditiveOperator a;
  a.coeffs.assign(3 * n, cplx(0.0, 0.0));
  const double w = std::sqrt(double(n) / double(lay.N1 - 1));
  for (int l = 2; l <= lay.N1; ++l) a.coeffs[coeff_index(l, Axis::X)] = w;
  a.label = "Mx_reg1";
  a.hermitian = true;
  return a;
}

AdditiveOperator shor_reg1_y_staggered_op(const ShorLayout& lay) {
  const int n = lay.total_qubits();
  AdditiveOperator a;
  a.coeffs.assign(3 * n, cplx(0.0, 0.0));
  const double w = std::sqrt(double(n) / double(lay.N1 - 1));
  for (int l = 2; l <= lay.N1; ++l)
    a.coeffs[coeff_index(l, Axis::Y)] = ((l % 2 == 0) ? 1.0 : -1.0) * w;  // (-1)^l
  a.label = "My_st_reg1";
  a.hermitian = true;
  return a;
}

StateVector additive_apply(const AdditiveOperator& a, const StateVector& psi) {
  if (a.n_sites() != psi.n_qubits()) throw ConfigError("operator/state size mismatch");
  std::vector<cplx> out(psi.dim(), cplx(0.0, 0.0));
  for (int l = 1; l <= a.n_sites(); ++l) {
    for (int ax = 0; ax < 3; ++ax) {
      const cplx c = a.coeffs[coeff_index(l, static_cast<Axis>(ax))];
      if (c == cplx(0.0, 0.0)) continue;
      const StateVector t = sigma_apply(psi, static_cast<Axis>(ax), l);
      const auto& ta = t.amps();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * ta[i];
    }
  }
  return StateVector(psi.n_qubits(), std::move(out), NormPolicy::Raw);
}

Vcm compute_vcm(const StateVector& state, int threads) {
  const int n = state.n_qubits();
  const int d = 3 * n;
  Vcm v;
  v.n_sites = n;
  v.entries.resize(d, d);

  // First moments <sigma_alpha(l)>
  std::vector<double> mean(d);
  parallel_for(d, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      const int site = static_cast<int>(r) / 3 + 1;
      const Axis ax = static_cast<Axis>(r % 3);
      mean[r] = pauli_expectation(state, ax, site);
    }
  });

  // Upper triangle of second moments, each entry one bit-level pass.
  parallel_for(d, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      const int l = static_cast<int>(r) / 3 + 1;
      const Axis a = static_cast<Axis>(r % 3);
      for (std::size_t c = r; c < static_cast<std::size_t>(d); ++c) {
        const int lp = static_cast<int>(c) / 3 + 1;
        const Axis b = static_cast<Axis>(c % 3);
        const cplx m2 = pauli_pair_expectation(state, a, l, b, lp);
        v.entries(r, c) = m2 - mean[r] * mean[c];
      }
    }
  });
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < r; ++c) v.entries(r, c) = std::conj(v.entries(c, r));

  // Symmetrize; the pre-symmetrization deviation is kept for diagnostics.
  const Eigen::MatrixXcd defect = v.entries - v.entries.adjoint();
  v.hermiticity_defect = defect.cwiseAbs().maxCoeff();
  v.entries = 0.5 * (v.entries + v.entries.adjoint()).eval();
  return v;
}

VcmSpectrum spectrum(const Vcm& v) {
  const int d = 3 * v.n_sites;
  if (v.entries.rows() != d || v.entries.cols() != d) throw ConfigError("malformed VCM");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(v.entries);
  if (solver.info() != Eigen::Success) throw NumericalError("VCM eigensolver failed");

  VcmSpectrum s;
  s.n_sites = v.n_sites;
  s.eigenvalues.resize(d);
  s.eigenvectors.resize(d, d);
  const double scale = std::sqrt(double(v.n_sites));  // sum |c|^2 = N
  for (int i = 0; i < d; ++i) {
    const int src = d - 1 - i;  // Eigen sorts ascending
    s.eigenvalues[i] = solver.eigenvalues()(src);
    s.eigenvectors.col(i) = solver.eigenvectors().col(src) * scale;
  }
  double max_res = 0.0;
  for (int i = 0; i < d; ++i) {
    const double res =
        (v.entries * s.eigenvectors.col(i) - s.eigenvalues[i] * s.eigenvectors.col(i)).norm();
    max_res = std::max(max_res, res);
  }
  s.max_residual = max_res;
  if (max_res > 1e-8 * v.n_sites)
    throw NumericalError("VCM eigenpair residual " + format_double(max_res) + " too large");
  return s;
}

double operator_variance(const Vcm& v, const AdditiveOperator& a) {
  const int d = 3 * v.n_sites;
  if (static_cast<int>(a.coeffs.size()) != d)
    throw ConfigError("operator dimension does not match the VCM");
  Eigen::VectorXcd c(d);
  for (int i = 0; i < d; ++i) c(i) = a.coeffs[i];
  return (c.adjoint() * v.entries * c)(0).real();
}

double operator_variance_direct(const StateVector& state, const AdditiveOperator& a) {
  const StateVector phi = additive_apply(a, state);
  const cplx m = state_inner(state, phi);  // <A>
  return norm_sq(phi.amps()) - std::norm(m);
}

double macroscopic_component_weight(const AdditiveOperator& a, const VcmSpectrum& spec,
                                    double gamma) {
  const int d = 3 * spec.n_sites;
  if (static_cast<int>(a.coeffs.size()) != d) throw ConfigError("operator/spectrum mismatch");
  Eigen::VectorXcd c(d);
  for (int i = 0; i < d; ++i) c(i) = a.coeffs[i];
  if (c.norm() < 1e-14) throw ConfigError("zero operator has no component weight");
  const double threshold = gamma * spec.n_sites;
  double macro = 0.0, total = 0.0;
  for (int i = 0; i < d; ++i) {
    // eigenvectors carry sum|c|^2=N; the N factors cancel in the ratio
    const double xi2 = std::norm(spec.eigenvectors.col(i).dot(c)) / double(spec.n_sites);
    total += xi2;
    if (spec.eigenvalues[i] >= threshold) macro += xi2;
  }
  if (total <= 0.0) throw ConfigError("zero operator has no component weight");
  return macro / total;
}

PEstimate estimate_p_from_points(const std::vector<int>& sizes, const std::vector<double>& e1s,
                                 double epsilon) {
  if (sizes.size() < 3) throw ConfigError("estimate_p needs at least 3 sizes");
  if (sizes.size() != e1s.size()) throw ConfigError("sizes/e1s length mismatch");
  const std::size_t m = sizes.size();
  std::vector<double> xs(m), ys(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (e1s[i] <= 0.0) throw NumericalError("e1 must be positive for the log-log fit");
    xs[i] = std::log(double(sizes[i]));
    ys[i] = std::log(e1s[i]);
  }
  const double xbar = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
  const double ybar = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  const double slope = sxy / sxx;
  const double intercept = ybar - slope * xbar;
  double ssr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ssr += r * r;
  }
  PEstimate p;
  p.sizes = sizes;
  p.e1s = e1s;
  p.p_raw = 1.0 + slope;
  p.p = std::clamp(p.p_raw, 1.0, 2.0);
  p.slope_stderr = (m > 2) ? std::sqrt(ssr / double(m - 2) / sxx) : 0.0;
  p.epsilon = epsilon;
  p.classified_p2 = (p.p_raw >= 2.0 - epsilon);
  return p;
}

PEstimate estimate_p(const std::function<StateVector(int)>& family_builder,
                     const std::vector<int>& sizes, double epsilon, int threads) {
  if (sizes.size() < 3) throw ConfigError("estimate_p needs at least 3 sizes");
  std::vector<double> e1s;
  e1s.reserve(sizes.size());
  for (int n : sizes) {
    const StateVector psi = family_builder(n);
    const VcmSpectrum s = spectrum(compute_vcm(psi, threads));
    e1s.push_back(s.eigenvalues.front());
  }
  return estimate_p_from_points(sizes, e1s, epsilon);
}

// ---------------------------------------------------------------------------
// S-set extraction

std::vector<Pattern> make_pattern_dictionary(int n_sites, const std::vector<int>& stagger_signs,
                                             const std::optional<ShorLayout>& shor) {
  std::vector<int> signs = stagger_signs;
  if (signs.empty()) {
    signs.resize(n_sites);
    for (int l = 1; l <= n_sites; ++l) signs[l - 1] = (l % 2 == 0) ? 1 : -1;
  }
  std::vector<Pattern> dict;
  for (int ax = 0; ax < 3; ++ax) {
    const Axis axis = static_cast<Axis>(ax);
    Pattern u;
    u.name = std::string("M") + axis_name(axis);
    u.coeffs = uniform_op(axis, n_sites).coeffs;
    u.idealized_per_site = 1.0;
    dict.push_back(std::move(u));
    Pattern st;
    st.name = std::string("M") + axis_name(axis) + "_st";
    st.coeffs = staggered_op(axis, signs).coeffs;
    st.idealized_per_site = 1.0;
    dict.push_back(std::move(st));
  }
  if (shor) {
    Pattern px;
    px.name = "Mx_reg1";
    px.coeffs = shor_reg1_x_op(*shor).coeffs;
    px.idealized_per_site = std::sqrt(1.5);
    dict.push_back(std::move(px));
    Pattern py;
    py.name = "My_st_reg1";
    py.coeffs = shor_reg1_y_staggered_op(*shor).coeffs;
    py.idealized_per_site = std::sqrt(1.5);
    dict.push_back(std::move(py));
    // the same restricted supports on the remaining axes, for completeness
    for (int ax = 0; ax < 3; ++ax) {
      const Axis axis = static_cast<Axis>(ax);
      if (axis != Axis::X) {
        Pattern p;
        p.name = std::string("M") + axis_name(axis) + "_reg1";
        p.coeffs.assign(3 * n_sites, cplx(0.0, 0.0));
        const double w = std::sqrt(double(n_sites) / double(shor->N1 - 1));
        for (int l = 2; l <= shor->N1; ++l) p.coeffs[coeff_index(l, axis)] = w;
        p.idealized_per_site = std::sqrt(1.5);
        dict.push_back(std::move(p));
      }
      if (axis != Axis::Y) {
        Pattern p;
        p.name = std::string("M") + axis_name(axis) + "_st_reg1";
        p.coeffs.assign(3 * n_sites, cplx(0.0, 0.0));
        const double w = std::sqrt(double(n_sites) / double(shor->N1 - 1));
        for (int l = 2; l <= shor->N1; ++l)
          p.coeffs[coeff_index(l, axis)] = ((l % 2 == 0) ? 1.0 : -1.0) * w;
        p.idealized_per_site = std::sqrt(1.5);
        dict.push_back(std::move(p));
      }
    }
  }
  return dict;
}

namespace {

// Residual gauge after phase fixing is an overall sign; choose it from the
// axis sums so that, e.g., the x-z diagonal vector comes out with positive z.
void canonical_sign(Eigen::VectorXcd& v, int n_sites) {
  const Axis order[3] = {Axis::Z, Axis::Y, Axis::X};
  for (Axis ax : order) {
    double s = 0.0;
    for (int l = 1; l <= n_sites; ++l) s += v(coeff_index(l, ax)).real();
    if (std::abs(s) > 1e-8) {
      if (s < 0) v = -v;
      return;
    }
  }
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-8) {
      if (v(i).real() < 0) v = -v;
      return;
    }
  }
}

void phase_fix(Eigen::VectorXcd& v, int n_sites) {
  std::vector<cplx> tmp(v.data(), v.data() + v.size());
  const cplx ph = canonical_phase(tmp);
  v *= ph;
  canonical_sign(v, n_sites);
}

}  // namespace

SetExtraction extract_S(const VcmSpectrum& spec, double gamma,
                        const std::vector<Pattern>& dictionary, double gamma_rel) {
  const int n = spec.n_sites;
  const int d = 3 * n;
  SetExtraction out;
  out.gamma = gamma;

  // 1. select macroscopically large eigenvalues
  const double cut = std::max(gamma * n, gamma_rel * spec.eigenvalues.front());
  std::vector<int> selected;
  for (int i = 0; i < d; ++i)
    if (spec.eigenvalues[i] >= cut) selected.push_back(i);
  if (selected.empty()) {
    out.p2_candidate = false;
    return out;
  }

  // 2. cluster into degenerate blocks (eigenvalues are sorted descending)
  std::vector<std::vector<int>> blocks;
  for (int idx : selected) {
    if (!blocks.empty()) {
      const double prev = spec.eigenvalues[blocks.back().back()];
      if (prev - spec.eigenvalues[idx] < 1e-6 * std::max(prev, 1e-300)) {
        blocks.back().push_back(idx);
        continue;
      }
    }
    blocks.push_back({idx});
  }
  out.n_blocks = static_cast<int>(blocks.size());

  auto variance_of = [&](const Eigen::VectorXcd& c) {
    // c^dag V c = sum_i e_i |<u_i, c>|^2 with unit eigenvectors u_i
    double var = 0.0;
    for (int i = 0; i < d; ++i) {
      const cplx ov = spec.eigenvectors.col(i).dot(c) / std::sqrt(double(n));
      var += spec.eigenvalues[i] * std::norm(ov);
    }
    return var;
  };

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& block = blocks[b];
    const int dim = static_cast<int>(block.size());
    const double block_eig = spec.eigenvalues[block.front()];

    // Orthonormal basis of the block span (unit normalization).
    Eigen::MatrixXcd Q(d, dim);
    for (int j = 0; j < dim; ++j)
      Q.col(j) = spec.eigenvectors.col(block[j]) / std::sqrt(double(n));

    // 3. project dictionary patterns onto the span
    struct Hit {
      double overlap;
      const Pattern* pat;
    };
    std::vector<Hit> hits;
    for (const Pattern& pat : dictionary) {
      Eigen::VectorXcd q(d);
      for (int i = 0; i < d; ++i) q(i) = pat.coeffs[i];
      q /= q.norm();
      const double ov = (Q.adjoint() * q).squaredNorm();
      if (ov >= 0.98) hits.push_back({ov, &pat});
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const Hit& a, const Hit& b) { return a.overlap > b.overlap; });

    std::vector<Eigen::VectorXcd> chosen;        // unit vectors emitted for this block
    std::vector<const Pattern*> chosen_pattern;  // parallel; nullptr for raw
    std::vector<double> chosen_overlap;
    for (const Hit& h : hits) {
      if (static_cast<int>(chosen.size()) >= dim) break;
      Eigen::VectorXcd q(d);
      for (int i = 0; i < d; ++i) q(i) = h.pat->coeffs[i];
      q /= q.norm();
      // keep patterns mutually orthogonal inside the block
      Eigen::VectorXcd r = q;
      for (const auto& c : chosen) r -= c.dot(r) * c;
      if (r.norm() < 1e-3) continue;  // linearly dependent with an accepted pattern
      chosen.push_back(q);            // the pattern itself, not its orthogonalization
      chosen_pattern.push_back(h.pat);
      chosen_overlap.push_back(h.overlap);
    }

    // 4. fill the remaining span directions with phase-fixed raw vectors
    if (static_cast<int>(chosen.size()) < dim) {
      for (int j = 0; j < dim && static_cast<int>(chosen.size()) < dim; ++j) {
        Eigen::VectorXcd r = Q.col(j);
        for (const auto& c : chosen) r -= c.dot(r) * c;
        const double nr = r.norm();
        if (nr < 1e-6) continue;
        r /= nr;
        phase_fix(r, n);
        chosen.push_back(r);
        chosen_pattern.push_back(nullptr);
        chosen_overlap.push_back(0.0);
      }
    }

    // 5. hermitian check / re-im split, then emit
    for (std::size_t j = 0; j < chosen.size(); ++j) {
      const Eigen::VectorXcd scaled = chosen[j] * std::sqrt(double(n));
      std::vector<cplx> coeffs(scaled.data(), scaled.data() + d);
      const bool herm = AdditiveOperator::coeffs_hermitian(coeffs);
      if (herm) {
        // strip the numerically irrelevant imaginary dust after phase fixing
        AdditiveOperator op;
        op.coeffs = std::move(coeffs);
        const cplx ph = canonical_phase(op.coeffs);
        for (auto& c : op.coeffs) c = cplx((ph * c).real(), 0.0);
        op.hermitian = true;
        op.label = chosen_pattern[j] ? chosen_pattern[j]->name
                                     : ("A" + std::to_string(out.members.size() + 1));
        ExtractedOperator m;
        m.eigenvalue = block_eig;
        m.block = static_cast<int>(b);
        m.pattern = chosen_pattern[j] ? chosen_pattern[j]->name : "";
        m.pattern_overlap = chosen_overlap[j];
        Eigen::VectorXcd cv(d);
        for (int i = 0; i < d; ++i) cv(i) = op.coeffs[i];
        m.variance = variance_of(cv);
        m.op = std::move(op);
        out.members.push_back(std::move(m));
      } else {
        // A = A_re + i A_im with A_re = (A + A^dag)/2, A_im = (A - A^dag)/2i;
        // on Pauli coefficients that is the entrywise real and imaginary part
        const std::string base = "A" + std::to_string(out.members.size() + 1);
        for (int part = 0; part < 2; ++part) {
          Eigen::VectorXcd pc(d);
          for (int i = 0; i < d; ++i)
            pc(i) = (part == 0) ? cplx(scaled(i).real(), 0.0) : cplx(scaled(i).imag(), 0.0);
          const double pn = pc.norm();
          if (pn < 1e-12) continue;
          const double var = variance_of(pc);
          // threshold applies to the unrenormalized part of a sum|c|^2=N vector
          if (var < gamma * double(n) * double(n) / 4.0) continue;
          pc *= std::sqrt(double(n)) / pn;  // back to the S-member convention
          canonical_sign(pc, n);
          AdditiveOperator op;
          op.coeffs.assign(pc.data(), pc.data() + d);
          op.hermitian = true;
          op.label = base + (part == 0 ? "_re" : "_im");
          ExtractedOperator m;
          m.eigenvalue = block_eig;
          m.block = static_cast<int>(b);
          m.pattern = "";
          m.pattern_overlap = 0.0;
          m.variance = variance_of(pc);
          m.from_split = true;
          m.op = std::move(op);
          out.members.push_back(std::move(m));
        }
      }
    }
  }
  return out;
}

double subspace_overlap(const std::vector<std::vector<cplx>>& a,
                        const std::vector<std::vector<cplx>>& b) {
  if (a.empty() || b.empty()) throw ConfigError("subspace_overlap: empty subspace");
  const int d = static_cast<int>(a.front().size());
  auto orthobasis = [d](const std::vector<std::vector<cplx>>& v) {
    Eigen::MatrixXcd M(d, v.size());
    for (std::size_t j = 0; j < v.size(); ++j)
      for (int i = 0; i < d; ++i) M(i, j) = v[j][i];
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(M);
    Eigen::MatrixXcd Qfull = qr.householderQ();
    return Eigen::MatrixXcd(Qfull.leftCols(v.size()));
  };
  const Eigen::MatrixXcd Qa = orthobasis(a);
  const Eigen::MatrixXcd Qb = orthobasis(b);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Qa.adjoint() * Qb);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  return smin * smin;
}

}  // namespace mvis
