#include "mvis/xi.hpp"

#include <algorithm>
#include <cmath>

namespace mvis {

double DiscreteKernel::sum() const {
  long double s = 0.0L;
  for (double v : values) s += v;
  return static_cast<double>(s);
}

double DiscreteKernel::min_value() const {
  return *std::min_element(values.begin(), values.end());
}

std::vector<double> DiscreteKernel::marginal(int keep) const {
  std::vector<long double> acc(axes[keep].size(), 0.0L);
  if (m == 2) {
    const std::size_t g0 = axes[0].size(), g1 = axes[1].size();
    for (std::size_t i = 0; i < g0; ++i)
      for (std::size_t j = 0; j < g1; ++j) acc[keep == 0 ? i : j] += at(int(i), int(j));
  } else {
    const std::size_t g0 = axes[0].size(), g1 = axes[1].size(), g2 = axes[2].size();
    for (std::size_t i = 0; i < g0; ++i)
      for (std::size_t j = 0; j < g1; ++j)
        for (std::size_t k = 0; k < g2; ++k)
          acc[keep == 0 ? i : (keep == 1 ? j : k)] += at(int(i), int(j), int(k));
  }
  std::vector<double> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<double>(acc[i]);
  return out;
}

DiscreteKernel DiscreteKernel::marginal_pair(int keep_a, int keep_b) const {
  if (m != 3) throw ConfigError("marginal_pair needs a 3-operator kernel");
  DiscreteKernel out;
  out.m = 2;
  out.labels = {labels[keep_a], labels[keep_b]};
  out.axes = {axes[keep_a], axes[keep_b]};
  out.values.assign(axes[keep_a].size() * axes[keep_b].size(), 0.0);
  const int g0 = int(axes[0].size()), g1 = int(axes[1].size()), g2 = int(axes[2].size());
  for (int i = 0; i < g0; ++i)
    for (int j = 0; j < g1; ++j)
      for (int k = 0; k < g2; ++k) {
        const int ids[3] = {i, j, k};
        out.values[std::size_t(ids[keep_a]) * axes[keep_b].size() + ids[keep_b]] +=
            at(i, j, k);
      }
  return out;
}

DiscreteKernel DiscreteKernel::transposed() const {
  if (m != 2) throw ConfigError("transposed needs a 2-operator kernel");
  DiscreteKernel out;
  out.m = 2;
  out.labels = {labels[1], labels[0]};
  out.axes = {axes[1], axes[0]};
  out.values.resize(values.size());
  const std::size_t g0 = axes[0].size(), g1 = axes[1].size();
  for (std::size_t i = 0; i < g0; ++i)
    for (std::size_t j = 0; j < g1; ++j) out.values[j * g0 + i] = values[i * g1 + j];
  return out;
}

namespace {

// Lexicographic key deciding the canonical evaluation orientation.
bool dec_before(const SpectralDecomposition& a, const SpectralDecomposition& b) {
  if (a.n_groups() != b.n_groups()) return a.n_groups() < b.n_groups();
  for (int g = 0; g < a.n_groups(); ++g)
    if (a.group_values[g] != b.group_values[g]) return a.group_values[g] < b.group_values[g];
  for (std::size_t i = 0; i < a.op.coeffs.size(); ++i) {
    if (a.op.coeffs[i].real() != b.op.coeffs[i].real())
      return a.op.coeffs[i].real() < b.op.coeffs[i].real();
    if (a.op.coeffs[i].imag() != b.op.coeffs[i].imag())
      return a.op.coeffs[i].imag() < b.op.coeffs[i].imag();
  }
  return false;  // identical operators
}

// M[ga][gb] = Re <psi| P_A(ga) P_B(gb) |psi>
std::vector<double> ordered_kernel2(const StateVector& psi, const SpectralDecomposition& da,
                                    const SpectralDecomposition& db, int threads) {
  const int ga = da.n_groups(), gb = db.n_groups();
  const std::vector<cplx> psi_a = to_eigenframe(psi, da);
  const std::vector<cplx> psi_b = to_eigenframe(psi, db);
  std::vector<double> out(std::size_t(ga) * gb, 0.0);
  parallel_for(gb, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t b = lo; b < hi; ++b) {
      std::vector<cplx> phi = psi_b;
      for (std::uint64_t idx = 0; idx < phi.size(); ++idx)
        if (db.group_of_index[idx] != static_cast<std::int32_t>(b)) phi[idx] = cplx(0.0, 0.0);
      StateVector phi_comp = from_eigenframe(std::move(phi), db);
      const std::vector<cplx> phi_a = to_eigenframe(phi_comp, da);
      std::vector<long double> acc(ga, 0.0L);
      for (std::uint64_t idx = 0; idx < phi_a.size(); ++idx)
        acc[da.group_of_index[idx]] += (std::conj(psi_a[idx]) * phi_a[idx]).real();
      for (int a = 0; a < ga; ++a) out[std::size_t(a) * gb + b] = static_cast<double>(acc[a]);
    }
  });
  return out;
}

}  // namespace

DiscreteKernel kernel2(const StateVector& psi, const SpectralDecomposition& dec_a,
                       const SpectralDecomposition& dec_b, int threads) {
  if (dec_a.n_sites != psi.n_qubits() || dec_b.n_sites != psi.n_qubits())
    throw ConfigError("kernel2: operator/state size mismatch");
  DiscreteKernel k;
  k.m = 2;
  k.labels = {dec_a.op.label, dec_b.op.label};
  k.axes = {dec_a.group_values, dec_b.group_values};
  if (dec_before(dec_b, dec_a)) {
    // evaluate in the canonical orientation, then transpose back
    const std::vector<double> vals = ordered_kernel2(psi, dec_b, dec_a, threads);
    const std::size_t ga = dec_a.group_values.size(), gb = dec_b.group_values.size();
    k.values.resize(ga * gb);
    for (std::size_t b = 0; b < gb; ++b)
      for (std::size_t a = 0; a < ga; ++a) k.values[a * gb + b] = vals[b * ga + a];
  } else {
    k.values = ordered_kernel2(psi, dec_a, dec_b, threads);
  }
  return k;
}

namespace {

// T[g1][g2][g3] = <psi| P_1(g1) P_2(g2) P_3(g3) |psi>, complex.
std::vector<cplx> ordered_kernel3(const StateVector& psi, const SpectralDecomposition& d1,
                                  const SpectralDecomposition& d2,
                                  const SpectralDecomposition& d3, int threads) {
  const int g1 = d1.n_groups(), g2 = d2.n_groups(), g3 = d3.n_groups();
  const std::vector<cplx> psi_1 = to_eigenframe(psi, d1);
  const std::vector<cplx> psi_3 = to_eigenframe(psi, d3);
  std::vector<cplx> out(std::size_t(g1) * g2 * g3, cplx(0.0, 0.0));
  parallel_for(g3, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t c = lo; c < hi; ++c) {
      std::vector<cplx> phi3 = psi_3;
      for (std::uint64_t idx = 0; idx < phi3.size(); ++idx)
        if (d3.group_of_index[idx] != static_cast<std::int32_t>(c)) phi3[idx] = cplx(0.0, 0.0);
      StateVector phi3_comp = from_eigenframe(std::move(phi3), d3);
      const std::vector<cplx> phi3_2 = to_eigenframe(phi3_comp, d2);
      for (int b = 0; b < g2; ++b) {
        std::vector<cplx> phi23 = phi3_2;
        for (std::uint64_t idx = 0; idx < phi23.size(); ++idx)
          if (d2.group_of_index[idx] != b) phi23[idx] = cplx(0.0, 0.0);
        StateVector phi23_comp = from_eigenframe(std::move(phi23), d2);
        const std::vector<cplx> phi23_1 = to_eigenframe(phi23_comp, d1);
        std::vector<cplx> acc(g1, cplx(0.0, 0.0));
        for (std::uint64_t idx = 0; idx < phi23_1.size(); ++idx)
          acc[d1.group_of_index[idx]] += std::conj(psi_1[idx]) * phi23_1[idx];
        for (int a = 0; a < g1; ++a)
          out[(std::size_t(a) * g2 + b) * g3 + c] = acc[a];
      }
    }
  });
  return out;
}

}  // namespace

DiscreteKernel kernel_m(const StateVector& psi,
                        const std::vector<const SpectralDecomposition*>& decs, int threads) {
  if (decs.size() != 3)
    throw ConfigError("kernel_m supports exactly 3 operators (use kernel2 for 2; m > 3 is a "
                      "documented limit)");
  for (const auto* d : decs)
    if (d->n_sites != psi.n_qubits()) throw ConfigError("kernel_m: operator/state size mismatch");
  const SpectralDecomposition &d1 = *decs[0], &d2 = *decs[1], &d3 = *decs[2];
  const int g1 = d1.n_groups(), g2 = d2.n_groups(), g3 = d3.n_groups();

  // The six permutations pair into conjugates; only the three cyclic orders
  // need evaluation: entry = (Re T123 + Re T231 + Re T312) / 3.
  const std::vector<cplx> t123 = ordered_kernel3(psi, d1, d2, d3, threads);
  const std::vector<cplx> t231 = ordered_kernel3(psi, d2, d3, d1, threads);
  const std::vector<cplx> t312 = ordered_kernel3(psi, d3, d1, d2, threads);

  DiscreteKernel k;
  k.m = 3;
  k.labels = {d1.op.label, d2.op.label, d3.op.label};
  k.axes = {d1.group_values, d2.group_values, d3.group_values};
  k.values.assign(std::size_t(g1) * g2 * g3, 0.0);
  for (int a = 0; a < g1; ++a)
    for (int b = 0; b < g2; ++b)
      for (int c = 0; c < g3; ++c) {
        const double v123 = t123[(std::size_t(a) * g2 + b) * g3 + c].real();
        const double v231 = t231[(std::size_t(b) * g3 + c) * g1 + a].real();
        const double v312 = t312[(std::size_t(c) * g1 + a) * g2 + b].real();
        k.values[(std::size_t(a) * g2 + b) * g3 + c] = (v123 + v231 + v312) / 3.0;
      }
  return k;
}

// ---------------------------------------------------------------------------
// Maximally mixed state

DiscreteKernel kernel2_maximally_mixed(int n, const AdditiveOperator& a,
                                       const AdditiveOperator& b) {
  if (a.n_sites() != n || b.n_sites() != n)
    throw ConfigError("kernel2_maximally_mixed: operator size mismatch");
  auto local = [](const AdditiveOperator& op, int l) {
    return std::array<double, 3>{op.coeff(l, Axis::X).real(), op.coeff(l, Axis::Y).real(),
                                 op.coeff(l, Axis::Z).real()};
  };
  auto rho_of = [](const std::array<double, 3>& c) {
    return std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
  };
  // site-uniform up to sign, the paper's use case; the generating function
  // below would otherwise grow an exponential support
  for (const AdditiveOperator* op : {&a, &b}) {
    if (!op->hermitian || !AdditiveOperator::coeffs_hermitian(op->coeffs))
      throw ConfigError("kernel2_maximally_mixed needs hermitian operators");
    const auto base = local(*op, 1);
    for (int l = 2; l <= n; ++l) {
      const auto c = local(*op, l);
      bool same = true, flipped = true;
      for (int i = 0; i < 3; ++i) {
        if (std::abs(c[i] - base[i]) > 1e-12) same = false;
        if (std::abs(c[i] + base[i]) > 1e-12) flipped = false;
      }
      if (!same && !flipped)
        throw ConfigError(
            "kernel2_maximally_mixed requires site-uniform local terms (up to a staggering "
            "sign); for general operators sample basis states through the pure-state path");
    }
  }
  const double rho_a = rho_of(local(a, 1));
  const double rho_b = rho_of(local(b, 1));
  if (rho_a <= 0.0 || rho_b <= 0.0)
    throw ConfigError("kernel2_maximally_mixed: zero operator");

  // Per-site eigenbases via the additive machinery: decompose both operators
  // once and reuse the rotations; s,t = 0/1 pick the -+rho eigenvectors.
  const SpectralDecomposition da = decompose(a);
  const SpectralDecomposition db = decompose(b);

  // DP over sites on the integer lattice of (sum_s +-1, sum_t +-1).
  // cur[(ka+N)*(2N+1) + (kb+N)] after l sites: only |k| <= l occupied.
  const int width = 2 * n + 1;
  std::vector<double> cur(std::size_t(width) * width, 0.0);
  cur[std::size_t(n) * width + n] = 1.0;  // k = (0,0)
  std::vector<double> nxt(cur.size());
  for (int l = 1; l <= n; ++l) {
    const LocalUnitary& ua = da.site_rotations[l - 1];
    const LocalUnitary& ub = db.site_rotations[l - 1];
    // p[s][t] = |<u_a(s)|u_b(t)>|^2, columns of the rotations
    double p[2][2];
    for (int s = 0; s < 2; ++s)
      for (int t = 0; t < 2; ++t) {
        const cplx ov = std::conj(ua.u[0 + s]) * ub.u[0 + t] +
                        std::conj(ua.u[2 + s]) * ub.u[2 + t];
        p[s][t] = std::norm(ov);
      }
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (int ia = -l + 1; ia <= l - 1; ++ia)
      for (int ib = -l + 1; ib <= l - 1; ++ib) {
        const double w = cur[std::size_t(ia + n) * width + (ib + n)];
        if (w == 0.0) continue;
        for (int s = 0; s < 2; ++s)
          for (int t = 0; t < 2; ++t)
            nxt[std::size_t(ia + (2 * s - 1) + n) * width + (ib + (2 * t - 1) + n)] +=
                w * p[s][t] * 0.5;  // 2^-N = prod of per-site 1/2
      }
    std::swap(cur, nxt);
  }

  DiscreteKernel k;
  k.m = 2;
  k.labels = {a.label, b.label};
  // axes: parity of N fixes which integers are reachable
  std::vector<int> ks;
  for (int v = -n; v <= n; v += 2) ks.push_back(v);
  k.axes = {std::vector<double>(), std::vector<double>()};
  for (int v : ks) k.axes[0].push_back(v * rho_a);
  for (int v : ks) k.axes[1].push_back(v * rho_b);
  k.values.assign(ks.size() * ks.size(), 0.0);
  for (std::size_t i = 0; i < ks.size(); ++i)
    for (std::size_t j = 0; j < ks.size(); ++j)
      k.values[i * ks.size() + j] = cur[std::size_t(ks[i] + n) * width + (ks[j] + n)];
  return k;
}

// ---------------------------------------------------------------------------
// Coarse graining and negativity

GridAxis default_grid(const std::vector<double>& axis_values, double W) {
  if (W <= 0.0) throw ConfigError("W must be > 0 for a grid");
  GridAxis g;
  g.step = W / 8.0;
  const double lo = axis_values.front() - 5.0 * W;
  const double hi = axis_values.back() + 5.0 * W;
  g.min = lo;
  g.n = static_cast<int>(std::ceil((hi - lo) / g.step)) + 1;
  return g;
}

namespace {

void validate_grid(const GridAxis& g, const std::vector<double>& axis_values, double W) {
  if (g.step <= 0.0 || g.step > W / 4.0 + 1e-15)
    throw ConfigError("grid too coarse: step must be <= W/4");
  if (g.min > axis_values.front() - 5.0 * W + 1e-9 ||
      g.max() < axis_values.back() + 5.0 * W - 1e-9)
    throw ConfigError("grid must cover [spectrum_min - 5W, spectrum_max + 5W]");
}

}  // namespace

XiField coarse_grain(const DiscreteKernel& kernel, double W, const GridAxis& ga,
                     const GridAxis& gb) {
  if (kernel.m != 2) throw ConfigError("coarse_grain operates on 2-operator kernels");
  if (W <= 0.0) throw ConfigError("W must be > 0 (use the kernel itself for W->0)");
  validate_grid(ga, kernel.axes[0], W);
  validate_grid(gb, kernel.axes[1], W);

  const std::size_t na = ga.n, nb = gb.n;
  const std::size_t ka = kernel.axes[0].size(), kb = kernel.axes[1].size();
  // separable convolution: field = Wa * K * Wb^T
  std::vector<double> wa(na * ka), wb(nb * kb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t g = 0; g < ka; ++g)
      wa[i * ka + g] = gaussian_kernel(ga.point(int(i)) - kernel.axes[0][g], W);
  for (std::size_t j = 0; j < nb; ++j)
    for (std::size_t g = 0; g < kb; ++g)
      wb[j * kb + g] = gaussian_kernel(gb.point(int(j)) - kernel.axes[1][g], W);

  std::vector<double> mid(na * kb, 0.0);  // Wa * K
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t g = 0; g < ka; ++g) {
      const double w = wa[i * ka + g];
      if (w == 0.0) continue;
      const double* krow = &kernel.values[g * kb];
      double* mrow = &mid[i * kb];
      for (std::size_t h = 0; h < kb; ++h) mrow[h] += w * krow[h];
    }
  XiField f;
  f.labels = kernel.labels;
  f.W = W;
  f.ga = ga;
  f.gb = gb;
  f.values.assign(na * nb, 0.0);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t h = 0; h < kb; ++h) {
      const double m = mid[i * kb + h];
      if (m == 0.0) continue;
      double* frow = &f.values[i * nb];
      for (std::size_t j = 0; j < nb; ++j) frow[j] += m * wb[j * kb + h];
    }

  f.min_value = *std::min_element(f.values.begin(), f.values.end());
  long double integral = 0.0L;
  for (std::size_t i = 0; i < na; ++i) {
    const double wi = (i == 0 || i + 1 == na) ? 0.5 : 1.0;
    for (std::size_t j = 0; j < nb; ++j) {
      const double wj = (j == 0 || j + 1 == nb) ? 0.5 : 1.0;
      integral += wi * wj * f.values[i * nb + j];
    }
  }
  f.integral = static_cast<double>(integral) * ga.step * gb.step;
  return f;
}

XiField coarse_grain(const DiscreteKernel& kernel, double W) {
  return coarse_grain(kernel, W, default_grid(kernel.axes[0], W),
                      default_grid(kernel.axes[1], W));
}

namespace {

// Trapezoid integral of min(Xi, 0) computed row by row; never materializes
// the full field, so refinement levels stay cheap in memory.
double negative_part_integral(const DiscreteKernel& kernel, double W, const GridAxis& ga,
                              const GridAxis& gb) {
  const std::size_t ka = kernel.axes[0].size(), kb = kernel.axes[1].size();
  std::vector<double> wb(std::size_t(gb.n) * kb);
  for (int j = 0; j < gb.n; ++j)
    for (std::size_t g = 0; g < kb; ++g)
      wb[std::size_t(j) * kb + g] = gaussian_kernel(gb.point(j) - kernel.axes[1][g], W);
  std::vector<double> mid(kb), row(gb.n);
  long double acc = 0.0L;
  for (int i = 0; i < ga.n; ++i) {
    const double wi = (i == 0 || i + 1 == ga.n) ? 0.5 : 1.0;
    std::fill(mid.begin(), mid.end(), 0.0);
    for (std::size_t g = 0; g < ka; ++g) {
      const double w = gaussian_kernel(ga.point(i) - kernel.axes[0][g], W);
      if (w == 0.0) continue;
      const double* krow = &kernel.values[g * kb];
      for (std::size_t h = 0; h < kb; ++h) mid[h] += w * krow[h];
    }
    for (int j = 0; j < gb.n; ++j) {
      double v = 0.0;
      for (std::size_t h = 0; h < kb; ++h) v += mid[h] * wb[std::size_t(j) * kb + h];
      if (v < 0.0) acc += wi * ((j == 0 || j + 1 == gb.n) ? 0.5 : 1.0) * v;
    }
  }
  return static_cast<double>(acc) * ga.step * gb.step;
}

}  // namespace

NegativityResult negativity(const DiscreteKernel& kernel, double W, double tol,
                            int max_refine) {
  NegativityResult res;
  if (W <= 0.0) {  // W->0 convention: sum of negative kernel weights
    long double acc = 0.0L;
    for (double v : kernel.values)
      if (v < 0.0) acc += v;
    res.I = static_cast<double>(acc);
    return res;
  }
  GridAxis ga = default_grid(kernel.axes[0], W);
  GridAxis gb = default_grid(kernel.axes[1], W);
  double prev = negative_part_integral(kernel, W, ga, gb);
  res.I = prev;
  res.converged = false;
  for (int r = 1; r <= max_refine; ++r) {
    ga.step *= 0.5;
    ga.n = 2 * ga.n - 1;
    gb.step *= 0.5;
    gb.n = 2 * gb.n - 1;
    const double cur = negative_part_integral(kernel, W, ga, gb);
    res.refinements = r;
    res.I = cur;
    if (std::abs(cur - prev) < tol) {
      res.converged = true;
      break;
    }
    prev = cur;
  }
  return res;
}

double WRule::operator()(int n) const {
  return kind == WRuleKind::LinearN ? c * n : std::sqrt(c * n);
}

std::string WRule::name() const {
  if (kind == WRuleKind::LinearN) {
    if (std::abs(c - 1.0 / 6.0) < 1e-12) return "N/6";
    if (std::abs(c - 1.0 / 8.0) < 1e-12) return "N/8";
    if (std::abs(c - 1.0 / 10.0) < 1e-12) return "N/10";
    return format_double(c) + "N";
  }
  if (std::abs(c - 1.0) < 1e-12) return "sqrtN";
  return "sqrt" + format_double(c) + "N";
}

WRule parse_w_rule(const std::string& text) {
  WRule r;
  try {
    if (text.rfind("sqrt", 0) == 0) {
      r.kind = WRuleKind::SqrtN;
      std::string rest = text.substr(4);
      if (!rest.empty() && rest.back() == 'N') rest.pop_back();
      if (rest.empty() || rest == "(") r.c = 1.0;
      else r.c = std::stod(rest);
      return r;
    }
    if (text.rfind("N/", 0) == 0) {
      r.kind = WRuleKind::LinearN;
      r.c = 1.0 / std::stod(text.substr(2));
      return r;
    }
    if (!text.empty() && text.back() == 'N') {
      r.kind = WRuleKind::LinearN;
      const std::string head = text.substr(0, text.size() - 1);
      r.c = head.empty() ? 1.0 : std::stod(head);
      return r;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("cannot parse W rule '" + text + "' (use N/6, 0.25N, sqrtN, sqrt0.5N)");
}

std::vector<ScanRow> w_scaling_scan(
    const std::function<StateVector(int)>& family_builder,
    const std::function<std::pair<AdditiveOperator, AdditiveOperator>(int)>& op_selector,
    const WRule& rule, const std::vector<int>& sizes, int threads) {
  if (sizes.size() < 3) throw ConfigError("w_scaling_scan needs at least 3 sizes");
  std::vector<ScanRow> rows;
  for (int n : sizes) {
    const StateVector psi = family_builder(n);
    const auto [a, b] = op_selector(n);
    const SpectralDecomposition da = decompose(a), db = decompose(b);
    const DiscreteKernel k = kernel2(psi, da, db, threads);
    const double W = rule(n);
    rows.push_back({n, W, negativity(k, W).I});
  }
  return rows;
}

}  // namespace mvis
