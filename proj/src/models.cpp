#include "mvis/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include <Eigen/Dense>

namespace mvis {

bool LatticeGraph::staggered() const {
  return std::any_of(sublattice_sign.begin(), sublattice_sign.end(),
                     [](int s) { return s < 0; });
}

void LatticeGraph::validate() const {
  if (n_sites < 2) throw ConfigError("lattice needs at least 2 sites");
  if (static_cast<int>(sublattice_sign.size()) != n_sites)
    throw ConfigError("sublattice_sign size mismatch");
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a == b) throw ConfigError("lattice has a self-loop at site " + std::to_string(a));
    if (a < 1 || a > n_sites || b < 1 || b > n_sites)
      throw ConfigError("lattice edge site out of range");
    auto key = std::minmax(a, b);
    if (!seen.insert(key).second)
      throw ConfigError("duplicate lattice edge (" + std::to_string(a) + "," +
                        std::to_string(b) + ")");
  }
  for (int s : sublattice_sign)
    if (s != 1 && s != -1) throw ConfigError("sublattice signs must be +-1");
  if (staggered()) {
    for (auto [a, b] : edges)
      if (sublattice_sign[a - 1] * sublattice_sign[b - 1] != -1)
        throw ConfigError("sublattice signs do not 2-color edge (" + std::to_string(a) + "," +
                          std::to_string(b) + ")");
  }
}

LatticeGraph lattice_chain(int n, bool periodic, bool staggered) {
  if (n < 2) throw ConfigError("chain length must be >= 2");
  LatticeGraph g;
  g.n_sites = n;
  for (int l = 1; l < n; ++l) g.edges.emplace_back(l, l + 1);
  if (periodic && n > 2) g.edges.emplace_back(n, 1);
  if (staggered) {
    if (periodic && n % 2 != 0)
      throw ConfigError("periodic chain of odd length " + std::to_string(n) +
                        " frustrates antiferromagnetic staggering");
    g.sublattice_sign.resize(n);
    for (int l = 1; l <= n; ++l) g.sublattice_sign[l - 1] = (l % 2 == 0) ? 1 : -1;  // (-1)^l
  } else {
    g.sublattice_sign.assign(n, 1);
  }
  g.validate();
  return g;
}

LatticeGraph lattice_rect(int rows, int cols, bool periodic, bool staggered) {
  if (rows < 1 || cols < 1 || rows * cols < 2) throw ConfigError("rectangle needs >= 2 sites");
  LatticeGraph g;
  g.n_sites = rows * cols;
  auto site = [cols](int r, int c) { return (r - 1) * cols + c; };  // 1-based
  for (int r = 1; r <= rows; ++r)
    for (int c = 1; c <= cols; ++c) {
      if (c < cols) g.edges.emplace_back(site(r, c), site(r, c + 1));
      else if (periodic && cols > 2) g.edges.emplace_back(site(r, cols), site(r, 1));
      if (r < rows) g.edges.emplace_back(site(r, c), site(r + 1, c));
      else if (periodic && rows > 2) g.edges.emplace_back(site(rows, c), site(1, c));
    }
  if (staggered) {
    if (periodic) {
      if (cols % 2 != 0 && cols > 2)
        throw ConfigError("periodic dimension of odd length " + std::to_string(cols) +
                          " frustrates antiferromagnetic staggering");
      if (rows % 2 != 0 && rows > 2)
        throw ConfigError("periodic dimension of odd length " + std::to_string(rows) +
                          " frustrates antiferromagnetic staggering");
    }
    g.sublattice_sign.resize(g.n_sites);
    for (int r = 1; r <= rows; ++r)
      for (int c = 1; c <= cols; ++c)
        g.sublattice_sign[site(r, c) - 1] = ((r + c) % 2 == 0) ? -1 : 1;  // site 1 -> -1
  } else {
    g.sublattice_sign.assign(g.n_sites, 1);
  }
  g.validate();
  return g;
}

LatticeGraph lattice_from_string(const std::string& spec, bool staggered) {
  const auto p1 = spec.find(':');
  const auto p2 = spec.rfind(':');
  if (p1 == std::string::npos || p2 == p1)
    throw ConfigError("lattice spec must be 'chain:N:pbc|obc' or 'rect:RxC:pbc|obc', got '" +
                      spec + "'");
  const std::string kind = spec.substr(0, p1);
  const std::string sizes = spec.substr(p1 + 1, p2 - p1 - 1);
  const std::string bc = spec.substr(p2 + 1);
  bool periodic;
  if (bc == "pbc") periodic = true;
  else if (bc == "obc") periodic = false;
  else throw ConfigError("lattice boundary must be 'pbc' or 'obc', got '" + bc + "'");
  try {
    if (kind == "chain") return lattice_chain(std::stoi(sizes), periodic, staggered);
    if (kind == "rect") {
      const auto x = sizes.find('x');
      if (x == std::string::npos) throw ConfigError("rect sizes must look like RxC");
      return lattice_rect(std::stoi(sizes.substr(0, x)), std::stoi(sizes.substr(x + 1)),
                          periodic, staggered);
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError("cannot parse lattice sizes in '" + spec + "'");
  }
  throw ConfigError("unknown lattice kind '" + kind + "'");
}

LatticeGraph lattice_from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open lattice file '" + path + "'");
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid lattice JSON: " + std::string(e.what()));
  }
  LatticeGraph g;
  try {
    g.n_sites = j.at("n_sites").get<int>();
    for (const auto& e : j.at("edges"))
      g.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    g.sublattice_sign = j.at("signs").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("lattice JSON missing field: " + std::string(e.what()));
  }
  g.validate();
  return g;
}

void lattice_to_json_file(const LatticeGraph& g, const std::string& path) {
  nlohmann::json j;
  j["n_sites"] = g.n_sites;
  auto& edges = j["edges"] = nlohmann::json::array();
  for (auto [a, b] : g.edges) edges.push_back({a, b});
  j["signs"] = g.sublattice_sign;
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write lattice file '" + path + "'");
  f << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Hamiltonians

namespace {

struct EdgeMasks {
  std::uint64_t m1, m2, both;
};

std::vector<EdgeMasks> edge_masks(const LatticeGraph& g) {
  std::vector<EdgeMasks> ms;
  ms.reserve(g.edges.size());
  for (auto [a, b] : g.edges) {
    const std::uint64_t m1 = std::uint64_t(1) << (a - 1);
    const std::uint64_t m2 = std::uint64_t(1) << (b - 1);
    ms.push_back({m1, m2, m1 | m2});
  }
  return ms;
}

// out = H * in over an arbitrary list of basis states (full space when
// rank == identity). pos(i) maps a basis word to its slot in `in`.
template <typename Rank>
void apply_h_basis(HamiltonianKind kind, const std::vector<EdgeMasks>& masks,
                   const std::vector<std::uint64_t>& basis, const Rank& pos,
                   const std::vector<double>& in, std::vector<double>& out) {
  const double hop = (kind == HamiltonianKind::XY) ? -2.0 : 2.0;
  const bool zz = (kind == HamiltonianKind::Heisenberg);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t s = 0; s < basis.size(); ++s) {
    const std::uint64_t i = basis[s];
    const double a = in[s];
    double diag = 0.0;
    for (const auto& m : masks) {
      const bool b1 = (i & m.m1) != 0, b2 = (i & m.m2) != 0;
      if (b1 != b2) {
        out[pos(i ^ m.both)] += hop * a;
        if (zz) diag -= 1.0;
      } else if (zz) {
        diag += 1.0;
      }
    }
    if (zz) out[s] += diag * a;
  }
}

}  // namespace

StateVector apply_hamiltonian(HamiltonianKind kind, const LatticeGraph& g,
                              const StateVector& psi) {
  if (g.n_sites != psi.n_qubits()) throw ConfigError("lattice/state size mismatch");
  const auto masks = edge_masks(g);
  const std::uint64_t dim = psi.dim();
  const auto& in = psi.amps();
  std::vector<cplx> out(dim, cplx(0.0, 0.0));
  const double hop = (kind == HamiltonianKind::XY) ? -2.0 : 2.0;
  const bool zz = (kind == HamiltonianKind::Heisenberg);
  for (std::uint64_t i = 0; i < dim; ++i) {
    const cplx a = in[i];
    double diag = 0.0;
    for (const auto& m : masks) {
      const bool b1 = (i & m.m1) != 0, b2 = (i & m.m2) != 0;
      if (b1 != b2) {
        out[i ^ m.both] += hop * a;
        if (zz) diag -= 1.0;
      } else if (zz) {
        diag += 1.0;
      }
    }
    if (zz) out[i] += diag * a;
  }
  return StateVector(psi.n_qubits(), std::move(out), NormPolicy::Raw);
}

// ---------------------------------------------------------------------------
// Lanczos ground state

namespace {

std::vector<std::uint64_t> sector_basis(int n, std::optional<int> mz) {
  std::vector<std::uint64_t> basis;
  const std::uint64_t dim = std::uint64_t(1) << n;
  if (!mz) {
    basis.resize(dim);
    std::iota(basis.begin(), basis.end(), std::uint64_t(0));
    return basis;
  }
  // total sigma_z = 2*popcount - N
  if ((*mz + n) % 2 != 0 || *mz < -n || *mz > n)
    throw ConfigError("M_z sector " + std::to_string(*mz) + " is empty for N=" +
                      std::to_string(n));
  const int popcount = (*mz + n) / 2;
  for (std::uint64_t i = 0; i < dim; ++i)
    if (std::popcount(i) == popcount) basis.push_back(i);
  return basis;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += (long double)a[i] * b[i];
  return static_cast<double>(s);
}

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

namespace {

struct LanczosOut {
  double energy = 0.0;
  std::vector<double> vec;
  int iterations = 0;
};

// Lowest eigenpair over the given basis, full reorthogonalization. When
// deflate is non-null the iteration runs in its orthogonal complement, which
// exposes a degenerate partner of a previously found ground vector.
template <typename ApplyH>
LanczosOut lanczos_lowest(const ApplyH& apply_h, std::size_t dim, const LanczosConfig& cfg,
                          std::uint64_t seed, const std::vector<double>* deflate) {
  NormalSampler rng(seed);
  std::vector<double> v(dim);
  for (auto& x : v) x = rng();
  if (deflate) axpy(-dot(*deflate, v), *deflate, v);
  {
    const double nv = std::sqrt(dot(v, v));
    if (nv < 1e-12) throw NumericalError("Lanczos start vector vanished");
    for (auto& x : v) x /= nv;
  }

  std::vector<std::vector<double>> krylov;
  krylov.push_back(v);
  std::vector<double> alpha, beta;
  std::vector<double> w(dim);
  double theta_prev = 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri_solver;
  int iters = 0;
  bool converged = false;

  const int max_iter = static_cast<int>(std::min<std::size_t>(cfg.max_iter, dim));
  for (int j = 0; j < max_iter; ++j) {
    apply_h(krylov[j], w);
    const double aj = dot(krylov[j], w);
    alpha.push_back(aj);
    axpy(-aj, krylov[j], w);
    if (j > 0) axpy(-beta[j - 1], krylov[j - 1], w);
    // full reorthogonalization, twice for stability
    for (int pass = 0; pass < 2; ++pass) {
      if (deflate) axpy(-dot(*deflate, w), *deflate, w);
      for (const auto& q : krylov) axpy(-dot(q, w), q, w);
    }
    const double bj = std::sqrt(dot(w, w));
    iters = j + 1;

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(iters, iters);
    for (int i = 0; i < iters; ++i) {
      T(i, i) = alpha[i];
      if (i > 0) T(i, i - 1) = T(i - 1, i) = beta[i - 1];
    }
    tri_solver.compute(T);
    const double theta = tri_solver.eigenvalues()(0);
    const double resid_est = std::abs(bj * tri_solver.eigenvectors()(iters - 1, 0));
    if (j > 0 && std::abs(theta - theta_prev) < cfg.ritz_tol && resid_est < cfg.residual_tol) {
      converged = true;
      break;
    }
    theta_prev = theta;
    if (bj < 1e-14) {  // Krylov space exhausted: exact within this subspace
      converged = true;
      break;
    }
    beta.push_back(bj);
    for (auto& x : w) x /= bj;
    krylov.push_back(w);
  }
  if (!converged)
    throw NumericalError("Lanczos did not converge within " + std::to_string(cfg.max_iter) +
                         " iterations");

  LanczosOut out;
  const Eigen::VectorXd y = tri_solver.eigenvectors().col(0);
  out.vec.assign(dim, 0.0);
  for (int i = 0; i < iters; ++i) axpy(y(i), krylov[i], out.vec);
  const double nv = std::sqrt(dot(out.vec, out.vec));
  for (auto& x : out.vec) x /= nv;
  out.energy = tri_solver.eigenvalues()(0);
  out.iterations = iters;
  return out;
}

}  // namespace

GroundStateResult ground_state(HamiltonianKind kind, const LatticeGraph& lattice,
                               const LanczosConfig& cfg) {
  lattice.validate();
  const int n = lattice.n_sites;
  if (n > kMaxQubits) throw ConfigError("lattice exceeds the dense qubit cap");
  std::optional<int> sector = cfg.mz_sector;
  if (!sector && cfg.use_default_sector && n % 2 == 0) sector = 0;

  const auto basis = sector_basis(n, sector);
  const std::size_t dim = basis.size();
  const auto masks = edge_masks(lattice);

  auto pos = [&basis](std::uint64_t word) {
    return static_cast<std::size_t>(
        std::lower_bound(basis.begin(), basis.end(), word) - basis.begin());
  };
  auto apply_h = [&](const std::vector<double>& in, std::vector<double>& out) {
    apply_h_basis(kind, masks, basis, pos, in, out);
  };

  // Both Hamiltonians are real in the computational basis; run real Lanczos.
  const LanczosOut first = lanczos_lowest(apply_h, dim, cfg, cfg.seed, nullptr);

  // Without a sector restriction a degenerate ground level would make the
  // returned vector an arbitrary mix; detect it with a deflated second pass
  // (a single Krylov sequence cannot see the degenerate partner).
  if (!sector && dim > 1) {
    const LanczosOut second = lanczos_lowest(apply_h, dim, cfg, cfg.seed + 0x9e37, &first.vec);
    if (second.energy - first.energy < 1e-8 * std::max(1.0, std::abs(first.energy)))
      throw NumericalError(
          "ground level is (near-)degenerate; supply an M_z sector restriction");
  }

  std::vector<cplx> full(std::uint64_t(1) << n, cplx(0.0, 0.0));
  for (std::size_t s = 0; s < dim; ++s) full[basis[s]] = first.vec[s];
  GroundStateResult res;
  res.state = StateVector(n, std::move(full), NormPolicy::Unit);
  res.energy = first.energy;
  res.iterations = first.iterations;
  res.sector_used = sector;

  // Full-space residual check, independently of the sector machinery.
  StateVector hpsi = apply_hamiltonian(kind, lattice, res.state);
  std::vector<cplx> resid = hpsi.amps();
  const auto& g = res.state.amps();
  for (std::size_t i = 0; i < resid.size(); ++i) resid[i] -= res.energy * g[i];
  res.residual = std::sqrt(norm_sq(resid));
  if (res.residual > 10 * cfg.residual_tol)
    throw NumericalError("ground state residual " + format_double(res.residual) +
                         " exceeds tolerance");
  return res;
}

// ---------------------------------------------------------------------------
// Shor modular-exponentiation state

namespace {

int ceil_log2(std::int64_t k) {  // smallest n with 2^n >= k, k >= 1
  int n = 0;
  std::int64_t v = 1;
  while (v < k) {
    v <<= 1;
    ++n;
  }
  return n;
}

std::int64_t gcd64(std::int64_t a, std::int64_t b) {
  while (b) {
    const std::int64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

std::pair<StateVector, ShorLayout> shor_me_state(std::int64_t I, std::int64_t x) {
  if (I < 2) throw ConfigError("I must be >= 2");
  if (x < 1 || x >= I) throw ConfigError("base x must satisfy 1 <= x < I");
  if (gcd64(x, I) != 1)
    throw ConfigError("x=" + std::to_string(x) + " is not coprime to I=" + std::to_string(I));
  ShorLayout lay;
  lay.I = I;
  lay.x = x;
  lay.N1 = ceil_log2(I * I);  // 2 log2 I <= N1 < 2 log2 I + 1
  lay.N2 = ceil_log2(I);      //   log2 I <= N2 <   log2 I + 1
  if (lay.N1 + lay.N2 > kMaxQubits)
    throw ConfigError("registers need " + std::to_string(lay.N1 + lay.N2) +
                      " qubits, above the dense cap of " + std::to_string(kMaxQubits));
  // multiplicative order of x mod I
  std::int64_t v = x % I;
  lay.r = 1;
  while (v != 1) {
    v = (v * x) % I;
    ++lay.r;
    if (lay.r > I) throw NumericalError("order-finding loop failed");
  }

  const int n = lay.N1 + lay.N2;
  const std::uint64_t n1dim = std::uint64_t(1) << lay.N1;
  std::vector<cplx> amps(std::uint64_t(1) << n, cplx(0.0, 0.0));
  const double w = 1.0 / std::sqrt(double(n1dim));
  std::uint64_t f = 1 % I;
  for (std::uint64_t a = 0; a < n1dim; ++a) {
    amps[a | (f << lay.N1)] = w;
    f = (f * std::uint64_t(x)) % std::uint64_t(I);
  }
  return {StateVector(n, std::move(amps), NormPolicy::Unit), lay};
}

// ---------------------------------------------------------------------------
// Grover iterate

std::pair<StateVector, GroverParams> grover_state(int n_qubits, std::optional<int> k) {
  if (n_qubits < 2 || n_qubits > kMaxQubits) throw ConfigError("grover: bad qubit count");
  GroverParams p;
  p.n_qubits = n_qubits;
  const double dim = std::ldexp(1.0, n_qubits);  // 2^N
  p.theta = 2.0 * std::acos(std::sqrt((dim - 1.0) / dim));
  const double Rreal = std::acos(std::sqrt(1.0 / dim)) / p.theta;
  p.R = static_cast<int>(std::llround(Rreal));
  if (k) {
    p.k = *k;
    if (p.k < 0) throw ConfigError("grover: k must be >= 0");
  } else {
    p.k = (p.R % 2 == 0) ? p.R / 2 : (p.R + 1) / 2;  // R/2, or R/2 + 0.5 for odd R
  }
  p.margin_value = (4.0 * p.k + 2.0) / std::sqrt(dim);
  p.margin_ok = (p.margin_value >= p.delta) &&
                (p.margin_value <= 3.14159265358979323846 - p.delta);

  const double phase = (2.0 * p.k + 1.0) * p.theta / 2.0;
  const double s = std::sin(phase);
  const double c = std::cos(phase) / std::sqrt(dim - 1.0);
  const std::uint64_t full = (std::uint64_t(1) << n_qubits) - 1;
  std::vector<cplx> amps(std::uint64_t(1) << n_qubits, cplx(c, 0.0));
  amps[full] = s;
  return {StateVector(n_qubits, std::move(amps), NormPolicy::Normalize), p};
}

StateVector grover_state_iterated(int n_qubits, int k) {
  if (n_qubits < 2 || n_qubits > kMaxQubits) throw ConfigError("grover: bad qubit count");
  const std::uint64_t dim = std::uint64_t(1) << n_qubits;
  const std::uint64_t sol = dim - 1;
  std::vector<cplx> a(dim, cplx(1.0 / std::sqrt(double(dim)), 0.0));
  for (int it = 0; it < k; ++it) {
    a[sol] = -a[sol];  // oracle
    cplx mean(0.0, 0.0);
    for (const cplx& v : a) mean += v;
    mean /= double(dim);
    for (cplx& v : a) v = 2.0 * mean - v;  // inversion about the mean
  }
  return StateVector(n_qubits, std::move(a), NormPolicy::Normalize);
}

StateVector cat_state(int n) {
  if (n < 1 || n > kMaxQubits) throw ConfigError("cat_state: bad qubit count");
  std::vector<cplx> amps(std::uint64_t(1) << n, cplx(0.0, 0.0));
  const double w = 1.0 / std::sqrt(2.0);
  amps[0] = w;
  amps[(std::uint64_t(1) << n) - 1] = w;
  return StateVector(n, std::move(amps), NormPolicy::Unit);
}

StateVector product_state(int n, cplx a0, cplx a1) {
  const double norm = std::norm(a0) + std::norm(a1);
  if (std::abs(norm - 1.0) > 1e-12)
    throw ConfigError("single-qubit amplitudes are not normalized");
  if (n < 1 || n > kMaxQubits) throw ConfigError("product_state: bad qubit count");
  std::vector<cplx> amps(std::uint64_t(1) << n);
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    cplx v(1.0, 0.0);
    for (int l = 0; l < n; ++l) v *= (i >> l) & 1 ? a1 : a0;
    amps[i] = v;
  }
  return StateVector(n, std::move(amps), NormPolicy::Normalize);
}

}  // namespace mvis
