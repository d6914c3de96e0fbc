#include "mvis/statevec.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>

namespace mvis {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double LocalUnitary::unitarity_defect() const {
  // u^dag u - I, Frobenius norm
  cplx g00 = std::conj(u[0]) * u[0] + std::conj(u[2]) * u[2] - 1.0;
  cplx g01 = std::conj(u[0]) * u[1] + std::conj(u[2]) * u[3];
  cplx g10 = std::conj(u[1]) * u[0] + std::conj(u[3]) * u[2];
  cplx g11 = std::conj(u[1]) * u[1] + std::conj(u[3]) * u[3] - 1.0;
  return std::sqrt(std::norm(g00) + std::norm(g01) + std::norm(g10) + std::norm(g11));
}

LocalUnitary LocalUnitary::dagger() const {
  return {{std::conj(u[0]), std::conj(u[2]), std::conj(u[1]), std::conj(u[3])}};
}

LocalUnitary LocalUnitary::identity() { return {{1.0, 0.0, 0.0, 1.0}}; }

StateVector::StateVector(int n_qubits, std::uint64_t basis_index) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits)
    throw ConfigError("n_qubits must be in [1," + std::to_string(kMaxQubits) + "], got " +
                      std::to_string(n_qubits));
  amps_.assign(dim(), cplx(0.0, 0.0));
  if (basis_index >= dim()) throw ConfigError("basis index out of range");
  amps_[basis_index] = 1.0;
}

StateVector::StateVector(int n_qubits, std::vector<cplx> amplitudes, NormPolicy policy)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
  if (n_qubits < 1 || n_qubits > kMaxQubits)
    throw ConfigError("n_qubits must be in [1," + std::to_string(kMaxQubits) + "]");
  if (amps_.size() != dim())
    throw ConfigError("amplitude array size does not match 2^n_qubits");
  if (policy == NormPolicy::Raw) return;
  const double n2 = norm_sq(amps_);
  if (policy == NormPolicy::Unit) {
    if (std::abs(n2 - 1.0) > 1e-12)
      throw NumericalError("state norm deviates from 1 by " + format_double(std::abs(n2 - 1.0)));
  } else {
    if (n2 <= 0.0) throw NumericalError("cannot normalize zero state");
    const double s = 1.0 / std::sqrt(n2);
    for (auto& a : amps_) a *= s;
  }
}

double StateVector::norm() const { return std::sqrt(norm_sq(amps_)); }

void apply_local_unitary_inplace(std::vector<cplx>& amps, int n_qubits, int site,
                                 const LocalUnitary& u) {
  const std::uint64_t dim = std::uint64_t(1) << n_qubits;
  const std::uint64_t mask = std::uint64_t(1) << (site - 1);
  for (std::uint64_t idx = 0; idx < dim; ++idx) {
    if (idx & mask) continue;
    const cplx a0 = amps[idx];
    const cplx a1 = amps[idx | mask];
    amps[idx] = u.u[0] * a0 + u.u[1] * a1;
    amps[idx | mask] = u.u[2] * a0 + u.u[3] * a1;
  }
}

StateVector apply_local_unitary(const StateVector& state, int site, const LocalUnitary& u) {
  if (site < 1 || site > state.n_qubits())
    throw ConfigError("site " + std::to_string(site) + " out of range [1," +
                      std::to_string(state.n_qubits()) + "]");
  const double defect = u.unitarity_defect();
  if (defect > 1e-10)
    throw ConfigError("matrix is not unitary (Frobenius deviation " + format_double(defect) + ")");
  std::vector<cplx> amps = state.amps();
  apply_local_unitary_inplace(amps, state.n_qubits(), site, u);
  return StateVector(state.n_qubits(), std::move(amps), NormPolicy::Raw);
}

namespace {

// sigma_axis |idx> = factor |idx ^ flip>; factor depends on the source bit.
inline void sigma_action(Axis axis, std::uint64_t mask, std::uint64_t idx, std::uint64_t& out_idx,
                         cplx& factor) {
  const bool bit = (idx & mask) != 0;
  switch (axis) {
    case Axis::X:
      out_idx = idx ^ mask;
      break;
    case Axis::Y:
      out_idx = idx ^ mask;
      factor *= bit ? cplx(0.0, 1.0) : cplx(0.0, -1.0);
      break;
    case Axis::Z:
      out_idx = idx;
      factor *= bit ? 1.0 : -1.0;
      break;
  }
}

}  // namespace

StateVector sigma_apply(const StateVector& state, Axis axis, int site) {
  if (site < 1 || site > state.n_qubits()) throw ConfigError("sigma_apply: site out of range");
  const std::uint64_t dim = state.dim();
  const std::uint64_t mask = std::uint64_t(1) << (site - 1);
  std::vector<cplx> out(dim);
  const auto& in = state.amps();
  switch (axis) {
    case Axis::X:
      for (std::uint64_t j = 0; j < dim; ++j) out[j] = in[j ^ mask];
      break;
    case Axis::Y:
      // <1|sy|0> = -i, <0|sy|1> = +i
      for (std::uint64_t j = 0; j < dim; ++j)
        out[j] = ((j & mask) ? cplx(0.0, -1.0) : cplx(0.0, 1.0)) * in[j ^ mask];
      break;
    case Axis::Z:
      for (std::uint64_t j = 0; j < dim; ++j) out[j] = ((j & mask) ? 1.0 : -1.0) * in[j];
      break;
  }
  return StateVector(state.n_qubits(), std::move(out), NormPolicy::Raw);
}

double pauli_expectation(const StateVector& state, Axis axis, int site) {
  if (site < 1 || site > state.n_qubits())
    throw ConfigError("pauli_expectation: site out of range");
  const std::uint64_t dim = state.dim();
  const std::uint64_t mask = std::uint64_t(1) << (site - 1);
  const auto& a = state.amps();
  long double acc = 0.0L;
  switch (axis) {
    case Axis::X:
      for (std::uint64_t i = 0; i < dim; ++i)
        acc += (std::conj(a[i ^ mask]) * a[i]).real();
      break;
    case Axis::Y:
      // sigma_y|b> = i(2b-1)|1-b>: source bit 0 -> -i, source bit 1 -> +i
      for (std::uint64_t i = 0; i < dim; ++i) {
        const cplx f = (i & mask) ? cplx(0.0, 1.0) : cplx(0.0, -1.0);
        acc += (std::conj(a[i ^ mask]) * f * a[i]).real();
      }
      break;
    case Axis::Z:
      for (std::uint64_t i = 0; i < dim; ++i)
        acc += ((i & mask) ? 1.0 : -1.0) * std::norm(a[i]);
      break;
  }
  return static_cast<double>(acc);
}

namespace {

// +1/-1 for cyclic/anticyclic (a,b), 0 diagonal; c = remaining axis
inline int levi_civita(Axis a, Axis b, Axis& c) {
  const int ia = static_cast<int>(a), ib = static_cast<int>(b);
  if (ia == ib) return 0;
  c = static_cast<Axis>(3 - ia - ib);
  return ((ib - ia + 3) % 3 == 1) ? 1 : -1;
}

cplx pauli_pair_general(const StateVector& state, Axis alpha, int l, Axis beta, int lp) {
  const std::uint64_t dim = state.dim();
  const std::uint64_t mb = std::uint64_t(1) << (lp - 1);
  const std::uint64_t ma = std::uint64_t(1) << (l - 1);
  const auto& a = state.amps();
  long double re = 0.0L, im = 0.0L;
  for (std::uint64_t i = 0; i < dim; ++i) {
    cplx f(1.0, 0.0);
    std::uint64_t j = i;
    sigma_action(beta, mb, i, j, f);
    std::uint64_t k = j;
    sigma_action(alpha, ma, j, k, f);
    const cplx t = std::conj(a[k]) * f * a[i];
    re += t.real();
    im += t.imag();
  }
  return {static_cast<double>(re), static_cast<double>(im)};
}

}  // namespace

cplx pauli_pair_expectation(const StateVector& state, Axis alpha, int l, Axis beta, int lp) {
  const int n = state.n_qubits();
  if (l < 1 || l > n || lp < 1 || lp > n)
    throw ConfigError("pauli_pair_expectation: site out of range");
  if (l == lp) {
    if (alpha == beta) return {1.0, 0.0};
    Axis gamma;
    const int eps = levi_civita(alpha, beta, gamma);
    return cplx(0.0, double(eps)) * pauli_expectation(state, gamma, l);
  }
  // Canonical argument order makes the hermitian symmetry
  // <s_a(l) s_b(l')> = conj(<s_b(l') s_a(l)>) hold exactly in floating point.
  if (lp < l || (lp == l && static_cast<int>(beta) < static_cast<int>(alpha)))
    return std::conj(pauli_pair_general(state, beta, lp, alpha, l));
  return pauli_pair_general(state, alpha, l, beta, lp);
}

cplx state_inner(const StateVector& a, const StateVector& b) {
  if (a.n_qubits() != b.n_qubits()) throw ConfigError("state_inner: dimension mismatch");
  return inner(a.amps(), b.amps());
}

namespace {
constexpr char kMagic[4] = {'M', 'V', 'I', 'S'};
constexpr std::uint16_t kVersion = 1;
}  // namespace

void dump_state(const StateVector& state, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  char header[16] = {0};
  std::memcpy(header, kMagic, 4);
  const std::uint16_t ver = kVersion;
  const std::uint16_t nq = static_cast<std::uint16_t>(state.n_qubits());
  std::memcpy(header + 4, &ver, 2);
  std::memcpy(header + 6, &nq, 2);
  f.write(header, 16);
  for (const cplx& a : state.amps()) {
    const double re = a.real(), im = a.imag();
    f.write(reinterpret_cast<const char*>(&re), 8);
    f.write(reinterpret_cast<const char*>(&im), 8);
  }
  if (!f) throw NumericalError("short write to '" + path + "'");
}

StateVector load_state(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  char header[16];
  f.read(header, 16);
  if (!f || std::memcmp(header, kMagic, 4) != 0)
    throw ConfigError("'" + path + "' is not a MVIS state dump (bad magic)");
  std::uint16_t ver, nq;
  std::memcpy(&ver, header + 4, 2);
  std::memcpy(&nq, header + 6, 2);
  if (ver != kVersion) throw ConfigError("unsupported state dump version " + std::to_string(ver));
  if (nq < 1 || nq > kMaxQubits) throw ConfigError("state dump has invalid qubit count");
  const std::uint64_t dim = std::uint64_t(1) << nq;
  std::vector<cplx> amps(dim);
  for (std::uint64_t i = 0; i < dim; ++i) {
    double re, im;
    f.read(reinterpret_cast<char*>(&re), 8);
    f.read(reinterpret_cast<char*>(&im), 8);
    if (!f) throw ConfigError("truncated state dump '" + path + "'");
    amps[i] = {re, im};
  }
  return StateVector(static_cast<int>(nq), std::move(amps), NormPolicy::Unit);
}

}  // namespace mvis
