#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mvis/common.hpp"

namespace mvis {

// Qubit convention used throughout: site l is bit l-1 of the basis index
// (site 1 = least significant bit), and
//   sigma_z|0> = -|0>,  sigma_z|1> = +|1>.
// In this basis sigma_z = diag(-1,+1), sigma_x = [[0,1],[1,0]],
// sigma_y = [[0,i],[-i,0]].

inline constexpr int kMaxQubits = 24;

struct LocalUnitary {
  // row-major 2x2: u[0]=u00 u[1]=u01 u[2]=u10 u[3]=u11
  std::array<cplx, 4> u;

  double unitarity_defect() const;  // Frobenius norm of u^dag u - 1
  LocalUnitary dagger() const;
  static LocalUnitary identity();
};

// Unit: require norm 1 within 1e-12. Normalize: rescale (error on zero).
// Raw: accept as-is (projections, H|psi>, and other intermediates).
enum class NormPolicy { Unit, Normalize, Raw };

class StateVector {
 public:
  StateVector() = default;
  // Initializes |basis_index> on n qubits.
  explicit StateVector(int n_qubits, std::uint64_t basis_index = 0);
  // Takes ownership of amplitudes.
  StateVector(int n_qubits, std::vector<cplx> amplitudes,
              NormPolicy policy = NormPolicy::Unit);

  int n_qubits() const { return n_qubits_; }
  std::uint64_t dim() const { return std::uint64_t(1) << n_qubits_; }
  const std::vector<cplx>& amps() const { return amps_; }
  std::vector<cplx>& amps() { return amps_; }
  cplx amp(std::uint64_t idx) const { return amps_[idx]; }

  double norm() const;

 private:
  int n_qubits_ = 0;
  std::vector<cplx> amps_;
};

// Applies u to one site (1-based). Errors: site out of range, non-unitary u
// (Frobenius deviation > 1e-10). Pure: the input is left untouched.
StateVector apply_local_unitary(const StateVector& state, int site, const LocalUnitary& u);

// In-place variant used by the hot loops.
void apply_local_unitary_inplace(std::vector<cplx>& amps, int n_qubits, int site,
                                 const LocalUnitary& u);

// |out> = sigma_axis(site) |state>
StateVector sigma_apply(const StateVector& state, Axis axis, int site);

// <state| sigma_axis(site) |state>; real up to rounding, returned as such.
double pauli_expectation(const StateVector& state, Axis axis, int site);

// Uncentered moment <psi| sigma_alpha(l) sigma_beta(l') |psi>, computed in a
// single pass over the amplitudes. Same-site products use the algebra
// sigma_a sigma_b = delta_ab + i eps_abc sigma_c. Swapped argument orders
// return exact complex conjugates of one another.
cplx pauli_pair_expectation(const StateVector& state, Axis alpha, int l, Axis beta, int lp);

cplx state_inner(const StateVector& a, const StateVector& b);

// Binary dump: 16-byte header {magic "MVIS", u16 version, u16 n_qubits,
// 8 reserved bytes}, then 2^N little-endian (re,im) float64 pairs.
void dump_state(const StateVector& state, const std::string& path);
StateVector load_state(const std::string& path);

}  // namespace mvis
