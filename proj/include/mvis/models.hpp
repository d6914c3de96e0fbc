#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mvis/statevec.hpp"

namespace mvis {

struct LatticeGraph {
  int n_sites = 0;
  std::vector<std::pair<int, int>> edges;  // unordered site pairs, 1-based
  std::vector<int> sublattice_sign;        // +-1 per site; all +1 when unstaggered

  bool staggered() const;
  void validate() const;  // no self-loops/duplicates; signs 2-color every edge when staggered
};

// Nearest-neighbor chain. staggered=true assigns (-1)^l sublattice signs and
// rejects an odd periodic ring (frustrated staggering).
LatticeGraph lattice_chain(int n, bool periodic, bool staggered = true);

// rows x cols rectangle, row-major site numbering, checkerboard signs.
LatticeGraph lattice_rect(int rows, int cols, bool periodic, bool staggered = true);

// "chain:N:pbc|obc" or "rect:RxC:pbc|obc"
LatticeGraph lattice_from_string(const std::string& spec, bool staggered = true);

LatticeGraph lattice_from_json_file(const std::string& path);
void lattice_to_json_file(const LatticeGraph& g, const std::string& path);

enum class HamiltonianKind { XY, Heisenberg };

// H|psi> in the full 2^N space, matrix-free over the edge list.
//   XY:         -sum_edges (sx sx + sy sy)
//   Heisenberg: +sum_edges (sx sx + sy sy + sz sz)
StateVector apply_hamiltonian(HamiltonianKind kind, const LatticeGraph& g,
                              const StateVector& psi);

struct LanczosConfig {
  std::uint64_t seed = 1;
  int max_iter = 500;
  double ritz_tol = 1e-13;      // stop when the lowest Ritz value moves less than this
  double residual_tol = 1e-10;  // and the residual estimate is below this
  // Total sigma_z sector (sum over sites of +-1). By default the search is
  // restricted to the 0 sector for even N; odd N runs in the full space.
  std::optional<int> mz_sector = std::nullopt;
  bool use_default_sector = true;
};

struct GroundStateResult {
  StateVector state;
  double energy = 0.0;
  int iterations = 0;
  double residual = 0.0;  // ||H psi - E psi|| verified in the full space
  std::optional<int> sector_used;
};

// Lanczos with full reorthogonalization and a seed-fixed start vector.
// Errors on non-convergence, and on a (near-)degenerate ground level when no
// sector restriction is in effect.
GroundStateResult ground_state(HamiltonianKind kind, const LatticeGraph& lattice,
                               const LanczosConfig& cfg = {});

struct ShorLayout {
  std::int64_t I = 0;  // integer to factor
  std::int64_t x = 0;  // base, coprime to I
  int N1 = 0;          // first register: sites 1..N1 hold a (LSB at site 1)
  int N2 = 0;          // second register: sites N1+1..N1+N2 hold x^a mod I
  std::int64_t r = 0;  // multiplicative order of x mod I
  int total_qubits() const { return N1 + N2; }
};

// The state sum_a |x^a mod I>_2 |a>_1 / sqrt(2^N1), right after modular
// exponentiation.
std::pair<StateVector, ShorLayout> shor_me_state(std::int64_t I, std::int64_t x);

struct GroverParams {
  int n_qubits = 0;
  int k = 0;            // iteration count used
  double theta = 0.0;   // cos(theta/2) = sqrt((2^N-1)/2^N)
  int R = 0;            // closest integer to arccos(sqrt(2^-N)) / theta
  double delta = 0.1;   // margin constant, diagnostic only
  double margin_value = 0.0;  // (4k+2)/sqrt(2^N)
  bool margin_ok = true;      // delta <= margin_value <= pi - delta
};

// Closed-form Grover iterate with the solution fixed at |1^N>. If k is
// omitted it follows the R/2 rule (R/2 for even R, (R+1)/2 for odd R).
// A violated margin sets margin_ok=false (warning, not an error).
std::pair<StateVector, GroverParams> grover_state(int n_qubits, std::optional<int> k = {});

// Independent construction: k applications of the Grover operator to the
// uniform superposition. Used to cross-check the closed form.
StateVector grover_state_iterated(int n_qubits, int k);

StateVector cat_state(int n);
// Tensor power of one normalized single-qubit amplitude pair (a0, a1).
StateVector product_state(int n, cplx a0, cplx a1);

}  // namespace mvis
