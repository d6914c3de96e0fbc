#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "mvis/statevec.hpp"
#include "oracle.hpp"

using namespace mvis;

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

TEST_CASE("identity unitary leaves any state unchanged") {
  const StateVector s = oracle::random_state(4, 11);
  const StateVector t = apply_local_unitary(s, 2, LocalUnitary::identity());
  for (std::size_t i = 0; i < s.dim(); ++i) CHECK(s.amp(i) == t.amp(i));
}

TEST_CASE("sigma_x on site 1 moves |0...0> to |0...01>") {
  const StateVector s(5, 0);
  LocalUnitary sx{{0.0, 1.0, 1.0, 0.0}};
  const StateVector t = apply_local_unitary(s, 1, sx);
  CHECK(std::abs(t.amp(1) - 1.0) < 1e-15);
  CHECK(std::abs(t.amp(0)) < 1e-15);
}

TEST_CASE("x-eigenbasis rotation of |0^4> gives binomial weights by popcount") {
  // rotate each site into the sigma_x eigenbasis; squared amplitudes grouped
  // by popcount must be C(N,k)/2^N
  const int n = 4;
  StateVector s(n, 0);
  const LocalUnitary h{{kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2}};
  for (int l = 1; l <= n; ++l) s = apply_local_unitary(s, l, h);

  // dense 2^N oracle of the same rotation
  oracle::Mat u = oracle::Mat::Identity(1, 1);
  oracle::Mat h2(2, 2);
  h2 << kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2;
  for (int l = n; l >= 1; --l) u = oracle::kron(u, h2);
  const oracle::Vec dense = u * oracle::state_vec(StateVector(n, 0));
  for (std::size_t i = 0; i < s.dim(); ++i) CHECK(std::abs(s.amp(i) - dense(i)) < 1e-12);

  double by_popcount[5] = {0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < s.dim(); ++i)
    by_popcount[std::popcount(i)] += std::norm(s.amp(i));
  const double binom[5] = {1, 4, 6, 4, 1};
  for (int k = 0; k <= 4; ++k) CHECK(by_popcount[k] == doctest::Approx(binom[k] / 16.0));
}

TEST_CASE("apply_local_unitary rejects bad input") {
  const StateVector s(3, 0);
  CHECK_THROWS_AS(apply_local_unitary(s, 0, LocalUnitary::identity()), ConfigError);
  CHECK_THROWS_AS(apply_local_unitary(s, 4, LocalUnitary::identity()), ConfigError);
  LocalUnitary bad{{1.0, 0.0, 0.0, 1.0 + 1e-6}};
  CHECK_THROWS_AS(apply_local_unitary(s, 1, bad), ConfigError);
}

TEST_CASE("pauli_pair_expectation on |0^N>") {
  const StateVector s(3, 0);
  SUBCASE("same site xy gives i<sz> = -i") {
    const cplx v = pauli_pair_expectation(s, Axis::X, 1, Axis::Y, 1);
    CHECK(std::abs(v - cplx(0.0, -1.0)) < 1e-14);
    // dense 2-qubit oracle
    const StateVector s2(2, 0);
    const oracle::Vec psi = oracle::state_vec(s2);
    const oracle::Mat m =
        oracle::site_op(2, 1, oracle::pauli(Axis::X)) * oracle::site_op(2, 1, oracle::pauli(Axis::Y));
    CHECK(std::abs(pauli_pair_expectation(s2, Axis::X, 1, Axis::Y, 1) - psi.dot(m * psi)) <
          1e-14);
  }
  SUBCASE("zz cross-site gives +1") {
    CHECK(pauli_pair_expectation(s, Axis::Z, 1, Axis::Z, 2).real() == doctest::Approx(1.0));
  }
}

TEST_CASE("cat state zz correlations are +1 for any site pair") {
  const StateVector cat = cat_state(5);
  for (int l = 1; l <= 5; ++l)
    for (int lp = 1; lp <= 5; ++lp) {
      if (l == lp) continue;
      const cplx v = pauli_pair_expectation(cat, Axis::Z, l, Axis::Z, lp);
      CHECK(std::abs(v - cplx(1.0, 0.0)) < 1e-14);
    }
}

TEST_CASE("pauli pair matches the dense oracle on random states") {
  for (int n : {2, 3, 4}) {
    const StateVector s = oracle::random_state(n, 100 + n);
    const oracle::Vec psi = oracle::state_vec(s);
    for (int l = 1; l <= n; ++l)
      for (int lp = 1; lp <= n; ++lp)
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            const oracle::Mat m = oracle::site_op(n, l, oracle::pauli(Axis(a))) *
                                  oracle::site_op(n, lp, oracle::pauli(Axis(b)));
            const cplx want = psi.dot(m * psi);
            const cplx got = pauli_pair_expectation(s, Axis(a), l, Axis(b), lp);
            CHECK(std::abs(want - got) < 1e-12);
          }
  }
}

TEST_CASE("hermitian symmetry of pair moments is exact") {
  const StateVector s = oracle::random_state(5, 7);
  for (int l = 1; l <= 5; ++l)
    for (int lp = 1; lp <= 5; ++lp)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const cplx v = pauli_pair_expectation(s, Axis(a), l, Axis(b), lp);
          const cplx w = pauli_pair_expectation(s, Axis(b), lp, Axis(a), l);
          CHECK(v == std::conj(w));  // bitwise, by canonical evaluation order
        }
}

TEST_CASE("product states factor two-site moments") {
  const double th = 0.7, ph = 0.3;
  const StateVector s =
      product_state(4, std::cos(th), std::sin(th) * cplx(std::cos(ph), std::sin(ph)));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const cplx pair = pauli_pair_expectation(s, Axis(a), 1, Axis(b), 3);
      const double m1 = pauli_expectation(s, Axis(a), 1);
      const double m2 = pauli_expectation(s, Axis(b), 3);
      CHECK(std::abs(pair - m1 * m2) < 1e-12);
    }
}

TEST_CASE("norm drift stays below 1e-12 over 100 random unitaries") {
  StateVector s = oracle::random_state(6, 42);
  NormalSampler rng(43);
  for (int it = 0; it < 100; ++it) {
    // random unitary via normalized rows of a random 2x2 (Gram-Schmidt)
    cplx a = rng.complex_normal(), b = rng.complex_normal();
    const double na = std::sqrt(std::norm(a) + std::norm(b));
    a /= na;
    b /= na;
    LocalUnitary u{{a, b, -std::conj(b), std::conj(a)}};
    const int site = 1 + int(rng.next_u64() % 6);
    s = apply_local_unitary(s, site, u);
  }
  CHECK(std::abs(s.norm() - 1.0) < 1e-12);
}

TEST_CASE("binary dump round trip is bit exact") {
  const StateVector s = oracle::random_state(5, 77);
  const std::string path = (std::filesystem::temp_directory_path() / "mvis_sv_test.mvis").string();
  dump_state(s, path);
  const StateVector t = load_state(path);
  REQUIRE(t.n_qubits() == 5);
  for (std::size_t i = 0; i < s.dim(); ++i) CHECK(s.amp(i) == t.amp(i));
  std::filesystem::remove(path);
}

TEST_CASE("load_state rejects a non-MVIS file") {
  const std::string path = (std::filesystem::temp_directory_path() / "mvis_bad.mvis").string();
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("not a state dump at all", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_state(path), ConfigError);
  std::filesystem::remove(path);
}
