#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mvis/pipeline.hpp"
#include "oracle.hpp"

using namespace mvis;

TEST_CASE("VCM of |0^N> is block diagonal with the xy pair block") {
  const int n = 4;
  const StateVector s = product_state(n, 1.0, 0.0);
  const Vcm v = compute_vcm(s);
  // per-site xy block [[1, -i], [i, 1]], z row/column zero
  for (int l = 1; l <= n; ++l) {
    const int x = coeff_index(l, Axis::X), y = coeff_index(l, Axis::Y),
              z = coeff_index(l, Axis::Z);
    CHECK(std::abs(v.entries(x, x) - 1.0) < 1e-12);
    CHECK(std::abs(v.entries(y, y) - 1.0) < 1e-12);
    CHECK(std::abs(v.entries(x, y) - cplx(0, -1)) < 1e-12);
    CHECK(std::abs(v.entries(y, x) - cplx(0, 1)) < 1e-12);
    for (int c = 0; c < 3 * n; ++c) CHECK(std::abs(v.entries(z, c)) < 1e-12);
  }
  const VcmSpectrum sp = spectrum(v);
  for (int i = 0; i < n; ++i) CHECK(sp.eigenvalues[i] == doctest::Approx(2.0).epsilon(1e-12));
  for (int i = n; i < 3 * n; ++i) CHECK(std::abs(sp.eigenvalues[i]) < 1e-10);
  // dense oracle at N=2
  const StateVector s2 = product_state(2, 1.0, 0.0);
  const Vcm v2 = compute_vcm(s2);
  const oracle::Mat vd = oracle::dense_vcm(s2);
  CHECK((v2.entries - vd).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("VCM of the cat state has the all-ones zz block and e1 = N") {
  const int n = 6;
  const Vcm v = compute_vcm(cat_state(n));
  for (int l = 1; l <= n; ++l)
    for (int lp = 1; lp <= n; ++lp)
      CHECK(std::abs(v.entries(coeff_index(l, Axis::Z), coeff_index(lp, Axis::Z)) - 1.0) <
            1e-12);
  const VcmSpectrum sp = spectrum(v);
  CHECK(sp.eigenvalues[0] == doctest::Approx(double(n)).epsilon(1e-12));
  CHECK(sp.eigenvalues[1] <= 2.0 + 1e-12);
  // e1 eigenvector is uniform over z (entries of modulus 1 after the sqrt(N) scaling)
  for (int l = 1; l <= n; ++l)
    CHECK(std::abs(std::abs(sp.eigenvectors(coeff_index(l, Axis::Z), 0)) - 1.0) < 1e-8);
  // dense oracle at N=4
  const Vcm v4 = compute_vcm(cat_state(4));
  CHECK((v4.entries - oracle::dense_vcm(cat_state(4))).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("VCM invariants on random states") {
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + trial % 5;
    const StateVector s = oracle::random_state(n, 500 + trial);
    const Vcm v = compute_vcm(s);
    CHECK(v.hermiticity_defect < 1e-12);
    CHECK((v.entries - v.entries.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(v.trace_real() <= 3.0 * n + 1e-9);
    for (int r = 0; r < 3 * n; ++r) {
      CHECK(v.entries(r, r).real() >= -1e-12);
      CHECK(v.entries(r, r).real() <= 1.0 + 1e-12);
    }
    const VcmSpectrum sp = spectrum(v);
    CHECK(sp.eigenvalues.back() >= -1e-9);  // PSD
    CHECK(sp.max_residual <= 1e-8 * n);
    CHECK((v.entries - oracle::dense_vcm(s)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("spectrum of the zero matrix is all zeros") {
  Vcm v;
  v.n_sites = 3;
  v.entries = Eigen::MatrixXcd::Zero(9, 9);
  const VcmSpectrum sp = spectrum(v);
  for (double e : sp.eigenvalues) CHECK(e == 0.0);
}

TEST_CASE("operator_variance: quadratic form vs direct evaluation") {
  SUBCASE("cat state, Mz -> N^2; |0^N>, Mz -> 0") {
    const int n = 5;
    const Vcm vc = compute_vcm(cat_state(n));
    CHECK(operator_variance(vc, uniform_op(Axis::Z, n)) ==
          doctest::Approx(double(n) * n).epsilon(1e-12));
    const Vcm vp = compute_vcm(product_state(n, 1.0, 0.0));
    CHECK(std::abs(operator_variance(vp, uniform_op(Axis::Z, n))) < 1e-12);
  }
  SUBCASE("dual-path equality on random input") {
    for (int trial = 0; trial < 10; ++trial) {
      const int n = 2 + trial % 4;
      const StateVector s = oracle::random_state(n, 900 + trial);
      const Vcm v = compute_vcm(s);
      const AdditiveOperator a = oracle::random_hermitian_op(n, 950 + trial);
      const double q = operator_variance(v, a);
      const double d = operator_variance_direct(s, a);
      CHECK(std::abs(q - d) <= 1e-9 * std::max(1.0, std::abs(d)));
    }
  }
  SUBCASE("general non-hermitian moment <DA^dag DA>") {
    const int n = 3;
    const StateVector s = oracle::random_state(n, 321);
    const Vcm v = compute_vcm(s);
    AdditiveOperator a;
    a.coeffs.resize(3 * n);
    NormalSampler rng(77);
    for (auto& c : a.coeffs) c = rng.complex_normal();
    a.hermitian = false;
    const double q = operator_variance(v, a);
    const double d = operator_variance_direct(s, a);
    CHECK(std::abs(q - d) <= 1e-9 * std::max(1.0, std::abs(d)));
    CHECK(q >= -1e-10);
  }
}

TEST_CASE("Rayleigh bound: e1*N >= variance of any normalized additive operator") {
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 5;
    const StateVector s = oracle::random_state(n, 1500 + trial);
    const Vcm v = compute_vcm(s);
    const VcmSpectrum sp = spectrum(v);
    const AdditiveOperator a = oracle::random_hermitian_op(n, 1600 + trial);
    CHECK(operator_variance(v, a) <= sp.eigenvalues[0] * n + 1e-9);
  }
}

TEST_CASE("estimate_p") {
  SUBCASE("cat family is exactly p = 2") {
    const PEstimate p = estimate_p(scenario_family("cat", 1), {8, 10, 12});
    CHECK(std::abs(p.p_raw - 2.0) < 1e-10);
    CHECK(p.slope_stderr < 1e-10);
    CHECK(p.classified_p2);
  }
  SUBCASE("product family is exactly p = 1") {
    const PEstimate p = estimate_p(scenario_family("separable", 1), {8, 10, 12});
    CHECK(std::abs(p.p_raw - 1.0) < 1e-10);
    CHECK_FALSE(p.classified_p2);
  }
  SUBCASE("grover family classifies p=2 at desk scale") {
    const PEstimate p = estimate_p(scenario_family("grover", 1), {8, 10, 12});
    CHECK(p.p_raw >= 1.75);
    CHECK(p.classified_p2);
  }
  SUBCASE("fewer than 3 sizes is an error") {
    CHECK_THROWS_AS(estimate_p(scenario_family("cat", 1), {8, 10}), ConfigError);
  }
  SUBCASE("clamping: p stays in [1,2] while p_raw is reported") {
    const PEstimate p = estimate_p_from_points({4, 8, 16}, {1.0, 4.2, 17.0});
    CHECK(p.p_raw > 2.0);
    CHECK(p.p == 2.0);
  }
}

TEST_CASE("extract_S reproduces the worked examples") {
  SUBCASE("XY 2x7 ground state -> {Mx, My}") {
    const LatticeGraph g = lattice_rect(2, 7, false);
    const StateVector psi = ground_state(HamiltonianKind::XY, g).state;
    const VcmSpectrum sp = spectrum(compute_vcm(psi, 2));
    const auto dict = make_pattern_dictionary(14, g.sublattice_sign, {});
    const SetExtraction ex = extract_S(sp, 0.1, dict);
    REQUIRE(ex.members.size() == 2);
    CHECK(ex.members[0].pattern_overlap >= 0.98);
    std::vector<std::vector<cplx>> got, want;
    for (const auto& m : ex.members) got.push_back(m.op.coeffs);
    want.push_back(uniform_op(Axis::X, 14).coeffs);
    want.push_back(uniform_op(Axis::Y, 14).coeffs);
    CHECK(subspace_overlap(want, got) >= 0.99);
    for (const auto& m : ex.members) CHECK(m.op.hermitian);
  }
  SUBCASE("Heisenberg 2x4 -> staggered triple") {
    const LatticeGraph g = lattice_rect(2, 4, false);
    const StateVector psi = ground_state(HamiltonianKind::Heisenberg, g).state;
    const VcmSpectrum sp = spectrum(compute_vcm(psi, 2));
    const auto dict = make_pattern_dictionary(8, g.sublattice_sign, {});
    const SetExtraction ex = extract_S(sp, 0.1, dict);
    REQUIRE(ex.members.size() == 3);
    std::vector<std::vector<cplx>> got, want;
    for (const auto& m : ex.members) got.push_back(m.op.coeffs);
    for (int ax = 0; ax < 3; ++ax)
      want.push_back(staggered_op(Axis(ax), g.sublattice_sign).coeffs);
    CHECK(subspace_overlap(want, got) >= 0.99);
  }
  SUBCASE("Grover N=12 -> single x-z diagonal operator") {
    auto [s, gp] = grover_state(12);
    (void)gp;
    const VcmSpectrum sp = spectrum(compute_vcm(s, 2));
    const SetExtraction ex = extract_S(sp, 0.1, make_pattern_dictionary(12, {}, {}));
    REQUIRE(ex.members.size() == 1);
    const auto& m = ex.members[0];
    CHECK(m.from_split);  // the raw eigenvector carries the small imaginary y part
    const double t = 1.0 / std::sqrt(2.0);
    for (int l = 1; l <= 12; ++l) {
      CHECK(std::abs(m.op.coeff(l, Axis::X).real() + t) <= 0.05);
      CHECK(std::abs(m.op.coeff(l, Axis::Y).real()) <= 0.05);
      CHECK(std::abs(m.op.coeff(l, Axis::Z).real() - t) <= 0.05);
    }
  }
  SUBCASE("empty S is a valid p<2-candidate result") {
    const VcmSpectrum sp = spectrum(compute_vcm(product_state(6, 1.0, 0.0)));
    const SetExtraction ex = extract_S(sp, 0.5, make_pattern_dictionary(6, {}, {}));
    CHECK(ex.members.empty());
    CHECK_FALSE(ex.p2_candidate);
  }
  SUBCASE("every S member fluctuates macroscopically (finite-size proxy)") {
    const LatticeGraph g = lattice_rect(2, 5, false);
    const GroundStateResult r = ground_state(HamiltonianKind::Heisenberg, g);
    const Vcm v = compute_vcm(r.state, 2);
    const VcmSpectrum sp = spectrum(v);
    const SetExtraction ex =
        extract_S(sp, 0.1, make_pattern_dictionary(10, g.sublattice_sign, {}));
    REQUIRE(!ex.members.empty());
    for (const auto& m : ex.members) {
      CHECK(m.variance >= 0.1 * 10.0 * 10.0);
      // reported variance agrees with the direct quadratic form
      CHECK(m.variance == doctest::Approx(operator_variance(v, m.op)).epsilon(1e-8));
    }
  }
}

TEST_CASE("Shor S extraction matches the finite-N coefficient vectors") {
  auto [s, lay] = shor_me_state(21, 5);
  const VcmSpectrum sp = spectrum(compute_vcm(s, 2));
  std::vector<int> signs;
  for (int l = 1; l <= 14; ++l) signs.push_back(l % 2 == 0 ? 1 : -1);
  const SetExtraction ex = extract_S(sp, 0.1, make_pattern_dictionary(14, signs, lay));
  REQUIRE(ex.members.size() == 2);
  const AdditiveOperator tc1 = shor_reg1_x_op(lay);
  const AdditiveOperator tc2 = shor_reg1_y_staggered_op(lay);
  double best1 = 0, best2 = 0;
  for (const auto& m : ex.members) {
    auto ov = [&](const AdditiveOperator& ref) {
      cplx acc(0, 0);
      for (std::size_t i = 0; i < ref.coeffs.size(); ++i)
        acc += std::conj(ref.coeffs[i]) * m.op.coeffs[i];
      return std::norm(acc) / (norm_sq(ref.coeffs) * norm_sq(m.op.coeffs));
    };
    best1 = std::max(best1, ov(tc1));
    best2 = std::max(best2, ov(tc2));
    // support confined to first-register sites 2..N1
    for (int l = 1; l <= 14; ++l)
      for (int ax = 0; ax < 3; ++ax) {
        const double mag = std::abs(m.op.coeff(l, Axis(ax)));
        if (l >= 2 && l <= lay.N1) continue;
        CHECK(mag < 1e-8);
      }
  }
  CHECK(best1 >= 0.95);
  CHECK(best2 >= 0.95);
  // the full-register Mx also fluctuates macroscopically
  CHECK(macroscopic_component_weight(uniform_op(Axis::X, 14), sp) >= 0.5);
}

TEST_CASE("macroscopic_component_weight") {
  const StateVector s = cat_state(5);
  const VcmSpectrum sp = spectrum(compute_vcm(s));
  SUBCASE("the e1 eigenvector itself has weight 1") {
    AdditiveOperator a;
    a.coeffs.assign(sp.eigenvectors.col(0).data(), sp.eigenvectors.col(0).data() + 15);
    CHECK(macroscopic_component_weight(a, sp) == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("a zero-eigenvalue eigenvector has weight 0") {
    AdditiveOperator a;
    a.coeffs.assign(sp.eigenvectors.col(14).data(), sp.eigenvectors.col(14).data() + 15);
    CHECK(macroscopic_component_weight(a, sp) == doctest::Approx(0.0).epsilon(1e-10));
  }
  SUBCASE("zero operator is rejected") {
    AdditiveOperator a;
    a.coeffs.assign(15, cplx(0, 0));
    CHECK_THROWS_AS(macroscopic_component_weight(a, sp), ConfigError);
  }
}

TEST_CASE("macroscopically fluctuating random operators overlap S") {
  // a random hermitian additive operator with variance >= gamma*N^2 must
  // have macroscopic component weight >= 0.1
  int hits = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 6;
    const StateVector s = cat_state(n);
    const Vcm v = compute_vcm(s);
    const VcmSpectrum sp = spectrum(v);
    AdditiveOperator a = oracle::random_hermitian_op(n, 3000 + trial);
    if (operator_variance(v, a) < 0.1 * n * n) continue;
    ++hits;
    CHECK(macroscopic_component_weight(a, sp) >= 0.1);
  }
  CHECK(hits > 0);  // the draws actually exercised the property
}

TEST_CASE("PSD of the VCM holds over 200 random states") {
  int count = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 7;  // up to N=8
    const VcmSpectrum sp = spectrum(compute_vcm(oracle::random_state(n, 7000 + trial)));
    CHECK(sp.eigenvalues.back() >= -1e-9);
    ++count;
  }
  CHECK(count == 200);
}
