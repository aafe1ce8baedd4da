#include <complex>

#include "doctest.h"
#include "obsim/operators.hpp"
#include "support/dense_oracle.hpp"
#include "support/test_util.hpp"

using obsim::BasisLayout;
using obsim::Complex;
using obsim::Observable;
using obsim::StateVector;
using obsim::SystemParams;

namespace {

SystemParams generic_params() {
  SystemParams p;
  p.n_atoms = 2;
  p.g = 1.3;
  p.kappa = 0.5;
  p.gamma = 1.0;
  p.delta_m = 0.7;
  p.delta_a = -0.4;
  p.eta = 0.9;
  return p;
}

}  // namespace

TEST_CASE("basis layout indexing round-trips") {
  BasisLayout layout(3, 7);
  CHECK(layout.atom_dim == 8);
  CHECK(layout.dim_total == 56);
  for (int n = 0; n < layout.dim_mode; ++n) {
    for (std::uint32_t b = 0; b < layout.atom_dim; ++b) {
      const auto [fock, bits] = layout.decode(layout.index(n, b));
      CHECK(fock == n);
      CHECK(bits == b);
    }
  }
  CHECK_THROWS_AS(BasisLayout(0, 4), std::invalid_argument);
  CHECK_THROWS_AS(BasisLayout(2, 1), std::invalid_argument);
}

TEST_CASE("annihilation lowers Fock states with sqrt factor") {
  BasisLayout layout(1, 6);
  for (int n = 1; n < 6; ++n) {
    StateVector psi = StateVector::basis_state(layout, n, 0);
    StateVector lowered = obsim::apply_annihilation(psi);
    for (std::size_t f = 0; f < lowered.size(); ++f) {
      const auto [fock, bits] = layout.decode(f);
      const double expected =
          (fock == n - 1 && bits == 0) ? std::sqrt(double(n)) : 0.0;
      CHECK(lowered.amp[f].real() == doctest::Approx(expected));
      CHECK(lowered.amp[f].imag() == 0.0);
    }
  }
  StateVector vac = StateVector::basis_state(layout, 0, 0);
  CHECK(obsim::apply_annihilation(vac).norm2() == 0.0);
}

TEST_CASE("mode operators match their dense counterparts") {
  BasisLayout layout(2, 6);
  StateVector psi = testutil::random_state(layout, 11);
  const Eigen::VectorXcd v = testutil::to_eigen(psi);

  const Eigen::VectorXcd a_ref = oracle::annihilation_full(6, 2) * v;
  CHECK((testutil::to_eigen(obsim::apply_annihilation(psi)) - a_ref).norm() <
        1e-14);

  const Eigen::VectorXcd ad_ref =
      oracle::annihilation_full(6, 2).adjoint() * v;
  CHECK((testutil::to_eigen(obsim::apply_creation(psi)) - ad_ref).norm() <
        1e-14);
}

TEST_CASE("sigma_minus acts on the addressed atom only") {
  BasisLayout layout(2, 3);
  // Atom 0 excited, atom 1 in the ground state: bitmask 0b01.
  StateVector psi = StateVector::basis_state(layout, 0, 0b01);

  StateVector on_ground = obsim::apply_sigma_minus(psi, 1);
  CHECK(on_ground.norm2() == 0.0);

  StateVector on_excited = obsim::apply_sigma_minus(psi, 0);
  CHECK(on_excited.amp[layout.index(0, 0)] == Complex{1.0, 0.0});
  CHECK(on_excited.norm2() == doctest::Approx(1.0));

  for (int atom = 0; atom < 2; ++atom) {
    StateVector rnd = testutil::random_state(layout, 23 + atom);
    const Eigen::VectorXcd ref =
        oracle::sigma_minus_full(3, 2, atom) * testutil::to_eigen(rnd);
    CHECK((testutil::to_eigen(obsim::apply_sigma_minus(rnd, atom)) - ref)
              .norm() < 1e-14);
    const Eigen::VectorXcd ref_plus =
        oracle::sigma_minus_full(3, 2, atom).adjoint() *
        testutil::to_eigen(rnd);
    CHECK((testutil::to_eigen(obsim::apply_sigma_plus(rnd, atom)) - ref_plus)
              .norm() < 1e-14);
  }
  CHECK_THROWS_AS(obsim::apply_sigma_minus(psi, 2), std::invalid_argument);
}

TEST_CASE("commutator [a, a_dagger] is the identity away from truncation") {
  BasisLayout layout(2, 8);
  StateVector psi = testutil::random_state(layout, 5);
  // Zero the top two Fock levels so the truncated a a^dag term is exact.
  for (std::uint32_t b = 0; b < layout.atom_dim; ++b) {
    psi.amp[layout.index(6, b)] = Complex{0.0, 0.0};
    psi.amp[layout.index(7, b)] = Complex{0.0, 0.0};
  }
  StateVector ad = obsim::apply_creation(psi);
  StateVector a_ad = obsim::apply_annihilation(ad);
  StateVector a = obsim::apply_annihilation(psi);
  StateVector ad_a = obsim::apply_creation(a);
  double max_err = 0.0;
  for (std::size_t f = 0; f < psi.size(); ++f) {
    max_err = std::max(max_err,
                       std::abs(a_ad.amp[f] - ad_a.amp[f] - psi.amp[f]));
  }
  CHECK(max_err < 1e-13);
}

TEST_CASE("hamiltonian application matches the dense matrix") {
  const SystemParams p = generic_params();
  BasisLayout layout(p.n_atoms, 5);
  const oracle::Matrix h = oracle::hamiltonian(p, 5);
  CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-14);

  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    StateVector psi = testutil::random_state(layout, seed);
    const Eigen::VectorXcd ref = h * testutil::to_eigen(psi);
    StateVector got = obsim::apply_hamiltonian(psi, p);
    CHECK((testutil::to_eigen(got) - ref).norm() < 1e-13);
  }
}

TEST_CASE("hamiltonian is hermitian as applied") {
  const SystemParams p = generic_params();
  BasisLayout layout(p.n_atoms, 6);
  StateVector phi = testutil::random_state(layout, 7);
  StateVector psi = testutil::random_state(layout, 8);
  const Complex lhs = obsim::inner_product(phi, obsim::apply_hamiltonian(psi, p));
  const Complex rhs =
      std::conj(obsim::inner_product(psi, obsim::apply_hamiltonian(phi, p)));
  CHECK(std::abs(lhs - rhs) < 1e-13);
  // Diagonal matrix elements of a Hermitian operator are real.
  const Complex diag = obsim::inner_product(psi, obsim::apply_hamiltonian(psi, p));
  CHECK(std::abs(diag.imag()) < 1e-13);
}

TEST_CASE("effective rhs equals -i H_eff psi and contracts the norm") {
  const SystemParams p = generic_params();
  BasisLayout layout(p.n_atoms, 5);
  const oracle::Matrix heff = oracle::effective_hamiltonian(p, 5);

  StateVector psi = testutil::random_state(layout, 17);
  StateVector rhs(layout);
  obsim::apply_effective_rhs_into(psi, p, rhs);
  const Eigen::VectorXcd ref =
      Complex{0.0, -1.0} * (heff * testutil::to_eigen(psi));
  CHECK((testutil::to_eigen(rhs) - ref).norm() < 1e-13);

  // d||psi||^2/dt = 2 Re <psi|rhs> must equal -2(kappa <n> + gamma <ups>).
  const double n_exp = obsim::expectation(psi, Observable::photon_number).real();
  const double ups =
      obsim::expectation(psi, Observable::Sigma_z).real() + 0.5 * p.n_atoms;
  const double from_rhs = 2.0 * obsim::inner_product(psi, rhs).real();
  CHECK(from_rhs ==
        doctest::Approx(-2.0 * (p.kappa * n_exp + p.gamma * ups)).epsilon(1e-10));
}

TEST_CASE("expectation values match dense quadratic forms") {
  BasisLayout layout(2, 6);
  StateVector psi = testutil::random_state(layout, 29);
  const Eigen::VectorXcd v = testutil::to_eigen(psi);

  const oracle::Matrix a = oracle::annihilation_full(6, 2);
  oracle::Matrix sig = oracle::sigma_minus_full(6, 2, 0) +
                       oracle::sigma_minus_full(6, 2, 1);
  oracle::Matrix sig_z =
      0.5 * (oracle::sigma_minus_full(6, 2, 0).adjoint() *
                 oracle::sigma_minus_full(6, 2, 0) -
             oracle::sigma_minus_full(6, 2, 0) *
                 oracle::sigma_minus_full(6, 2, 0).adjoint()) +
      0.5 * (oracle::sigma_minus_full(6, 2, 1).adjoint() *
                 oracle::sigma_minus_full(6, 2, 1) -
             oracle::sigma_minus_full(6, 2, 1) *
                 oracle::sigma_minus_full(6, 2, 1).adjoint());

  auto quad = [&v](const oracle::Matrix& op) {
    return Complex(v.adjoint() * op * v);
  };

  CHECK(std::abs(obsim::expectation(psi, Observable::photon_number) -
                 quad(a.adjoint() * a)) < 1e-13);
  CHECK(std::abs(obsim::expectation(psi, Observable::a) - quad(a)) < 1e-13);
  CHECK(std::abs(obsim::expectation(psi, Observable::a_squared) - quad(a * a)) <
        1e-13);
  CHECK(std::abs(obsim::expectation(psi, Observable::Sigma) - quad(sig)) <
        1e-13);
  CHECK(std::abs(obsim::expectation(psi, Observable::a_dagger_Sigma) -
                 quad(a.adjoint() * sig)) < 1e-13);
  CHECK(std::abs(obsim::expectation(psi, Observable::Sigma_z) - quad(sig_z)) <
        1e-13);
}

TEST_CASE("photon number of a known superposition") {
  BasisLayout layout(1, 4);
  StateVector psi(layout);
  // (|0,g> + 2i |2,g> - |3,e>) / sqrt(6): <n> = (0 + 4*2 + 1*3) / 6.
  psi.amp[layout.index(0, 0)] = Complex{1.0, 0.0};
  psi.amp[layout.index(2, 0)] = Complex{0.0, 2.0};
  psi.amp[layout.index(3, 1)] = Complex{-1.0, 0.0};
  psi.normalize();
  CHECK(obsim::expectation(psi, Observable::photon_number).real() ==
        doctest::Approx(11.0 / 6.0));
  // Excitation counts 0, 0, 1 with weights 1/6, 4/6, 1/6; Sigma_z adds -1/2.
  CHECK(obsim::expectation(psi, Observable::Sigma_z).real() ==
        doctest::Approx(1.0 / 6.0 - 0.5));
}

TEST_CASE("top Fock population flags truncation pressure") {
  BasisLayout layout(1, 5);
  StateVector psi = StateVector::basis_state(layout, 4, 1);
  CHECK(obsim::top_fock_population(psi) == doctest::Approx(1.0));
  StateVector low = StateVector::basis_state(layout, 1, 0);
  CHECK(obsim::top_fock_population(low) == 0.0);
}

TEST_CASE("mode density accumulation reproduces the partial trace") {
  BasisLayout layout(2, 5);
  StateVector psi = testutil::random_state(layout, 41);
  const Eigen::VectorXcd v = testutil::to_eigen(psi);
  const oracle::Matrix rho_full = v * v.adjoint();
  const oracle::Matrix rho_mode = oracle::trace_out_atoms(rho_full, 5, 2);

  obsim::ModeDensityMatrix acc(5);
  obsim::accumulate_mode_density(psi, 1.0, acc);
  CHECK((acc.entries - rho_mode).cwiseAbs().maxCoeff() < 1e-14);

  acc.check_invariants();
  CHECK(acc.trace_real() == doctest::Approx(1.0));
  CHECK(acc.hermiticity_error() < 1e-15);
  CHECK(acc.min_eigenvalue() > -1e-12);
}

TEST_CASE("weighted accumulation averages projectors") {
  BasisLayout layout(1, 4);
  StateVector psi_a = StateVector::basis_state(layout, 0, 0);
  StateVector psi_b = StateVector::basis_state(layout, 2, 1);
  obsim::ModeDensityMatrix acc(4);
  obsim::accumulate_mode_density(psi_a, 0.25, acc);
  obsim::accumulate_mode_density(psi_b, 0.75, acc);
  CHECK(acc.trace_real() == doctest::Approx(1.0));
  CHECK(acc.entries(0, 0).real() == doctest::Approx(0.25));
  CHECK(acc.entries(2, 2).real() == doctest::Approx(0.75));
  // Projectors onto single basis kets have no off-diagonal mode coherence.
  CHECK(std::abs(acc.entries(0, 2)) == 0.0);
  acc.check_invariants();
}

TEST_CASE("resolve_scaling holds collective constants fixed") {
  SystemParams base;
  base.n_atoms = 8;
  base.g = 1.118033988749895;  // cooperativity 10 at kappa = 1/2
  base.kappa = 0.5;
  base.gamma = 1.0;
  base.eta = 2.0;
  for (int n : {1, 2, 4, 6, 16}) {
    const SystemParams scaled = obsim::resolve_scaling(base, n);
    CHECK(scaled.n_atoms == n);
    CHECK(scaled.n_atoms * scaled.g * scaled.g ==
          doctest::Approx(base.n_atoms * base.g * base.g).epsilon(1e-14));
    CHECK(scaled.eta / std::sqrt(double(n)) ==
          doctest::Approx(base.eta / std::sqrt(double(base.n_atoms)))
              .epsilon(1e-14));
    CHECK(scaled.cooperativity() == doctest::Approx(10.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(obsim::resolve_scaling(base, 0), std::invalid_argument);
}

TEST_CASE("system params validation rejects nonphysical values") {
  SystemParams p;
  p.n_atoms = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = SystemParams{};
  p.kappa = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = SystemParams{};
  p.eta = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = generic_params();
  CHECK_NOTHROW(p.validate());
  CHECK(p.cooperativity() == doctest::Approx(2.0 * 1.3 * 1.3));
}
