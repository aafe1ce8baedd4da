#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>

#include "doctest.h"
#include "obsim/trajectory.hpp"
#include "support/dense_oracle.hpp"
#include "support/test_util.hpp"

using obsim::BasisLayout;
using obsim::Complex;
using obsim::StateVector;
using obsim::SystemParams;
using obsim::TrajectoryRng;
namespace mcwf = obsim::mcwf;

namespace {

SystemParams offres_params() {
  SystemParams p;
  p.n_atoms = 1;
  p.g = 0.8;
  p.kappa = 0.5;
  p.gamma = 1.0;
  p.delta_m = 0.3;
  p.delta_a = -0.2;
  p.eta = 0.7;
  return p;
}

}  // namespace

TEST_CASE("config validation rejects inconsistent settings") {
  mcwf::TrajectoryConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.dim_mode = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = mcwf::TrajectoryConfig{};
  cfg.total_time = cfg.burn_in;  // no room for a single sample
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = mcwf::TrajectoryConfig{};
  cfg.dt_max = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = mcwf::TrajectoryConfig{};
  cfg.hist_bins = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("no-jump step matches the exact effective propagator") {
  const SystemParams p = offres_params();
  const int dim_mode = 6;
  BasisLayout layout(p.n_atoms, dim_mode);
  StateVector psi = testutil::random_state(layout, 3);

  const double dt = 0.01;  // the default dt_max
  const oracle::Matrix heff = oracle::effective_hamiltonian(p, dim_mode);
  const oracle::Matrix gen = Complex{0.0, -1.0} * dt * heff;
  const oracle::Matrix exact_prop = gen.exp();
  const Eigen::VectorXcd exact = exact_prop * testutil::to_eigen(psi);

  StateVector stepped = mcwf::propagate_no_jump(psi, dt, p);
  CHECK((testutil::to_eigen(stepped) - exact).norm() < 1e-8);

  // Composing ten short steps tracks the exact propagator too.
  StateVector multi = psi;
  for (int k = 0; k < 10; ++k) {
    multi = mcwf::propagate_no_jump(multi, dt / 10.0, p);
  }
  CHECK((testutil::to_eigen(multi) - exact).norm() < 1e-10);
}

TEST_CASE("no-jump evolution contracts the norm monotonically") {
  const SystemParams p = offres_params();
  BasisLayout layout(1, 8);
  StateVector psi = testutil::random_state(layout, 9);
  double prev = psi.norm2();
  for (int k = 0; k < 200; ++k) {
    psi = mcwf::propagate_no_jump(psi, 0.01, p);
    const double cur = psi.norm2();
    CHECK(cur <= prev * (1.0 + 1e-12));
    prev = cur;
  }
  CHECK(prev < 1.0);  // dissipation actually happened
  CHECK_THROWS_AS(mcwf::propagate_no_jump(psi, -0.1, p),
                  std::invalid_argument);
}

TEST_CASE("oversized steps are rejected rather than silently wrong") {
  SystemParams p;
  p.n_atoms = 1;
  p.g = 0.0;
  p.kappa = 50.0;  // stiff decay: RK4 at dt = 0.2 is outside the stability region
  p.gamma = 1.0;
  p.eta = 0.0;
  BasisLayout layout(1, 6);
  StateVector psi = StateVector::basis_state(layout, 5, 0);
  CHECK_THROWS_AS(mcwf::propagate_no_jump(psi, 0.2, p), std::runtime_error);
}

TEST_CASE("jump channel selection follows the rate-weighted populations") {
  SystemParams p;
  p.n_atoms = 1;
  p.g = 0.0;
  p.kappa = 0.5;
  p.gamma = 1.0;
  BasisLayout layout(1, 4);

  // One photon and one excited atom: weights 2 kappa vs 2 gamma.
  StateVector psi = StateVector::basis_state(layout, 1, 1);
  TrajectoryRng rng(77);
  int cavity = 0;
  const int draws = 20000;
  for (int k = 0; k < draws; ++k) {
    auto [channel, post] = mcwf::sample_jump(psi, rng, p);
    if (channel == 0) {
      ++cavity;
      // Cavity jump removes the photon, leaves the atom excited.
      CHECK(std::abs(post.amp[layout.index(0, 1)] - Complex{1.0, 0.0}) <
            1e-12);
    } else {
      CHECK(channel == 1);
      CHECK(std::abs(post.amp[layout.index(1, 0)] - Complex{1.0, 0.0}) <
            1e-12);
    }
    CHECK(post.norm2() == doctest::Approx(1.0).epsilon(1e-12));
  }
  const double frac = static_cast<double>(cavity) / draws;
  const double expected = p.kappa / (p.kappa + p.gamma);  // = 1/3
  CHECK(frac == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("jump from a dark state is an error") {
  SystemParams p;
  p.n_atoms = 1;
  p.kappa = 0.5;
  BasisLayout layout(1, 3);
  StateVector vac = StateVector::basis_state(layout, 0, 0);
  TrajectoryRng rng(1);
  CHECK_THROWS_AS(mcwf::sample_jump(vac, rng, p), std::domain_error);
}

TEST_CASE("decoupled atoms leave the driven mode in a coherent state") {
  // g = 0: the mode obeys a damped driven linear equation whose conditional
  // state remains exactly coherent along every trajectory, so the sampled
  // moments are deterministic: alpha = eta / kappa, photon number alpha^2,
  // quadrature variances exactly 1/4.
  SystemParams p;
  p.n_atoms = 1;
  p.g = 0.0;
  p.kappa = 0.5;
  p.gamma = 1.0;
  p.eta = 1.0;

  mcwf::TrajectoryConfig cfg;
  cfg.dim_mode = 30;
  cfg.burn_in = 40.0;
  cfg.total_time = 540.0;
  cfg.seed = 2024;

  const mcwf::SteadyStateStats stats = mcwf::run_trajectory(p, cfg);
  CHECK(stats.n_samples == 500);
  CHECK(stats.mean_photon_number == doctest::Approx(4.0).epsilon(1e-7));
  CHECK(stats.mean_a.real() == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(std::abs(stats.mean_a.imag()) < 1e-7);
  CHECK(stats.quad_var_x == doctest::Approx(0.25).epsilon(1e-7));
  CHECK(stats.quad_var_y == doctest::Approx(0.25).epsilon(1e-7));
  CHECK(stats.out_amplitude == doctest::Approx(std::sqrt(2.0)).epsilon(1e-7));
  CHECK(std::abs(stats.mean_sigma) < 1e-12);
  CHECK(stats.mean_sigma_z == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(stats.se.photon_number < 1e-7);
  CHECK_FALSE(stats.truncation_warning);
  CHECK(stats.stationarity_ok);

  // All mass in the single histogram bin containing sqrt(kappa) * alpha.
  const double a_out = std::sqrt(2.0);
  std::uint64_t in_bin = 0;
  for (int b = 0; b < stats.amplitude_histogram.n_bins(); ++b) {
    const auto [lo, hi] = stats.amplitude_histogram.bin_range(b);
    if (lo <= a_out && a_out < hi) in_bin = stats.amplitude_histogram.counts[b];
  }
  CHECK(in_bin == stats.n_samples);
  CHECK(stats.amplitude_histogram.total == stats.n_samples);

  // Poisson photon statistics in the mode density diagonal.
  const Eigen::VectorXd pops = stats.mode_density.fock_populations();
  const double mean_n = 4.0;
  double expected = std::exp(-mean_n);
  for (int n = 0; n < 8; ++n) {
    CHECK(pops(n) == doctest::Approx(expected).epsilon(1e-5));
    expected *= mean_n / (n + 1);
  }
  // No atomic jumps can ever fire with the atom in its ground state.
  CHECK(stats.jumps_per_channel[1] == 0);
  CHECK(stats.jumps_per_channel[0] > 0);
}

TEST_CASE("trajectory averages reproduce the dense master-equation steady "
          "state") {
  const SystemParams p = offres_params();
  const int dim_mode = 16;  // Poisson tail at the top level safely below 1e-6

  // Independent oracle: exact steady state of the full Lindblad generator.
  const oracle::Matrix rho = oracle::steady_state_density(p, dim_mode);
  const oracle::Matrix rho_mode = oracle::trace_out_atoms(rho, dim_mode, 1);
  const oracle::Matrix a = oracle::annihilation_full(dim_mode, 1);
  const oracle::Matrix sm = oracle::sigma_minus_full(dim_mode, 1, 0);
  const double n_ref = (rho * (a.adjoint() * a)).trace().real();
  const Complex a_ref = (rho * a).trace();
  const Complex s_ref = (rho * sm).trace();
  const double sz_ref =
      (rho * (sm.adjoint() * sm)).trace().real() - 0.5;
  const Complex as_ref = (rho * (a.adjoint() * sm)).trace();

  mcwf::TrajectoryConfig cfg;
  cfg.dim_mode = dim_mode;
  cfg.burn_in = 30.0;
  cfg.total_time = 1530.0;
  cfg.seed = 99;
  const mcwf::SteadyStateStats stats = mcwf::run_ensemble(p, cfg, 4);

  CHECK(stats.n_samples == 4 * 1500);
  CHECK(stats.se.photon_number < 0.02);
  CHECK(stats.se.photon_number > 0.0);

  auto close = [](double got, double ref, double se) {
    return std::abs(got - ref) <= 5.0 * se + 0.004;
  };
  CHECK(close(stats.mean_photon_number, n_ref, stats.se.photon_number));
  CHECK(close(stats.mean_a.real(), a_ref.real(), stats.se.a_re));
  CHECK(close(stats.mean_a.imag(), a_ref.imag(), stats.se.a_im));
  CHECK(close(stats.mean_sigma.real(), s_ref.real(), stats.se.sigma_re));
  CHECK(close(stats.mean_sigma.imag(), s_ref.imag(), stats.se.sigma_im));
  CHECK(close(stats.mean_sigma_z, sz_ref, stats.se.sigma_z));
  CHECK(close(stats.mean_adag_sigma.real(), as_ref.real(),
              stats.se.adag_sigma_re));
  CHECK(close(stats.mean_adag_sigma.imag(), as_ref.imag(),
              stats.se.adag_sigma_im));

  // The accumulated mode density converges entrywise to the reduced steady
  // state, coherences included.
  stats.mode_density.check_invariants(1e-9, 1e-6, 1e-8);
  CHECK((stats.mode_density.entries - rho_mode).cwiseAbs().maxCoeff() < 0.02);

  // Jump bookkeeping: the observed channel rates match 2 kappa <n> and
  // 2 gamma <excited population> to a few percent.
  const double sim_time = 4 * (cfg.total_time - cfg.burn_in);
  const double cavity_rate =
      static_cast<double>(stats.jumps_per_channel[0]) / sim_time;
  const double atom_rate =
      static_cast<double>(stats.jumps_per_channel[1]) / sim_time;
  CHECK(cavity_rate == doctest::Approx(2.0 * p.kappa * n_ref).epsilon(0.10));
  CHECK(atom_rate ==
        doctest::Approx(2.0 * p.gamma * (sz_ref + 0.5)).epsilon(0.10));

  CHECK(stats.stationarity_ok);
  CHECK_FALSE(stats.truncation_warning);
}

TEST_CASE("runs are reproducible and seeds matter") {
  SystemParams p = offres_params();
  mcwf::TrajectoryConfig cfg;
  cfg.dim_mode = 8;
  cfg.burn_in = 10.0;
  cfg.total_time = 110.0;
  cfg.seed = 5;

  const auto first = mcwf::run_trajectory(p, cfg);
  const auto second = mcwf::run_trajectory(p, cfg);
  CHECK(first.mean_photon_number == second.mean_photon_number);
  CHECK(first.mean_a == second.mean_a);
  CHECK(first.jumps_per_channel == second.jumps_per_channel);
  CHECK(first.amplitude_histogram.counts == second.amplitude_histogram.counts);

  const auto ensemble_one = mcwf::run_ensemble(p, cfg, 1);
  CHECK(ensemble_one.mean_photon_number == first.mean_photon_number);
  CHECK(ensemble_one.mean_adag_sigma == first.mean_adag_sigma);

  cfg.seed = 6;
  const auto other = mcwf::run_trajectory(p, cfg);
  CHECK(other.mean_photon_number != first.mean_photon_number);

  // Two-worker merges are deterministic too, with doubled sample count.
  cfg.seed = 5;
  const auto twice_a = mcwf::run_ensemble(p, cfg, 2);
  const auto twice_b = mcwf::run_ensemble(p, cfg, 2);
  CHECK(twice_a.mean_photon_number == twice_b.mean_photon_number);
  CHECK(twice_a.n_samples == 2 * first.n_samples);
}
