#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "obsim/histogram.hpp"
#include "obsim/mode_density.hpp"
#include "obsim/operators.hpp"
#include "obsim/rng.hpp"
#include "obsim/state_vector.hpp"
#include "obsim/system_params.hpp"

namespace obsim::mcwf {

// Monte Carlo wave-function unraveling of the driven cavity-atoms master
// equation. A single long trajectory is propagated with the non-Hermitian
// effective Hamiltonian between quantum jumps; steady-state statistics are
// time averages over strobe samples taken after an initial burn-in.

struct TrajectoryConfig {
  int dim_mode = 200;        // Fock truncation of the mode
  double dt_max = 0.01;      // integrator step bound, units of 1/gamma
  double burn_in = 50.0;     // discarded transient
  double sample_interval = 1.0;
  double total_time = 2.0e4;  // simulated time per worker, burn-in included
  std::uint64_t seed = 0;
  double norm_tolerance = 1e-10;  // tolerated squared-norm growth per step
  int hist_bins = 100;
  double hist_max = 0.0;  // histogram upper edge; <= 0 selects 1.5 sqrt(kappa D_M)

  int n_samples_planned() const {
    return static_cast<int>((total_time - burn_in) / sample_interval);
  }

  void validate() const;
};

// Sample standard errors from 50-sample block averaging, one entry per
// tracked scalar. Zero when fewer than two complete blocks exist.
struct StandardErrors {
  double photon_number = 0.0;
  double sigma_z = 0.0;
  double a_re = 0.0;
  double a_im = 0.0;
  double sigma_re = 0.0;
  double sigma_im = 0.0;
  double adag_sigma_re = 0.0;
  double adag_sigma_im = 0.0;
  double a_squared_re = 0.0;
  double a_squared_im = 0.0;
  std::size_t n_blocks = 0;
};

struct SteadyStateStats {
  double mean_photon_number = 0.0;
  double out_amplitude = 0.0;  // sqrt(kappa <a^dag a>)
  Complex mean_a{0.0, 0.0};
  Complex mean_a_squared{0.0, 0.0};
  Complex mean_sigma{0.0, 0.0};
  double mean_sigma_z = 0.0;
  Complex mean_adag_sigma{0.0, 0.0};
  // Connected correlation <a^dag Sigma> - <a^dag><Sigma>.
  Complex corr_adag_sigma{0.0, 0.0};
  // Steady-state variances of X = (a + a^dag)/2 and Y = (a - a^dag)/2i,
  // commutator term included (vacuum gives 1/4).
  double quad_var_x = 0.25;
  double quad_var_y = 0.25;
  Histogram amplitude_histogram;  // instantaneous sqrt(kappa <a^dag a>)
  ModeDensityMatrix mode_density;  // atoms traced out, normalized to trace 1
  std::size_t n_samples = 0;
  // Jump counts: index 0 is the cavity channel, 1 + i is atom i.
  std::vector<std::uint64_t> jumps_per_channel;
  StandardErrors se;
  double max_top_fock_population = 0.0;
  bool truncation_warning = false;  // top-Fock population exceeded 1e-6
  // Agreement of first- and second-half photon means, as a stationarity
  // diagnostic: ok when |m1 - m2| <= 4 sqrt(se1^2 + se2^2).
  double first_half_photon_mean = 0.0;
  double second_half_photon_mean = 0.0;
  bool stationarity_ok = true;
};

// One fourth-order Runge-Kutta step of size dt under -i H_eff. The squared
// norm must not grow by more than norm_growth_tol (no-jump evolution is
// contractive); violations raise std::runtime_error pointing at the step
// size. dt is expected to be at most the driver's dt_max.
StateVector propagate_no_jump(const StateVector& state, double dt,
                              const SystemParams& params,
                              double norm_growth_tol = 1e-8);

// Choose a decay channel with probability proportional to its rate-weighted
// population (2 kappa <a^dag a> for the cavity, 2 gamma <sigma_i^dag sigma_i>
// per atom), apply the jump operator and renormalize. Returns the channel
// index (0 = cavity, 1 + i = atom i) and the post-jump state. Throws
// std::domain_error if no channel has weight (dark state).
std::pair<int, StateVector> sample_jump(const StateVector& state,
                                        TrajectoryRng& rng,
                                        const SystemParams& params);

// Single trajectory, uniform strobe sampling after burn-in, uses random
// stream 0 of config.seed. Equivalent to run_ensemble with one worker.
SteadyStateStats run_trajectory(const SystemParams& params,
                                const TrajectoryConfig& config);

// n_workers independent trajectories on streams 0 .. n_workers-1, run in
// parallel and merged in worker order, so results depend only on
// (config.seed, n_workers), not on scheduling. Each worker simulates the
// full config.total_time.
SteadyStateStats run_ensemble(const SystemParams& params,
                              const TrajectoryConfig& config, int n_workers);

}  // namespace obsim::mcwf
