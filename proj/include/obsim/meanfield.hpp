#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "obsim/system_params.hpp"

namespace obsim::meanfield {

using Complex = std::complex<double>;

// Semiclassical Maxwell-Bloch description in the collective scaled
// variables alpha = <a>/sqrt(N), s = <Sigma>/N, s_z = <Sigma_z>/N. In these
// variables the equations of motion depend on N only through sqrt(N) g and
// eta/sqrt(N), so systems related by the collective scaling share one
// mean-field solution.
struct MeanFieldState {
  Complex alpha{0.0, 0.0};
  Complex s{0.0, 0.0};
  double s_z = -0.5;
};

enum class Stability { stable, unstable };

enum class BranchLabel { lower, middle, upper };

struct Solution {
  MeanFieldState state;
  Stability stability = Stability::stable;
  BranchLabel label = BranchLabel::lower;
  double max_re_eigenvalue = 0.0;  // largest real part of the Jacobian
  double residual = 0.0;           // ||mb_rhs|| at the reported state
  int multiplicity = 1;            // 2 for a degenerate (fold) double root
};

struct MeanFieldBranch {
  double eta = 0.0;
  std::vector<Solution> solutions;  // sorted by |alpha| ascending
};

// Time derivative (alpha_dot, s_dot, s_z_dot) of the Maxwell-Bloch system:
//   alpha_dot = (i delta_m - kappa) alpha + sqrt(N) g s + eta / sqrt(N)
//   s_dot     = (i delta_a - gamma) s + 2 sqrt(N) g s_z alpha
//   s_z_dot   = -gamma (s_z + 1/2) - sqrt(N) g (s* alpha + alpha* s)
MeanFieldState mb_rhs(const MeanFieldState& state, const SystemParams& params);

// Euclidean norm of the rhs over the 5 real components.
double rhs_norm(const MeanFieldState& state, const SystemParams& params);

// Jacobian of the flow over (Re alpha, Im alpha, Re s, Im s, s_z).
Eigen::Matrix<double, 5, 5> jacobian(const MeanFieldState& state,
                                     const SystemParams& params);

struct IntegrationResult {
  std::vector<std::pair<double, MeanFieldState>> path;  // (t, state) samples
  double terminal_residual = 0.0;
  // True when the terminal residual fell below the convergence threshold;
  // non-convergence is reported here, not raised.
  bool converged = false;
};

// Relax the system from `initial` for t_final time units with an adaptive
// dormand-prince integrator (abs/rel tolerance 1e-12).
IntegrationResult integrate_mb(const MeanFieldState& initial,
                               const SystemParams& params, double t_final,
                               double convergence_residual = 1e-9);

// All steady states at params.eta. At exact resonance the state equation is
// a real cubic in alpha solved in closed form; off resonance the equivalent
// real cubic in |alpha|^2 is rooted via its companion matrix and the phase
// reconstructed. Every reported solution is Newton-polished and satisfies
// ||mb_rhs|| < 1e-10.
MeanFieldBranch steady_states(const SystemParams& params);

// Branch sets across an ascending eta grid with continuous lower/middle/
// upper labeling. Output amplitude per solution (comparable to the quantum
// sqrt(kappa <a^dag a>)) is sqrt(kappa N) |alpha|.
std::vector<MeanFieldBranch> trace_scurve(const SystemParams& params,
                                          const std::vector<double>& eta_grid);

double out_amplitude(const Solution& sol, const SystemParams& params);

struct TurningPoints {
  double eta_low = 0.0;   // drive where the upper branch is born
  double eta_high = 0.0;  // drive where the lower branch dies
  double alpha_at_eta_low = 0.0;
  double alpha_at_eta_high = 0.0;
};

// Fold points of the steady-state equation, located by a sign-change scan
// of d(eta^2)/d|alpha|^2 followed by bisection to 1e-10 relative tolerance.
// Throws std::domain_error when the parameters admit no bistability (at
// resonance that means cooperativity C <= 4).
TurningPoints turning_points(const SystemParams& params);

}  // namespace obsim::meanfield
