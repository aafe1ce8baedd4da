#pragma once

#include "obsim/mode_density.hpp"
#include "obsim/state_vector.hpp"
#include "obsim/system_params.hpp"

namespace obsim {

// Sparse applications of the elementary operators in the flat basis. None of
// these materialize a matrix; each is a single pass over the amplitudes.
// The _into variants write the result into a preallocated output vector
// (which must share the input layout) and are the hot-path API for the
// trajectory integrator.

// Mode annihilation: (a psi)(n, b) = sqrt(n + 1) psi(n + 1, b). Amplitude
// above the truncation is treated as zero.
void apply_annihilation_into(const StateVector& in, StateVector& out);
StateVector apply_annihilation(const StateVector& in);

// Mode creation: (a^dag psi)(n, b) = sqrt(n) psi(n - 1, b). The component
// that would leave the truncated space is dropped.
void apply_creation_into(const StateVector& in, StateVector& out);
StateVector apply_creation(const StateVector& in);

// Lowering operator of atom i: nonzero only on configurations where atom i
// is excited in the source ket.
void apply_sigma_minus_into(const StateVector& in, int atom, StateVector& out);
StateVector apply_sigma_minus(const StateVector& in, int atom);

void apply_sigma_plus_into(const StateVector& in, int atom, StateVector& out);
StateVector apply_sigma_plus(const StateVector& in, int atom);

// Full Hamiltonian in the frame rotating at the drive frequency:
//   H = -delta_m a^dag a - delta_a sum_i sigma_i^dag sigma_i
//       + i g sum_i (a^dag sigma_i - sigma_i^dag a) + i eta (a^dag - a).
// Applied in one fused pass, O(dim_total * n_atoms).
void apply_hamiltonian_into(const StateVector& in, const SystemParams& params,
                            StateVector& out);
StateVector apply_hamiltonian(const StateVector& in,
                              const SystemParams& params);

// Right-hand side of the no-jump evolution, d psi / dt = -i H_eff psi with
//   H_eff = H - i kappa a^dag a - i gamma sum_i sigma_i^dag sigma_i.
// Fused with the Hamiltonian pass; this is the trajectory hot loop.
void apply_effective_rhs_into(const StateVector& in, const SystemParams& params,
                              StateVector& out);

enum class Observable {
  photon_number,   // <a^dag a>
  a,               // <a>
  a_squared,       // <a^2>
  a_dagger_Sigma,  // <a^dag Sigma>, Sigma = sum_i sigma_i
  Sigma,           // <Sigma>
  Sigma_z,         // <Sigma_z> = <sum_i sigma_z_i / 2> = excitations - N/2
};

// Expectation value in the given (not necessarily normalized) state, i.e.
// <psi|O|psi> without dividing by the norm. Callers that want a physical
// expectation normalize first or divide by norm2().
Complex expectation(const StateVector& psi, Observable which);

// Population of the highest retained Fock level relative to the state norm.
// Used to detect truncation pressure during a run.
double top_fock_population(const StateVector& psi);

// rho[m, n] += weight * sum_b psi(m, b) conj(psi(n, b)). The accumulator
// dimension must match the state's mode truncation.
void accumulate_mode_density(const StateVector& psi, double weight,
                             ModeDensityMatrix& rho);

}  // namespace obsim
