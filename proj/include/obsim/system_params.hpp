#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace obsim {

// Physical parameters of N identical two-level atoms coupled with uniform
// strength g to a single driven cavity mode. All rates and detunings are
// quoted in units of the atomic linewidth gamma, so gamma = 1 in typical use;
// gamma is kept explicit so the scaling can be checked in tests.
//
// kappa and gamma are half-widths: field amplitudes decay at kappa (cavity)
// and gamma (atomic dipole), populations at twice those rates.
struct SystemParams {
  int n_atoms = 1;
  double g = 0.0;        // atom-mode coupling
  double kappa = 0.5;    // cavity field decay rate
  double gamma = 1.0;    // atomic dipole decay rate
  double delta_m = 0.0;  // drive-cavity detuning omega_drive - omega_cavity
  double delta_a = 0.0;  // drive-atom detuning omega_drive - omega_atom
  double eta = 0.0;      // coherent drive amplitude

  // Collective cooperativity C = N g^2 / (2 kappa gamma). The resonant
  // steady state is bistable for C > 4.
  double cooperativity() const {
    return static_cast<double>(n_atoms) * g * g / (2.0 * kappa * gamma);
  }

  void validate() const {
    if (n_atoms < 1) {
      throw std::invalid_argument("SystemParams: n_atoms must be >= 1, got " +
                                  std::to_string(n_atoms));
    }
    if (!(kappa > 0.0)) {
      throw std::invalid_argument("SystemParams: kappa must be positive");
    }
    if (!(gamma > 0.0)) {
      throw std::invalid_argument("SystemParams: gamma must be positive");
    }
    if (g < 0.0) {
      throw std::invalid_argument("SystemParams: g must be non-negative");
    }
    if (eta < 0.0) {
      throw std::invalid_argument("SystemParams: eta must be non-negative");
    }
  }
};

// Rescale coupling and drive so that collective quantities are held fixed
// while the atom number changes: N g^2 (hence the cooperativity) and
// eta / sqrt(N) are both invariants of this map. Used when comparing systems
// of different size against the same mean-field solution.
inline SystemParams resolve_scaling(const SystemParams& base, int n_atoms) {
  if (n_atoms < 1) {
    throw std::invalid_argument("resolve_scaling: n_atoms must be >= 1");
  }
  SystemParams scaled = base;
  const double ratio =
      static_cast<double>(base.n_atoms) / static_cast<double>(n_atoms);
  scaled.n_atoms = n_atoms;
  scaled.g = base.g * std::sqrt(ratio);
  scaled.eta = base.eta / std::sqrt(ratio);
  return scaled;
}

}  // namespace obsim
