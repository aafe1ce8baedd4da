#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "obsim/meanfield.hpp"
#include "obsim/system_params.hpp"

namespace obsim::fluct {

using Complex = std::complex<double>;
using Matrix5c = Eigen::Matrix<Complex, 5, 5>;

// Linearized fluctuation dynamics around a stationary mean-field state, in
// the fixed variable ordering (da, da^dag, dS, dS^dag, dS_z) of the scaled
// collective quantities. dS_z is real; its conjugate row is omitted and
// Hermitian combinations appear as explicit real parts in the drift.
struct LinearSystem {
  Matrix5c drift;      // M in d(dv)/dt = M dv + noise
  Matrix5c diffusion;  // order-preserving noise correlations D_ij
  meanfield::MeanFieldState branch;
  SystemParams params;
};

struct FluctuationCovariance {
  // Steady second moments P_ij = <v_i v_j> in the ordering above, solving
  // M P + P M^T + D = 0 (transpose, not adjoint: the variable vector
  // already carries the conjugate partners).
  Matrix5c moments;
  // Quadrature variances of the unscaled mode, commutator term included, so
  // a decoupled vacuum yields exactly 1/4.
  double quad_var_x = 0.25;
  double quad_var_y = 0.25;
  // <a^dag Sigma> - <a^dag><Sigma> in unscaled operators: N^{3/2} times the
  // scaled moment. The per-atom variant divides one factor of N out.
  Complex corr_adag_sigma{0.0, 0.0};
  Complex corr_adag_sigma_per_atom{0.0, 0.0};
  double lyapunov_residual = 0.0;
};

// Drift and diffusion at the given stationary state. The state must zero the
// mean-field flow to better than 1e-10 or std::invalid_argument is raised.
LinearSystem build_linear_system(const SystemParams& params,
                                 const meanfield::MeanFieldState& branch);

// Dense Bartels-Stewart-style solver for M P + P M^T + D = 0 via the complex
// Schur form of M; exposed generically for reuse in tests. Requires M and
// -M^T to share no eigenvalue (guaranteed for strictly stable M).
Eigen::MatrixXcd solve_continuous_lyapunov(const Eigen::MatrixXcd& m,
                                           const Eigen::MatrixXcd& d);

// Steady-state second moments on the branch. The drift must be strictly
// stable (max Re eigenvalue < -1e-9); otherwise std::domain_error is raised,
// which near the fold points means the linearized theory diverges there.
FluctuationCovariance solve_lyapunov(const LinearSystem& system);

struct VarianceScanRow {
  double eta = 0.0;
  meanfield::BranchLabel branch = meanfield::BranchLabel::lower;
  // True when the selected branch exists at this drive and its covariance
  // was computed; inside the branch's forbidden window rows stay absent.
  bool present = false;
  bool stable = false;  // mean-field stability of the selected solution
  double var_x = 0.0;
  double var_y = 0.0;
  Complex corr{0.0, 0.0};
  Complex corr_per_atom{0.0, 0.0};
};

// Quadrature variances and atom-field correlation along one branch of the
// S-curve. selector must be lower or upper.
std::vector<VarianceScanRow> variance_scan(const SystemParams& params,
                                           const std::vector<double>& eta_grid,
                                           meanfield::BranchLabel selector);

}  // namespace obsim::fluct
