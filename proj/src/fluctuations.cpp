#include "obsim/fluctuations.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace obsim::fluct {

namespace {
const Complex kI{0.0, 1.0};
}

LinearSystem build_linear_system(const SystemParams& params,
                                 const meanfield::MeanFieldState& branch) {
  params.validate();
  const double residual = meanfield::rhs_norm(branch, params);
  if (residual > 1e-10) {
    throw std::invalid_argument(
        "build_linear_system: branch state is not stationary (residual " +
        std::to_string(residual) + ")");
  }

  const double n = static_cast<double>(params.n_atoms);
  const double sg = std::sqrt(n) * params.g;  // sqrt(N) g
  const Complex alpha = branch.alpha;
  const Complex s = branch.s;
  const double s_z = branch.s_z;

  LinearSystem sys;
  sys.branch = branch;
  sys.params = params;
  sys.drift.setZero();
  sys.diffusion.setZero();

  Matrix5c& m = sys.drift;
  // d(da)/dt = (i delta_m - kappa) da + sqrt(N) g dS
  m(0, 0) = kI * params.delta_m - params.kappa;
  m(0, 2) = sg;
  // conjugate row
  m(1, 1) = -kI * params.delta_m - params.kappa;
  m(1, 3) = sg;
  // d(dS)/dt = (i delta_a - gamma) dS + 2 sqrt(N) g (S_z da + alpha dS_z)
  m(2, 0) = 2.0 * sg * s_z;
  m(2, 2) = kI * params.delta_a - params.gamma;
  m(2, 4) = 2.0 * sg * alpha;
  // conjugate row
  m(3, 1) = 2.0 * sg * s_z;
  m(3, 3) = -kI * params.delta_a - params.gamma;
  m(3, 4) = 2.0 * sg * std::conj(alpha);
  // d(dS_z)/dt = -gamma dS_z - 2 sqrt(N) g Re{S* da + alpha dS^dag},
  // written out over the conjugate pairs.
  m(4, 0) = -sg * std::conj(s);
  m(4, 1) = -sg * s;
  m(4, 2) = -sg * std::conj(alpha);
  m(4, 3) = -sg * alpha;
  m(4, 4) = -params.gamma;

  Matrix5c& d = sys.diffusion;
  const double atom_rate = 2.0 * params.gamma / n;
  d(0, 1) = 2.0 * params.kappa / n;       // <xi xi^dag>/N
  d(2, 3) = atom_rate;                    // <Xi Xi^dag>
  d(2, 4) = atom_rate * s;                // <Xi Xi_z>
  // Conjugate partner of the entry above; the noise table must be closed
  // under conjugation or the steady moments lose their pairing symmetry.
  d(4, 3) = atom_rate * std::conj(s);     // <Xi_z Xi^dag>
  d(4, 4) = atom_rate * (s_z + 0.5);
  return sys;
}

Eigen::MatrixXcd solve_continuous_lyapunov(const Eigen::MatrixXcd& m,
                                           const Eigen::MatrixXcd& d) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n || d.rows() != n || d.cols() != n) {
    throw std::invalid_argument("solve_continuous_lyapunov: shape mismatch");
  }
  // Schur form M = U T U^H; substituting P = U Y U^T turns
  // M P + P M^T = -D into the triangular system T Y + Y T^T = C with
  // C = -U^H D conj(U), solved by back-substitution from the last row.
  const Eigen::ComplexSchur<Eigen::MatrixXcd> schur(m);
  if (schur.info() != Eigen::Success) {
    throw std::runtime_error("solve_continuous_lyapunov: Schur factorization "
                             "failed");
  }
  const Eigen::MatrixXcd& u = schur.matrixU();
  const Eigen::MatrixXcd& t = schur.matrixT();
  const Eigen::MatrixXcd c = -u.adjoint() * d * u.conjugate();

  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      Complex rhs = c(i, j);
      for (Eigen::Index k = i + 1; k < n; ++k) rhs -= t(i, k) * y(k, j);
      for (Eigen::Index k = j + 1; k < n; ++k) rhs -= y(i, k) * t(j, k);
      const Complex denom = t(i, i) + t(j, j);
      if (std::abs(denom) < 1e-300) {
        throw std::runtime_error(
            "solve_continuous_lyapunov: singular spectrum pairing "
            "(eigenvalues lambda_i + lambda_j = 0)");
      }
      y(i, j) = rhs / denom;
    }
  }
  return u * y * u.transpose();
}

FluctuationCovariance solve_lyapunov(const LinearSystem& system) {
  const Eigen::ComplexEigenSolver<Matrix5c> es(system.drift);
  const double max_re = es.eigenvalues().real().maxCoeff();
  if (max_re >= -1e-9) {
    throw std::domain_error(
        "solve_lyapunov: drift is not strictly stable (max Re eigenvalue " +
        std::to_string(max_re) +
        "); linearized moments diverge toward the turning points");
  }

  const Eigen::MatrixXcd p =
      solve_continuous_lyapunov(system.drift, system.diffusion);
  const double d_norm = system.diffusion.norm();
  const double residual = (system.drift * p + p * system.drift.transpose() +
                           system.diffusion)
                              .norm();
  if (d_norm > 0.0 && residual > 1e-10 * d_norm) {
    throw std::runtime_error(
        "solve_lyapunov: residual " + std::to_string(residual) +
        " exceeds tolerance");
  }

  FluctuationCovariance cov;
  cov.moments = p;
  cov.lyapunov_residual = residual;

  const double n = static_cast<double>(system.params.n_atoms);
  // Unscaled moments: <da^dag da> = N P(1,0), <da da> = N P(0,0); the 1/4
  // carries the commutator so the decoupled limit is a coherent state.
  const double n_daddda = (n * p(1, 0)).real();
  const double re_dada = (n * p(0, 0)).real();
  cov.quad_var_x = 0.25 * (1.0 + 2.0 * n_daddda + 2.0 * re_dada);
  cov.quad_var_y = 0.25 * (1.0 + 2.0 * n_daddda - 2.0 * re_dada);
  cov.corr_adag_sigma = std::pow(n, 1.5) * p(1, 2);
  cov.corr_adag_sigma_per_atom = std::sqrt(n) * p(1, 2);
  return cov;
}

std::vector<VarianceScanRow> variance_scan(const SystemParams& params,
                                           const std::vector<double>& eta_grid,
                                           meanfield::BranchLabel selector) {
  if (selector == meanfield::BranchLabel::middle) {
    throw std::invalid_argument(
        "variance_scan: selector must be lower or upper (the middle branch "
        "is never stable)");
  }
  std::vector<VarianceScanRow> rows;
  rows.reserve(eta_grid.size());
  SystemParams p = params;
  for (double eta : eta_grid) {
    p.eta = eta;
    VarianceScanRow row;
    row.eta = eta;
    row.branch = selector;

    const meanfield::MeanFieldBranch branch = meanfield::steady_states(p);
    const meanfield::Solution* chosen = nullptr;
    for (const auto& sol : branch.solutions) {
      if (sol.label == selector) {
        chosen = &sol;
        break;
      }
    }
    if (chosen != nullptr) {
      row.stable = chosen->stability == meanfield::Stability::stable;
      if (row.stable) {
        try {
          const FluctuationCovariance cov =
              solve_lyapunov(build_linear_system(p, chosen->state));
          row.present = true;
          row.var_x = cov.quad_var_x;
          row.var_y = cov.quad_var_y;
          row.corr = cov.corr_adag_sigma;
          row.corr_per_atom = cov.corr_adag_sigma_per_atom;
        } catch (const std::domain_error&) {
          // Marginal stability at the fold edge: leave the row absent.
          row.present = false;
        }
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace obsim::fluct
