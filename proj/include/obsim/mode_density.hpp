#pragma once

#include <Eigen/Dense>
#include <complex>

namespace obsim {

// Reduced density matrix of the cavity mode (atoms traced out), accumulated
// as a weighted sum of projectors over trajectory samples. Entries are in the
// Fock basis; the matrix is Hermitian and unit-trace once normalized.
struct ModeDensityMatrix {
  Eigen::MatrixXcd entries;

  ModeDensityMatrix() : entries(Eigen::MatrixXcd::Zero(0, 0)) {}
  explicit ModeDensityMatrix(int dim_mode)
      : entries(Eigen::MatrixXcd::Zero(dim_mode, dim_mode)) {}

  int dim() const { return static_cast<int>(entries.rows()); }

  double trace_real() const { return entries.trace().real(); }

  // Max |rho - rho^dagger| entry; zero for exact Hermiticity.
  double hermiticity_error() const {
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  }

  // Smallest eigenvalue of the Hermitized matrix; small negative values are
  // roundoff, anything below -eps indicates a corrupted accumulation.
  double min_eigenvalue() const {
    Eigen::MatrixXcd h = 0.5 * (entries + entries.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    return es.eigenvalues().minCoeff();
  }

  Eigen::VectorXd fock_populations() const {
    return entries.diagonal().real();
  }

  void scale(double factor) { entries *= factor; }

  // Throws std::domain_error when the accumulated matrix fails Hermiticity,
  // normalization, or positivity within the given tolerances.
  void check_invariants(double herm_tol = 1e-10, double trace_tol = 1e-8,
                        double psd_tol = 1e-8) const;
};

}  // namespace obsim
