#pragma once

#include "obsim/mode_density.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace obsim::wigner {

// Rectangular phase-space grid. Coordinates map to the complex plane as
// lambda = x + i y, the convention fixed by the coherent-state placement
// test: a state displaced to amplitude beta peaks at (Re beta, Im beta).
struct PhaseSpaceGrid {
  double x_min = -6.0;
  double x_max = 6.0;
  double y_min = -6.0;
  double y_max = 6.0;
  int nx = 201;
  int ny = 201;

  void validate() const;
  double x(int i) const { return x_min + (x_max - x_min) * i / (nx - 1); }
  double y(int j) const { return y_min + (y_max - y_min) * j / (ny - 1); }
  double dx() const { return (x_max - x_min) / (nx - 1); }
  double dy() const { return (y_max - y_min) / (ny - 1); }
};

struct WignerField {
  PhaseSpaceGrid grid;
  Eigen::MatrixXd values;  // nx rows, ny columns
};

struct WignerMoments {
  double norm = 0.0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  bool coverage_warning = false;  // norm off unity by more than 1e-2
};

// Physicists' Hermite polynomials H_0..H_k_max at x by the three-term
// recurrence. Raw polynomial values; magnitudes explode combinatorially,
// so keep k_max modest (the grid evaluator below never uses this form).
std::vector<double> hermite_sequence(int k_max, double x);

// Largest Fock dimension the kernel evaluator accepts before log-space
// intermediates lose too much precision to cancellation.
inline constexpr int kMaxKernelDim = 512;

// Evaluates the Wigner function of the given Fock-basis density matrix on
// every grid node via a Hermite-function kernel assembled in log space.
WignerField wigner_from_density(const ModeDensityMatrix& rho,
                                const PhaseSpaceGrid& grid);

// Independent single-point evaluation through the associated-Laguerre
// overlap series. Slower per node but free of the kernel's dimension cap;
// used as the cross-check path.
double wigner_point(const ModeDensityMatrix& rho, double x, double y);

// Trapezoid-rule norm, means, and variances of the field. Sets
// coverage_warning instead of throwing when the norm is off.
WignerMoments wigner_moments(const WignerField& field);

// Serialization: CSV rows "x,y,w" with a header line, and a row-major
// binary dump prefixed by a single JSON header line. Callers may splice
// extra key-value pairs (already JSON-formatted, no braces) into that
// header, e.g. a provenance block.
void write_csv(const WignerField& field, std::ostream& out);
void write_binary(const WignerField& field, std::ostream& out,
                  const std::string& extra_header_fields = "");

}  // namespace obsim::wigner
