#include "obsim/mode_density.hpp"

#include <stdexcept>
#include <string>

namespace obsim {

void ModeDensityMatrix::check_invariants(double herm_tol, double trace_tol,
                                         double psd_tol) const {
  if (dim() == 0) {
    throw std::domain_error("ModeDensityMatrix: empty matrix");
  }
  const double herm = hermiticity_error();
  if (herm > herm_tol) {
    throw std::domain_error("ModeDensityMatrix: Hermiticity violation " +
                            std::to_string(herm));
  }
  const double tr = trace_real();
  if (std::abs(tr - 1.0) > trace_tol) {
    throw std::domain_error("ModeDensityMatrix: trace " + std::to_string(tr) +
                            " deviates from 1");
  }
  const double lam = min_eigenvalue();
  if (lam < -psd_tol) {
    throw std::domain_error("ModeDensityMatrix: negative eigenvalue " +
                            std::to_string(lam));
  }
}

}  // namespace obsim
