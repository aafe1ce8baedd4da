#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "obsim/basis.hpp"

namespace obsim {

using Complex = std::complex<double>;

// Pure state of the composite system, stored densely in the flat basis
// defined by BasisLayout. States held between quantum jumps are in general
// unnormalized; norm2() tracks the decayed norm.
struct StateVector {
  BasisLayout layout;
  std::vector<Complex> amp;

  StateVector() : StateVector(BasisLayout{}) {}

  explicit StateVector(const BasisLayout& basis)
      : layout(basis), amp(basis.dim_total, Complex{0.0, 0.0}) {}

  // Basis ket |fock> (x) |atom_bits>, e.g. basis_state(layout, 0, 0) is the
  // vacuum with all atoms in the ground state.
  static StateVector basis_state(const BasisLayout& basis, int fock,
                                 std::uint32_t atom_bits) {
    if (fock < 0 || fock >= basis.dim_mode || atom_bits >= basis.atom_dim) {
      throw std::invalid_argument("basis_state: index outside layout");
    }
    StateVector psi(basis);
    psi.amp[basis.index(fock, atom_bits)] = Complex{1.0, 0.0};
    return psi;
  }

  std::size_t size() const { return amp.size(); }

  double norm2() const {
    double s = 0.0;
    for (const Complex& c : amp) s += std::norm(c);
    return s;
  }

  void normalize() {
    const double n2 = norm2();
    if (!(n2 > 0.0)) {
      throw std::domain_error("StateVector::normalize: zero-norm state");
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (Complex& c : amp) c *= inv;
  }

  void set_zero() {
    for (Complex& c : amp) c = Complex{0.0, 0.0};
  }
};

inline Complex inner_product(const StateVector& bra, const StateVector& ket) {
  if (bra.layout != ket.layout) {
    throw std::invalid_argument("inner_product: layout mismatch");
  }
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < bra.amp.size(); ++i) {
    s += std::conj(bra.amp[i]) * ket.amp[i];
  }
  return s;
}

}  // namespace obsim
