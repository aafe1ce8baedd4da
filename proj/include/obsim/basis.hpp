#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace obsim {

// Layout of the composite Hilbert space: one bosonic mode truncated to
// dim_mode Fock states tensored with n_atoms two-level atoms.
//
// Flat index = fock * 2^n_atoms + atom_bitmask, where bit i of the bitmask is
// set when atom i is excited. The mode index is the slow (outer) one, so all
// atomic configurations sharing a Fock level are contiguous; tracing out the
// atoms reduces over contiguous blocks and mode operators stride by atom_dim.
struct BasisLayout {
  int n_atoms = 1;
  int dim_mode = 2;
  std::size_t atom_dim = 2;
  std::size_t dim_total = 4;
  std::vector<double> sqrt_n;  // sqrt_n[k] = sqrt(k), k = 0 .. dim_mode

  BasisLayout() { *this = BasisLayout(1, 2); }

  BasisLayout(int atoms, int fock_levels) {
    if (atoms < 1 || atoms > 24) {
      throw std::invalid_argument("BasisLayout: n_atoms out of range [1,24]: " +
                                  std::to_string(atoms));
    }
    if (fock_levels < 2) {
      throw std::invalid_argument(
          "BasisLayout: need at least 2 Fock levels, got " +
          std::to_string(fock_levels));
    }
    n_atoms = atoms;
    dim_mode = fock_levels;
    atom_dim = std::size_t{1} << atoms;
    dim_total = atom_dim * static_cast<std::size_t>(fock_levels);
    sqrt_n.resize(static_cast<std::size_t>(fock_levels) + 1);
    for (std::size_t k = 0; k < sqrt_n.size(); ++k) {
      sqrt_n[k] = std::sqrt(static_cast<double>(k));
    }
  }

  std::size_t index(int fock, std::uint32_t atom_bits) const {
    return static_cast<std::size_t>(fock) * atom_dim + atom_bits;
  }

  // Inverse of index(): (fock level, atom bitmask).
  std::pair<int, std::uint32_t> decode(std::size_t flat) const {
    return {static_cast<int>(flat / atom_dim),
            static_cast<std::uint32_t>(flat % atom_dim)};
  }

  bool operator==(const BasisLayout& other) const {
    return n_atoms == other.n_atoms && dim_mode == other.dim_mode;
  }
  bool operator!=(const BasisLayout& other) const { return !(*this == other); }
};

}  // namespace obsim
