#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "obsim/state_vector.hpp"

namespace testutil {

inline Eigen::VectorXcd to_eigen(const obsim::StateVector& psi) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(psi.size()));
  for (std::size_t i = 0; i < psi.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = psi.amp[i];
  }
  return v;
}

inline obsim::StateVector from_eigen(const obsim::BasisLayout& layout,
                                     const Eigen::VectorXcd& v) {
  obsim::StateVector psi(layout);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    psi.amp[i] = v(static_cast<Eigen::Index>(i));
  }
  return psi;
}

// Deterministic pseudo-random normalized state. Uses raw engine output, not
// std::uniform_real_distribution, so the amplitudes are identical on every
// platform.
inline obsim::StateVector random_state(const obsim::BasisLayout& layout,
                                       std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  auto draw = [&engine]() {
    return 2.0 * (static_cast<double>(engine() >> 11) * 0x1.0p-53) - 1.0;
  };
  obsim::StateVector psi(layout);
  for (auto& c : psi.amp) {
    c = obsim::Complex{draw(), draw()};
  }
  psi.normalize();
  return psi;
}

}  // namespace testutil
