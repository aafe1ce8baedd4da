#include "obsim/operators.hpp"

#include <bit>
#include <stdexcept>

namespace obsim {

namespace {

inline Complex mul_i(Complex z) { return Complex{-z.imag(), z.real()}; }
inline Complex mul_neg_i(Complex z) { return Complex{z.imag(), -z.real()}; }

void require_same_layout(const StateVector& in, const StateVector& out,
                         const char* op) {
  if (in.layout != out.layout) {
    throw std::invalid_argument(std::string(op) + ": layout mismatch");
  }
}

void require_atom_index(const StateVector& in, int atom, const char* op) {
  if (atom < 0 || atom >= in.layout.n_atoms) {
    throw std::invalid_argument(std::string(op) + ": atom index out of range");
  }
}

}  // namespace

void apply_annihilation_into(const StateVector& in, StateVector& out) {
  require_same_layout(in, out, "apply_annihilation");
  const BasisLayout& L = in.layout;
  const std::size_t A = L.atom_dim;
  for (int n = 0; n < L.dim_mode; ++n) {
    const std::size_t row = static_cast<std::size_t>(n) * A;
    if (n + 1 < L.dim_mode) {
      const double s = L.sqrt_n[static_cast<std::size_t>(n) + 1];
      for (std::size_t b = 0; b < A; ++b) {
        out.amp[row + b] = s * in.amp[row + A + b];
      }
    } else {
      for (std::size_t b = 0; b < A; ++b) {
        out.amp[row + b] = Complex{0.0, 0.0};
      }
    }
  }
}

void apply_creation_into(const StateVector& in, StateVector& out) {
  require_same_layout(in, out, "apply_creation");
  const BasisLayout& L = in.layout;
  const std::size_t A = L.atom_dim;
  for (int n = L.dim_mode - 1; n >= 0; --n) {
    const std::size_t row = static_cast<std::size_t>(n) * A;
    if (n > 0) {
      const double s = L.sqrt_n[static_cast<std::size_t>(n)];
      for (std::size_t b = 0; b < A; ++b) {
        out.amp[row + b] = s * in.amp[row - A + b];
      }
    } else {
      for (std::size_t b = 0; b < A; ++b) {
        out.amp[row + b] = Complex{0.0, 0.0};
      }
    }
  }
}

void apply_sigma_minus_into(const StateVector& in, int atom, StateVector& out) {
  require_same_layout(in, out, "apply_sigma_minus");
  require_atom_index(in, atom, "apply_sigma_minus");
  const BasisLayout& L = in.layout;
  const std::size_t A = L.atom_dim;
  const std::uint32_t bit = std::uint32_t{1} << atom;
  for (int n = 0; n < L.dim_mode; ++n) {
    const std::size_t row = static_cast<std::size_t>(n) * A;
    for (std::uint32_t b = 0; b < A; ++b) {
      out.amp[row + b] = (b & bit) ? Complex{0.0, 0.0} : in.amp[row + (b | bit)];
    }
  }
}

void apply_sigma_plus_into(const StateVector& in, int atom, StateVector& out) {
  require_same_layout(in, out, "apply_sigma_plus");
  require_atom_index(in, atom, "apply_sigma_plus");
  const BasisLayout& L = in.layout;
  const std::size_t A = L.atom_dim;
  const std::uint32_t bit = std::uint32_t{1} << atom;
  for (int n = 0; n < L.dim_mode; ++n) {
    const std::size_t row = static_cast<std::size_t>(n) * A;
    for (std::uint32_t b = 0; b < A; ++b) {
      out.amp[row + b] = (b & bit) ? in.amp[row + (b ^ bit)] : Complex{0.0, 0.0};
    }
  }
}

StateVector apply_annihilation(const StateVector& in) {
  StateVector out(in.layout);
  apply_annihilation_into(in, out);
  return out;
}

StateVector apply_creation(const StateVector& in) {
  StateVector out(in.layout);
  apply_creation_into(in, out);
  return out;
}

StateVector apply_sigma_minus(const StateVector& in, int atom) {
  StateVector out(in.layout);
  apply_sigma_minus_into(in, atom, out);
  return out;
}

StateVector apply_sigma_plus(const StateVector& in, int atom) {
  StateVector out(in.layout);
  apply_sigma_plus_into(in, atom, out);
  return out;
}

namespace {

// Shared kernel for H psi and -i H_eff psi. For each basis ket (n, b) the
// Hamiltonian contributes
//   (-delta_m n - delta_a popcount(b)) psi(n, b)
//   + i eta [sqrt(n) psi(n-1, b) - sqrt(n+1) psi(n+1, b)]
//   + i g sum_{i unset in b} sqrt(n) psi(n-1, b | 2^i)
//   - i g sum_{i set in b}   sqrt(n+1) psi(n+1, b ^ 2^i),
// where psi(dim_mode, .) = 0 encodes the truncation.
template <bool Effective>
void hamiltonian_kernel(const StateVector& in, const SystemParams& params,
                        StateVector& out) {
  const BasisLayout& L = in.layout;
  if (L.n_atoms != params.n_atoms) {
    throw std::invalid_argument("apply_hamiltonian: atom count mismatch");
  }
  const std::size_t A = L.atom_dim;
  const int N = L.n_atoms;
  const double g = params.g;
  const double eta = params.eta;
  const Complex* psi = in.amp.data();
  Complex* res = out.amp.data();

  for (int n = 0; n < L.dim_mode; ++n) {
    const std::size_t row = static_cast<std::size_t>(n) * A;
    const bool has_down = n > 0;
    const bool has_up = n + 1 < L.dim_mode;
    const double sq_n = L.sqrt_n[static_cast<std::size_t>(n)];
    const double sq_np1 = L.sqrt_n[static_cast<std::size_t>(n) + 1];
    const double diag_m = -params.delta_m * static_cast<double>(n);
    for (std::uint32_t b = 0; b < A; ++b) {
      const int excited = std::popcount(b);
      Complex h = (diag_m - params.delta_a * excited) * psi[row + b];
      if (has_down) {
        h += mul_i((eta * sq_n) * psi[row - A + b]);
      }
      if (has_up) {
        h += mul_neg_i((eta * sq_np1) * psi[row + A + b]);
      }
      if (g != 0.0) {
        Complex exch_down{0.0, 0.0};  // a^dag sigma_i pathway
        Complex exch_up{0.0, 0.0};    // sigma_i^dag a pathway
        for (int i = 0; i < N; ++i) {
          const std::uint32_t bit = std::uint32_t{1} << i;
          if (b & bit) {
            if (has_up) exch_up += psi[row + A + (b ^ bit)];
          } else {
            if (has_down) exch_down += psi[row - A + (b | bit)];
          }
        }
        h += mul_i(g * (sq_n * exch_down - sq_np1 * exch_up));
      }
      if constexpr (Effective) {
        const double decay =
            params.kappa * static_cast<double>(n) + params.gamma * excited;
        res[row + b] = mul_neg_i(h) - decay * psi[row + b];
      } else {
        res[row + b] = h;
      }
    }
  }
}

}  // namespace

void apply_hamiltonian_into(const StateVector& in, const SystemParams& params,
                            StateVector& out) {
  require_same_layout(in, out, "apply_hamiltonian");
  hamiltonian_kernel<false>(in, params, out);
}

StateVector apply_hamiltonian(const StateVector& in,
                              const SystemParams& params) {
  StateVector out(in.layout);
  apply_hamiltonian_into(in, params, out);
  return out;
}

void apply_effective_rhs_into(const StateVector& in, const SystemParams& params,
                              StateVector& out) {
  require_same_layout(in, out, "apply_effective_rhs");
  hamiltonian_kernel<true>(in, params, out);
}

Complex expectation(const StateVector& psi, Observable which) {
  const BasisLayout& L = psi.layout;
  const std::size_t A = L.atom_dim;
  const Complex* v = psi.amp.data();
  switch (which) {
    case Observable::photon_number: {
      double s = 0.0;
      for (int n = 1; n < L.dim_mode; ++n) {
        const std::size_t row = static_cast<std::size_t>(n) * A;
        double block = 0.0;
        for (std::size_t b = 0; b < A; ++b) block += std::norm(v[row + b]);
        s += static_cast<double>(n) * block;
      }
      return Complex{s, 0.0};
    }
    case Observable::a: {
      Complex s{0.0, 0.0};
      for (int n = 0; n + 1 < L.dim_mode; ++n) {
        const std::size_t row = static_cast<std::size_t>(n) * A;
        const double sq = L.sqrt_n[static_cast<std::size_t>(n) + 1];
        for (std::size_t b = 0; b < A; ++b) {
          s += sq * (std::conj(v[row + b]) * v[row + A + b]);
        }
      }
      return s;
    }
    case Observable::a_squared: {
      Complex s{0.0, 0.0};
      for (int n = 0; n + 2 < L.dim_mode; ++n) {
        const std::size_t row = static_cast<std::size_t>(n) * A;
        const double sq = L.sqrt_n[static_cast<std::size_t>(n) + 1] *
                          L.sqrt_n[static_cast<std::size_t>(n) + 2];
        for (std::size_t b = 0; b < A; ++b) {
          s += sq * (std::conj(v[row + b]) * v[row + 2 * A + b]);
        }
      }
      return s;
    }
    case Observable::Sigma: {
      Complex s{0.0, 0.0};
      for (int n = 0; n < L.dim_mode; ++n) {
        const std::size_t row = static_cast<std::size_t>(n) * A;
        for (std::uint32_t b = 0; b < A; ++b) {
          for (int i = 0; i < L.n_atoms; ++i) {
            const std::uint32_t bit = std::uint32_t{1} << i;
            if (!(b & bit)) {
              s += std::conj(v[row + b]) * v[row + (b | bit)];
            }
          }
        }
      }
      return s;
    }
    case Observable::a_dagger_Sigma: {
      Complex s{0.0, 0.0};
      for (int n = 1; n < L.dim_mode; ++n) {
        const std::size_t row = static_cast<std::size_t>(n) * A;
        const double sq = L.sqrt_n[static_cast<std::size_t>(n)];
        for (std::uint32_t b = 0; b < A; ++b) {
          for (int i = 0; i < L.n_atoms; ++i) {
            const std::uint32_t bit = std::uint32_t{1} << i;
            if (!(b & bit)) {
              s += sq * (std::conj(v[row + b]) * v[row - A + (b | bit)]);
            }
          }
        }
      }
      return s;
    }
    case Observable::Sigma_z: {
      double s = 0.0;
      const double half_n = 0.5 * static_cast<double>(L.n_atoms);
      for (int n = 0; n < L.dim_mode; ++n) {
        const std::size_t row = static_cast<std::size_t>(n) * A;
        for (std::uint32_t b = 0; b < A; ++b) {
          s += (static_cast<double>(std::popcount(b)) - half_n) *
               std::norm(v[row + b]);
        }
      }
      return Complex{s, 0.0};
    }
  }
  throw std::logic_error("expectation: unknown observable");
}

double top_fock_population(const StateVector& psi) {
  const BasisLayout& L = psi.layout;
  const std::size_t row =
      static_cast<std::size_t>(L.dim_mode - 1) * L.atom_dim;
  double top = 0.0;
  for (std::size_t b = 0; b < L.atom_dim; ++b) {
    top += std::norm(psi.amp[row + b]);
  }
  const double n2 = psi.norm2();
  if (!(n2 > 0.0)) {
    throw std::domain_error("top_fock_population: zero-norm state");
  }
  return top / n2;
}

void accumulate_mode_density(const StateVector& psi, double weight,
                             ModeDensityMatrix& rho) {
  const BasisLayout& L = psi.layout;
  if (rho.dim() != L.dim_mode) {
    throw std::invalid_argument(
        "accumulate_mode_density: accumulator dimension mismatch");
  }
  const std::size_t A = L.atom_dim;
  const Complex* v = psi.amp.data();
  for (int m = 0; m < L.dim_mode; ++m) {
    const std::size_t row_m = static_cast<std::size_t>(m) * A;
    for (int n = m; n < L.dim_mode; ++n) {
      const std::size_t row_n = static_cast<std::size_t>(n) * A;
      Complex dot{0.0, 0.0};
      for (std::size_t b = 0; b < A; ++b) {
        dot += v[row_m + b] * std::conj(v[row_n + b]);
      }
      rho.entries(m, n) += weight * dot;
      if (n != m) {
        rho.entries(n, m) += weight * std::conj(dot);
      }
    }
  }
}

}  // namespace obsim
