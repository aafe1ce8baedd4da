#include "obsim/wigner.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace obsim::wigner {

namespace {

constexpr double kPi = 3.14159265358979323846;

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double log_binomial(int n, int k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

// i^q for integer q, exact.
std::complex<double> quadrant_phase(int q) {
  switch (((q % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

// Orthonormal Hermite functions h_0..h_max at z:
// h_k(z) = H_k(z) exp(-z^2/2) / sqrt(2^k k! sqrt(pi)).
// Bounded for all z, so the recurrence never overflows.
void hermite_functions(int k_max, double z, std::vector<double>& out) {
  out.resize(k_max + 1);
  const double h0 = std::pow(kPi, -0.25) * std::exp(-0.5 * z * z);
  out[0] = h0;
  if (k_max == 0) return;
  out[1] = std::sqrt(2.0) * z * h0;
  for (int k = 1; k < k_max; ++k) {
    out[k + 1] = z * std::sqrt(2.0 / (k + 1)) * out[k]
                 - std::sqrt(static_cast<double>(k) / (k + 1)) * out[k - 1];
  }
}

}  // namespace

void PhaseSpaceGrid::validate() const {
  if (nx < 2 || ny < 2) {
    throw std::invalid_argument("PhaseSpaceGrid: nx and ny must be at least 2");
  }
  if (!(x_max > x_min) || !(y_max > y_min)) {
    throw std::invalid_argument("PhaseSpaceGrid: bounds must satisfy max > min");
  }
}

std::vector<double> hermite_sequence(int k_max, double x) {
  if (k_max < 0) {
    throw std::invalid_argument("hermite_sequence: k_max must be non-negative");
  }
  std::vector<double> h(k_max + 1);
  h[0] = 1.0;
  if (k_max == 0) return h;
  h[1] = 2.0 * x;
  for (int k = 1; k < k_max; ++k) {
    h[k + 1] = 2.0 * x * h[k] - 2.0 * k * h[k - 1];
  }
  return h;
}

WignerField wigner_from_density(const ModeDensityMatrix& rho,
                                const PhaseSpaceGrid& grid) {
  grid.validate();
  const int dim = static_cast<int>(rho.entries.rows());
  if (dim < 1) {
    throw std::invalid_argument("wigner_from_density: empty density matrix");
  }
  if (rho.hermiticity_error() > 1e-10) {
    throw std::invalid_argument(
        "wigner_from_density: density matrix is not Hermitian");
  }
  if (dim > kMaxKernelDim) {
    throw std::domain_error(
        "wigner_from_density: Fock dimension " + std::to_string(dim) +
        " exceeds the kernel evaluator's stable range (" +
        std::to_string(kMaxKernelDim) +
        "); evaluate pointwise via wigner_point instead");
  }

  // The double Fock sum groups into W(x,y) = sum_ab K_ab h_a(-2x) h_b(2y)
  // with orthonormal Hermite functions h. For the (m,n) term the inner sum
  // index k' contributes at a = k'+k'', b = m+n-a; magnitudes are composed
  // in log space and the phase i^(n-m+a+2k') is resolved exactly.
  const int kdim = 2 * dim - 1;
  Eigen::MatrixXcd kernel = Eigen::MatrixXcd::Zero(kdim, kdim);
  const double log_front = std::log(2.0 / std::sqrt(kPi));
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n < dim; ++n) {
      const std::complex<double> weight = rho.entries(m, n);
      if (std::abs(weight) == 0.0) continue;
      const double log_mn =
          log_front - 0.5 * (log_factorial(m) + log_factorial(n))
          - 0.5 * (m + n) * std::log(2.0);
      for (int kp = 0; kp <= m; ++kp) {
        for (int kpp = 0; kpp <= n; ++kpp) {
          const int a = kp + kpp;
          const int b = m + n - a;
          const double log_mag = log_mn + log_binomial(m, kp)
                                 + log_binomial(n, kpp)
                                 + 0.5 * (log_factorial(a) + log_factorial(b));
          kernel(a, b) += weight * quadrant_phase(n - m + a + 2 * kp)
                          * std::exp(log_mag);
        }
      }
    }
  }

  // Evaluate as two dense products: rows index x, columns index y.
  Eigen::MatrixXd hx(grid.nx, kdim), hy(kdim, grid.ny);
  std::vector<double> h;
  for (int i = 0; i < grid.nx; ++i) {
    hermite_functions(kdim - 1, -2.0 * grid.x(i), h);
    for (int a = 0; a < kdim; ++a) hx(i, a) = h[a];
  }
  for (int j = 0; j < grid.ny; ++j) {
    hermite_functions(kdim - 1, 2.0 * grid.y(j), h);
    for (int b = 0; b < kdim; ++b) hy(b, j) = h[b];
  }
  const Eigen::MatrixXcd w = hx.cast<std::complex<double>>() * kernel
                             * hy.cast<std::complex<double>>();

  const double imag_residue = w.imag().cwiseAbs().maxCoeff();
  if (imag_residue >= 1e-9) {
    throw std::runtime_error(
        "wigner_from_density: imaginary residue " + std::to_string(imag_residue) +
        " exceeds tolerance; input symmetry is broken");
  }

  WignerField field;
  field.grid = grid;
  field.values = w.real();
  return field;
}

double wigner_point(const ModeDensityMatrix& rho, double x, double y) {
  const int dim = static_cast<int>(rho.entries.rows());
  if (dim < 1) {
    throw std::invalid_argument("wigner_point: empty density matrix");
  }
  const std::complex<double> lambda(x, y);
  const double r4 = 4.0 * std::norm(lambda);
  const double envelope = std::exp(-2.0 * std::norm(lambda));

  // W = (2/pi) sum_{m>=n} (2 - [m==n]) Re{ rho_mn (-1)^n sqrt(n!/m!)
  //       (2 conj(lambda))^(m-n) L_n^(m-n)(4|lambda|^2) } e^(-2|lambda|^2)
  double acc = 0.0;
  for (int n = 0; n < dim; ++n) {
    for (int m = n; m < dim; ++m) {
      const std::complex<double> weight = rho.entries(m, n);
      if (std::abs(weight) == 0.0) continue;
      const int d = m - n;
      // associated Laguerre L_n^d(r4) by the stable forward recurrence
      double lkm1 = 1.0;                       // L_0^d
      double lk = 1.0 + d - r4;                // L_1^d
      double lag = (n == 0) ? lkm1 : lk;
      for (int k = 1; k < n; ++k) {
        const double lkp1 =
            ((2.0 * k + 1.0 + d - r4) * lk - (k + d) * lkm1) / (k + 1.0);
        lkm1 = lk;
        lk = lkp1;
        lag = lkp1;
      }
      const double log_ratio = 0.5 * (log_factorial(n) - log_factorial(m));
      const std::complex<double> two_lc = 2.0 * std::conj(lambda);
      const std::complex<double> term = weight
                                        * ((n % 2 == 0) ? 1.0 : -1.0)
                                        * std::exp(log_ratio)
                                        * std::pow(two_lc, d) * lag;
      acc += (m == n ? 1.0 : 2.0) * term.real();
    }
  }
  return 2.0 / kPi * envelope * acc;
}

WignerMoments wigner_moments(const WignerField& field) {
  const auto& g = field.grid;
  g.validate();
  if (field.values.rows() != g.nx || field.values.cols() != g.ny) {
    throw std::invalid_argument("wigner_moments: field/grid shape mismatch");
  }
  auto weight = [](int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; };

  double norm = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < g.nx; ++i) {
    const double x = g.x(i);
    const double wx = weight(i, g.nx);
    for (int j = 0; j < g.ny; ++j) {
      const double y = g.y(j);
      const double w = wx * weight(j, g.ny) * field.values(i, j);
      norm += w;
      sx += w * x;
      sy += w * y;
      sxx += w * x * x;
      syy += w * y * y;
    }
  }
  const double cell = g.dx() * g.dy();
  norm *= cell;
  sx *= cell;
  sy *= cell;
  sxx *= cell;
  syy *= cell;

  WignerMoments m;
  m.norm = norm;
  m.coverage_warning = std::abs(norm - 1.0) > 1e-2;
  if (norm != 0.0) {
    m.mean_x = sx / norm;
    m.mean_y = sy / norm;
    m.var_x = sxx / norm - m.mean_x * m.mean_x;
    m.var_y = syy / norm - m.mean_y * m.mean_y;
  }
  return m;
}

void write_csv(const WignerField& field, std::ostream& out) {
  out << "x,y,w\n";
  char line[96];
  for (int i = 0; i < field.grid.nx; ++i) {
    for (int j = 0; j < field.grid.ny; ++j) {
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", field.grid.x(i),
                    field.grid.y(j), field.values(i, j));
      out << line;
    }
  }
}

void write_binary(const WignerField& field, std::ostream& out,
                  const std::string& extra_header_fields) {
  char header[256];
  std::snprintf(header, sizeof header,
                "{%s%s\"nx\":%d,\"ny\":%d,\"x_min\":%.17g,\"x_max\":%.17g,"
                "\"y_min\":%.17g,\"y_max\":%.17g,\"dtype\":\"float64\","
                "\"order\":\"row-major\"}\n",
                extra_header_fields.c_str(),
                extra_header_fields.empty() ? "" : ",", field.grid.nx,
                field.grid.ny, field.grid.x_min, field.grid.x_max,
                field.grid.y_min, field.grid.y_max);
  out << header;
  for (int i = 0; i < field.grid.nx; ++i) {
    for (int j = 0; j < field.grid.ny; ++j) {
      const double v = field.values(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
}

}  // namespace obsim::wigner
