#include "doctest.h"

#include "obsim/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <sstream>
#include <vector>

using obsim::ModeDensityMatrix;
using obsim::wigner::PhaseSpaceGrid;
using obsim::wigner::WignerField;
using namespace std::complex_literals;

namespace {

constexpr double kPi = 3.14159265358979323846;

ModeDensityMatrix fock_state(int dim, int level) {
  ModeDensityMatrix rho;
  rho.entries = Eigen::MatrixXcd::Zero(dim, dim);
  rho.entries(level, level) = 1.0;
  return rho;
}

// Truncated coherent state |beta> as a density matrix.
ModeDensityMatrix coherent_state(int dim, std::complex<double> beta) {
  Eigen::VectorXcd amp(dim);
  std::complex<double> c = std::exp(-0.5 * std::norm(beta));
  for (int n = 0; n < dim; ++n) {
    amp(n) = c;
    c *= beta / std::sqrt(static_cast<double>(n + 1));
  }
  ModeDensityMatrix rho;
  rho.entries = amp * amp.adjoint();
  return rho;
}

PhaseSpaceGrid small_grid(double half_width, int points) {
  PhaseSpaceGrid g;
  g.x_min = -half_width;
  g.x_max = half_width;
  g.y_min = -half_width;
  g.y_max = half_width;
  g.nx = points;
  g.ny = points;
  return g;
}

double grid_value_at(const WignerField& f, double x, double y) {
  // nearest grid node (tests pick coordinates that lie on nodes)
  const int i = static_cast<int>(std::lround((x - f.grid.x_min) / f.grid.dx()));
  const int j = static_cast<int>(std::lround((y - f.grid.y_min) / f.grid.dy()));
  REQUIRE(i >= 0);
  REQUIRE(i < f.grid.nx);
  REQUIRE(j >= 0);
  REQUIRE(j < f.grid.ny);
  return f.values(i, j);
}

}  // namespace

TEST_CASE("hermite recurrence reproduces low-order polynomials") {
  const auto h3 = obsim::wigner::hermite_sequence(3, 3.0);
  CHECK(h3[0] == 1.0);
  CHECK(h3[1] == 6.0);  // 2x
  const auto h2 = obsim::wigner::hermite_sequence(2, 1.0);
  CHECK(h2[2] == 2.0);  // 4x^2 - 2

  // explicit-coefficient series: H_k(x) = k! sum_m (-1)^m (2x)^(k-2m) / (m! (k-2m)!)
  const double x = 0.7;
  const int k = 10;
  double series = 0.0;
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  for (int m = 0; 2 * m <= k; ++m) {
    series += ((m % 2 == 0) ? 1.0 : -1.0) * std::pow(2.0 * x, k - 2 * m)
              / (fact(m) * fact(k - 2 * m));
  }
  series *= fact(k);
  const auto h10 = obsim::wigner::hermite_sequence(k, x);
  CHECK(h10[k] == doctest::Approx(series).epsilon(1e-9));

  CHECK_THROWS_AS(obsim::wigner::hermite_sequence(-1, 0.0), std::invalid_argument);
}

TEST_CASE("vacuum state gives the round gaussian") {
  const auto rho = fock_state(4, 0);
  const auto field = obsim::wigner::wigner_from_density(rho, small_grid(4.0, 81));
  CHECK(grid_value_at(field, 0.0, 0.0) == doctest::Approx(2.0 / kPi).epsilon(1e-12));
  for (double x : {-1.5, -0.4, 0.3, 1.2}) {
    for (double y : {-0.8, 0.1, 0.9}) {
      const double expect = 2.0 / kPi * std::exp(-2.0 * (x * x + y * y));
      CHECK(grid_value_at(field, x, y) == doctest::Approx(expect).epsilon(1e-10));
    }
  }
}

TEST_CASE("single photon is negative at the origin") {
  const auto rho = fock_state(4, 1);
  const auto field = obsim::wigner::wigner_from_density(rho, small_grid(4.0, 81));
  CHECK(grid_value_at(field, 0.0, 0.0) == doctest::Approx(-2.0 / kPi).epsilon(1e-12));
  // known closed form: W(r) = (2/pi)(4r^2 - 1) e^(-2 r^2)
  for (double x : {0.3, 0.7, 1.1}) {
    const double r2 = x * x;
    const double expect = 2.0 / kPi * (4.0 * r2 - 1.0) * std::exp(-2.0 * r2);
    CHECK(grid_value_at(field, x, 0.0) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("coherent state lands at its amplitude with vacuum width") {
  const std::complex<double> beta{1.0, 0.5};
  const auto rho = coherent_state(30, beta);
  PhaseSpaceGrid g = small_grid(4.0, 161);
  const auto field = obsim::wigner::wigner_from_density(rho, g);

  // overlap-formula oracle: W(x,y) = (2/pi) exp(-2 |lambda - beta|^2)
  for (double x : {0.0, 0.5, 1.0, 1.5}) {
    for (double y : {0.0, 0.5, 1.0}) {
      const std::complex<double> lambda{x, y};
      const double expect = 2.0 / kPi * std::exp(-2.0 * std::norm(lambda - beta));
      CHECK(grid_value_at(field, x, y) == doctest::Approx(expect).epsilon(1e-8));
    }
  }

  // the peak node sits at (Re beta, Im beta); this freezes the coordinate
  // convention lambda = x + i y
  int imax = 0, jmax = 0;
  field.values.maxCoeff(&imax, &jmax);
  CHECK(field.grid.x(imax) == doctest::Approx(beta.real()).epsilon(1e-12));
  CHECK(field.grid.y(jmax) == doctest::Approx(beta.imag()).epsilon(1e-12));

  const auto m = obsim::wigner::wigner_moments(field);
  CHECK(m.norm == doctest::Approx(1.0).epsilon(1e-3));
  CHECK_FALSE(m.coverage_warning);
  CHECK(m.mean_x == doctest::Approx(beta.real()).epsilon(1e-6));
  CHECK(m.mean_y == doctest::Approx(beta.imag()).epsilon(1e-6));
  CHECK(m.var_x == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(m.var_y == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("fock mixtures are rotationally symmetric") {
  ModeDensityMatrix rho;
  rho.entries = Eigen::MatrixXcd::Zero(6, 6);
  rho.entries(0, 0) = 0.5;
  rho.entries(1, 1) = 0.3;
  rho.entries(3, 3) = 0.2;
  const auto field = obsim::wigner::wigner_from_density(rho, small_grid(3.0, 121));

  // pick nodes at equal radius along the two axes and the diagonals
  const double r = 1.0;
  const double on_axis = grid_value_at(field, r, 0.0);
  CHECK(grid_value_at(field, -r, 0.0) == doctest::Approx(on_axis).epsilon(1e-10));
  CHECK(grid_value_at(field, 0.0, r) == doctest::Approx(on_axis).epsilon(1e-10));
  CHECK(grid_value_at(field, 0.0, -r) == doctest::Approx(on_axis).epsilon(1e-10));
  const double d = r / std::sqrt(2.0);
  const double w_diag = obsim::wigner::wigner_point(rho, d, d);
  CHECK(w_diag == doctest::Approx(on_axis).epsilon(1e-8));
}

TEST_CASE("kernel and laguerre paths agree pointwise") {
  // a deliberately messy but physical state: mixture of two coherent states
  // and a fock component, renormalized
  auto rho = coherent_state(20, {0.9, -0.6});
  const auto second = coherent_state(20, {-0.3, 0.4});
  rho.entries = 0.55 * rho.entries + 0.40 * second.entries;
  rho.entries(2, 2) += 0.05;

  const auto field = obsim::wigner::wigner_from_density(rho, small_grid(3.0, 25));
  for (int i = 0; i < field.grid.nx; i += 3) {
    for (int j = 0; j < field.grid.ny; j += 3) {
      const double direct =
          obsim::wigner::wigner_point(rho, field.grid.x(i), field.grid.y(j));
      CAPTURE(i);
      CAPTURE(j);
      CHECK(std::abs(field.values(i, j) - direct) < 1e-8);
    }
  }
}

TEST_CASE("moments flag poor coverage") {
  const auto rho = coherent_state(40, {2.5, 0.0});
  // grid deliberately clips the state
  PhaseSpaceGrid g = small_grid(1.5, 41);
  const auto field = obsim::wigner::wigner_from_density(rho, g);
  const auto m = obsim::wigner::wigner_moments(field);
  CHECK(m.coverage_warning);
}

TEST_CASE("input validation") {
  PhaseSpaceGrid bad;
  bad.nx = 1;
  CHECK_THROWS_AS(obsim::wigner::wigner_from_density(fock_state(2, 0), bad),
                  std::invalid_argument);
  PhaseSpaceGrid flipped;
  flipped.x_min = 2.0;
  flipped.x_max = -2.0;
  CHECK_THROWS_AS(flipped.validate(), std::invalid_argument);

  ModeDensityMatrix skew;
  skew.entries = Eigen::MatrixXcd::Zero(3, 3);
  skew.entries(0, 1) = 0.5;  // no conjugate partner
  skew.entries(0, 0) = 1.0;
  CHECK_THROWS_AS(obsim::wigner::wigner_from_density(skew, small_grid(2.0, 11)),
                  std::invalid_argument);

  ModeDensityMatrix big;
  big.entries = Eigen::MatrixXcd::Zero(600, 600);
  big.entries(0, 0) = 1.0;
  CHECK_THROWS_AS(obsim::wigner::wigner_from_density(big, small_grid(2.0, 11)),
                  std::domain_error);
}

TEST_CASE("displacement shifts means and keeps variances") {
  const auto near_vac = coherent_state(25, {0.0, 0.0});
  const auto displaced = coherent_state(25, {-1.2, 0.8});
  const auto g = small_grid(5.0, 161);
  const auto m0 = obsim::wigner::wigner_moments(
      obsim::wigner::wigner_from_density(near_vac, g));
  const auto m1 = obsim::wigner::wigner_moments(
      obsim::wigner::wigner_from_density(displaced, g));
  CHECK(m0.mean_x == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(m0.var_x == doctest::Approx(0.25).epsilon(1e-4));
  CHECK(m1.mean_x == doctest::Approx(-1.2).epsilon(1e-6));
  CHECK(m1.mean_y == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(m1.var_x == doctest::Approx(m0.var_x).epsilon(1e-6));
  CHECK(m1.var_y == doctest::Approx(m0.var_y).epsilon(1e-6));
}

TEST_CASE("field serializers emit consistent data") {
  const auto rho = fock_state(3, 0);
  PhaseSpaceGrid g = small_grid(1.0, 3);
  const auto field = obsim::wigner::wigner_from_density(rho, g);

  std::ostringstream csv;
  obsim::wigner::write_csv(field, csv);
  const std::string text = csv.str();
  CHECK(text.rfind("x,y,w\n", 0) == 0);
  // 9 data lines + header
  CHECK(std::count(text.begin(), text.end(), '\n') == 10);

  std::ostringstream bin(std::ios::binary);
  obsim::wigner::write_binary(field, bin);
  const std::string blob = bin.str();
  const auto newline = blob.find('\n');
  REQUIRE(newline != std::string::npos);
  const std::string header = blob.substr(0, newline);
  CHECK(header.find("\"nx\":3") != std::string::npos);
  CHECK(header.find("\"order\":\"row-major\"") != std::string::npos);
  CHECK(blob.size() - newline - 1 == 9 * sizeof(double));
  // first payload value is the corner node
  double first = 0.0;
  std::memcpy(&first, blob.data() + newline + 1, sizeof first);
  CHECK(first == field.values(0, 0));
}
