#include "obsim/meanfield.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace obsim::meanfield {

namespace {
const Complex kI{0.0, 1.0};
constexpr double kPi = 3.14159265358979323846;
}

MeanFieldState mb_rhs(const MeanFieldState& x, const SystemParams& p) {
  const double rn_g = std::sqrt(static_cast<double>(p.n_atoms)) * p.g;
  const double rn = std::sqrt(static_cast<double>(p.n_atoms));
  MeanFieldState d;
  d.alpha = (kI * p.delta_m - p.kappa) * x.alpha + rn_g * x.s + p.eta / rn;
  d.s = (kI * p.delta_a - p.gamma) * x.s + 2.0 * rn_g * x.s_z * x.alpha;
  d.s_z = -p.gamma * (x.s_z + 0.5) -
          rn_g * (std::conj(x.s) * x.alpha + std::conj(x.alpha) * x.s).real();
  return d;
}

double rhs_norm(const MeanFieldState& x, const SystemParams& p) {
  const MeanFieldState d = mb_rhs(x, p);
  return std::sqrt(std::norm(d.alpha) + std::norm(d.s) + d.s_z * d.s_z);
}

Eigen::Matrix<double, 5, 5> jacobian(const MeanFieldState& x,
                                     const SystemParams& p) {
  const double rn_g = std::sqrt(static_cast<double>(p.n_atoms)) * p.g;
  Eigen::Matrix<double, 5, 5> j = Eigen::Matrix<double, 5, 5>::Zero();
  // Ordering: (Re alpha, Im alpha, Re s, Im s, s_z).
  j(0, 0) = -p.kappa;
  j(0, 1) = -p.delta_m;
  j(0, 2) = rn_g;
  j(1, 0) = p.delta_m;
  j(1, 1) = -p.kappa;
  j(1, 3) = rn_g;

  j(2, 0) = 2.0 * rn_g * x.s_z;
  j(2, 2) = -p.gamma;
  j(2, 3) = -p.delta_a;
  j(2, 4) = 2.0 * rn_g * x.alpha.real();
  j(3, 1) = 2.0 * rn_g * x.s_z;
  j(3, 2) = p.delta_a;
  j(3, 3) = -p.gamma;
  j(3, 4) = 2.0 * rn_g * x.alpha.imag();

  j(4, 0) = -2.0 * rn_g * x.s.real();
  j(4, 1) = -2.0 * rn_g * x.s.imag();
  j(4, 2) = -2.0 * rn_g * x.alpha.real();
  j(4, 3) = -2.0 * rn_g * x.alpha.imag();
  j(4, 4) = -p.gamma;
  return j;
}

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;

Vec5 pack(const MeanFieldState& x) {
  Vec5 v;
  v << x.alpha.real(), x.alpha.imag(), x.s.real(), x.s.imag(), x.s_z;
  return v;
}

MeanFieldState unpack(const Vec5& v) {
  MeanFieldState x;
  x.alpha = Complex{v(0), v(1)};
  x.s = Complex{v(2), v(3)};
  x.s_z = v(4);
  return x;
}

// A few Newton steps on the full 5-dimensional stationarity system to push
// analytically derived roots to machine-precision residuals.
MeanFieldState newton_polish(MeanFieldState x, const SystemParams& p) {
  for (int it = 0; it < 12; ++it) {
    const MeanFieldState d = mb_rhs(x, p);
    Vec5 f;
    f << d.alpha.real(), d.alpha.imag(), d.s.real(), d.s.imag(), d.s_z;
    if (f.norm() < 1e-14) break;
    const Eigen::Matrix<double, 5, 5> j = jacobian(x, p);
    const Vec5 step = j.partialPivLu().solve(f);
    if (!step.allFinite()) break;
    x = unpack(pack(x) - step);
  }
  return x;
}

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 in closed form, degree drops
// included. Double roots appear twice; dedup happens at the solution level.
std::vector<double> closed_form_real_roots(double c3, double c2, double c1,
                                           double c0) {
  const double scale =
      std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (scale == 0.0) return {};
  const double tiny = 1e-14 * scale;
  if (std::abs(c3) <= tiny) {
    if (std::abs(c2) <= tiny) {
      if (std::abs(c1) <= tiny) return {};
      return {-c0 / c1};
    }
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0) return {};
    const double sq = std::sqrt(disc);
    // Citardauq form on one root avoids cancellation.
    const double q = -0.5 * (c1 + std::copysign(sq, c1));
    std::vector<double> roots{q / c2};
    if (q != 0.0) {
      roots.push_back(c0 / q);
    } else {
      roots.push_back(0.0);
    }
    return roots;
  }
  const double a = c2 / c3, b = c1 / c3, c = c0 / c3;
  const double shift = a / 3.0;
  const double pp = b - a * a / 3.0;
  const double qq = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double disc = 0.25 * qq * qq + pp * pp * pp / 27.0;
  std::vector<double> roots;
  if (disc > 1e-14 * std::max(1.0, qq * qq)) {
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-0.5 * qq + sq);
    const double v = std::cbrt(-0.5 * qq - sq);
    roots.push_back(u + v - shift);
  } else {
    // Three real roots (trig form); near-zero discriminant collapses two of
    // them automatically through the clamped acos.
    const double m = 2.0 * std::sqrt(std::max(0.0, -pp / 3.0));
    double cos_arg = 0.0;
    if (m > 0.0) {
      cos_arg = std::clamp(-4.0 * qq / (m * m * m), -1.0, 1.0);
    }
    const double phi = std::acos(cos_arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(m * std::cos(phi - 2.0 * kPi * k / 3.0) - shift);
    }
  }
  return roots;
}

// Real roots through the eigenvalues of the companion matrix; same degree
// handling as above. Used for the |alpha|^2 polynomial off resonance.
std::vector<double> companion_real_roots(double c3, double c2, double c1,
                                         double c0) {
  const double scale =
      std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (scale == 0.0) return {};
  if (std::abs(c3) <= 1e-14 * scale) {
    return closed_form_real_roots(c3, c2, c1, c0);
  }
  Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
  comp(1, 0) = 1.0;
  comp(2, 1) = 1.0;
  comp(0, 2) = -c0 / c3;
  comp(1, 2) = -c1 / c3;
  comp(2, 2) = -c2 / c3;
  const Eigen::EigenSolver<Eigen::Matrix3d> es(comp);
  std::vector<double> roots;
  for (int k = 0; k < 3; ++k) {
    const std::complex<double> lam = es.eigenvalues()(k);
    if (std::abs(lam.imag()) <= 1e-9 * std::max(1.0, std::abs(lam))) {
      roots.push_back(lam.real());
    }
  }
  return roots;
}

bool at_resonance(const SystemParams& p) {
  return std::abs(p.delta_m) < 1e-12 && std::abs(p.delta_a) < 1e-12;
}

// Candidate stationary states before polishing.
std::vector<MeanFieldState> stationary_candidates(const SystemParams& p) {
  const double n = static_cast<double>(p.n_atoms);
  const double rn = std::sqrt(n);
  const double rn_g = rn * p.g;
  std::vector<MeanFieldState> out;

  if (p.g == 0.0) {
    MeanFieldState x;
    x.alpha = (p.eta / rn) / Complex{p.kappa, -p.delta_m};
    x.s = Complex{0.0, 0.0};
    x.s_z = -0.5;
    out.push_back(x);
    return out;
  }

  if (at_resonance(p)) {
    // eta/sqrt(N) = kappa alpha (1 + 2C/(1 + c2 alpha^2)), cleared to a
    // cubic in the real amplitude alpha.
    const double c2 = 4.0 * n * p.g * p.g / (p.gamma * p.gamma);
    const double coop = p.cooperativity();
    const double drive = p.eta / rn;
    const auto roots =
        closed_form_real_roots(p.kappa * c2, -drive * c2,
                               p.kappa * (1.0 + 2.0 * coop), -drive);
    for (double alpha : roots) {
      const double sat = 1.0 + c2 * alpha * alpha;
      MeanFieldState x;
      x.alpha = Complex{alpha, 0.0};
      x.s_z = -0.5 / sat;
      x.s = Complex{2.0 * rn_g * x.s_z * alpha / p.gamma, 0.0};
      out.push_back(x);
    }
    return out;
  }

  // Off resonance: I |K (1 + cI) + B|^2 = (eta^2/N)(1 + cI)^2 with
  // I = |alpha|^2, K = kappa - i delta_m, B = N g^2 / (gamma - i delta_a),
  // c = 4 N g^2 / (gamma^2 + delta_a^2), expanded to a real cubic in I.
  const Complex K{p.kappa, -p.delta_m};
  const Complex DA{p.gamma, -p.delta_a};
  const Complex B = n * p.g * p.g / DA;
  const double c = 4.0 * n * p.g * p.g / std::norm(DA);
  const double e2 = p.eta * p.eta / n;
  const double k2 = std::norm(K);
  const double kb = (K * std::conj(B)).real();
  const double b2 = std::norm(B);

  const double a3 = k2 * c * c;
  const double a2 = 2.0 * c * k2 + 2.0 * c * kb - e2 * c * c;
  const double a1 = k2 + 2.0 * kb + b2 - 2.0 * c * e2;
  const double a0 = -e2;

  for (double intensity : companion_real_roots(a3, a2, a1, a0)) {
    if (intensity < -1e-12) continue;
    intensity = std::max(0.0, intensity);
    const double sat = 1.0 + c * intensity;
    const Complex denom = K + B / sat;
    MeanFieldState x;
    if (std::abs(denom) < 1e-300) continue;
    x.alpha = (p.eta / rn) / denom;
    // The cleared polynomial can admit spurious roots; keep only candidates
    // consistent with their own intensity.
    if (std::abs(std::norm(x.alpha) - intensity) >
        1e-6 * std::max(1.0, intensity)) {
      continue;
    }
    x.s_z = -0.5 / sat;
    x.s = 2.0 * rn_g * x.s_z * x.alpha / DA;
    out.push_back(x);
  }
  return out;
}

}  // namespace

IntegrationResult integrate_mb(const MeanFieldState& initial,
                               const SystemParams& params, double t_final,
                               double convergence_residual) {
  if (!(t_final > 0.0)) {
    throw std::invalid_argument("integrate_mb: t_final must be positive");
  }
  namespace odeint = boost::numeric::odeint;
  using StateArr = std::array<double, 5>;

  auto system = [&params](const StateArr& x, StateArr& dxdt, double) {
    MeanFieldState s;
    s.alpha = Complex{x[0], x[1]};
    s.s = Complex{x[2], x[3]};
    s.s_z = x[4];
    const MeanFieldState d = mb_rhs(s, params);
    dxdt[0] = d.alpha.real();
    dxdt[1] = d.alpha.imag();
    dxdt[2] = d.s.real();
    dxdt[3] = d.s.imag();
    dxdt[4] = d.s_z;
  };

  StateArr x{initial.alpha.real(), initial.alpha.imag(), initial.s.real(),
             initial.s.imag(), initial.s_z};
  IntegrationResult res;
  auto observer = [&res](const StateArr& state, double t) {
    MeanFieldState s;
    s.alpha = Complex{state[0], state[1]};
    s.s = Complex{state[2], state[3]};
    s.s_z = state[4];
    res.path.emplace_back(t, s);
  };

  auto stepper = odeint::make_controlled(
      1e-12, 1e-12, odeint::runge_kutta_dopri5<StateArr>());
  odeint::integrate_adaptive(stepper, system, x, 0.0, t_final, 1e-3, observer);

  const MeanFieldState terminal = res.path.back().second;
  res.terminal_residual = rhs_norm(terminal, params);
  res.converged = res.terminal_residual < convergence_residual;
  return res;
}

namespace {

void classify_and_sort(MeanFieldBranch& branch, const SystemParams& p) {
  std::sort(branch.solutions.begin(), branch.solutions.end(),
            [](const Solution& a, const Solution& b) {
              return std::abs(a.state.alpha) < std::abs(b.state.alpha);
            });
  for (Solution& sol : branch.solutions) {
    const Eigen::Matrix<double, 5, 5> j = jacobian(sol.state, p);
    const Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> es(j);
    sol.max_re_eigenvalue = es.eigenvalues().real().maxCoeff();
    sol.stability = sol.max_re_eigenvalue < 0.0 ? Stability::stable
                                                : Stability::unstable;
  }
}

// Label solutions lower/middle/upper using the bistable window when one
// exists; labeling is then continuous in eta by construction.
void label_solutions(MeanFieldBranch& branch, const SystemParams& p) {
  bool have_window = false;
  TurningPoints window;
  try {
    window = turning_points(p);
    have_window = true;
  } catch (const std::domain_error&) {
    have_window = false;
  }
  auto& sols = branch.solutions;
  if (sols.size() >= 3) {
    sols[0].label = BranchLabel::lower;
    sols[1].label = BranchLabel::middle;
    sols[2].label = BranchLabel::upper;
  } else if (sols.size() == 2) {
    sols[0].label = BranchLabel::lower;
    sols[1].label = BranchLabel::upper;
  } else if (sols.size() == 1) {
    if (have_window && branch.eta >= window.eta_high) {
      sols[0].label = BranchLabel::upper;
    } else {
      sols[0].label = BranchLabel::lower;
    }
  }
}

}  // namespace

MeanFieldBranch steady_states(const SystemParams& params) {
  params.validate();
  MeanFieldBranch branch;
  branch.eta = params.eta;

  for (const MeanFieldState& candidate : stationary_candidates(params)) {
    const MeanFieldState polished = newton_polish(candidate, params);
    Solution sol;
    sol.state = polished;
    sol.residual = rhs_norm(polished, params);
    if (sol.residual > 1e-10) continue;  // spurious cleared-equation root

    bool duplicate = false;
    for (Solution& seen : branch.solutions) {
      if (std::abs(seen.state.alpha - polished.alpha) <
          1e-7 * (1.0 + std::abs(polished.alpha))) {
        ++seen.multiplicity;
        duplicate = true;
        break;
      }
    }
    if (!duplicate) branch.solutions.push_back(sol);
  }

  if (branch.solutions.empty()) {
    throw std::logic_error(
        "steady_states: no stationary solution survived the residual check");
  }
  classify_and_sort(branch, params);
  label_solutions(branch, params);
  return branch;
}

std::vector<MeanFieldBranch> trace_scurve(const SystemParams& params,
                                          const std::vector<double>& eta_grid) {
  if (!std::is_sorted(eta_grid.begin(), eta_grid.end())) {
    throw std::invalid_argument("trace_scurve: eta_grid must be ascending");
  }
  std::vector<MeanFieldBranch> curve;
  curve.reserve(eta_grid.size());
  SystemParams p = params;
  for (double eta : eta_grid) {
    p.eta = eta;
    curve.push_back(steady_states(p));
  }
  return curve;
}

double out_amplitude(const Solution& sol, const SystemParams& params) {
  return std::sqrt(params.kappa * static_cast<double>(params.n_atoms)) *
         std::abs(sol.state.alpha);
}

TurningPoints turning_points(const SystemParams& params) {
  params.validate();
  const double n = static_cast<double>(params.n_atoms);
  const Complex K{params.kappa, -params.delta_m};
  const Complex DA{params.gamma, -params.delta_a};
  const double coop = params.cooperativity();

  if (params.g == 0.0) {
    throw std::domain_error(
        "turning_points: no bistability without coupling (C = 0, need C > 4 "
        "at resonance)");
  }

  const Complex B = n * params.g * params.g / DA;
  const double c = 4.0 * n * params.g * params.g / std::norm(DA);
  const double k2 = std::norm(K);
  const double kb = (K * std::conj(B)).real();
  const double b2 = std::norm(B);

  // eta^2(I)/N = I h(I) with h = |K + B/(1 + cI)|^2; fold points are the
  // interior zeros of the derivative.
  auto h_of = [&](double intensity) {
    const double w = 1.0 + c * intensity;
    return k2 + 2.0 * kb / w + b2 / (w * w);
  };
  auto dy_dI = [&](double intensity) {
    const double w = 1.0 + c * intensity;
    const double hp = c * (-2.0 * kb / (w * w) - 2.0 * b2 / (w * w * w));
    return h_of(intensity) + intensity * hp;
  };

  // Saturation parameter c I reaches well past any resonant fold (which sits
  // below 2C); scan a fine grid and bisect each sign change.
  const double i_max = std::max(16.0, 8.0 * coop) / c;
  const int grid_points = 2000;
  std::vector<double> fold_intensities;
  double prev_i = 0.0;
  double prev_d = dy_dI(0.0);
  for (int k = 1; k <= grid_points; ++k) {
    const double cur_i = i_max * static_cast<double>(k) / grid_points;
    const double cur_d = dy_dI(cur_i);
    if ((prev_d < 0.0) != (cur_d < 0.0)) {
      double lo = prev_i, hi = cur_i;
      while (hi - lo > 1e-12 * hi) {
        const double mid = 0.5 * (lo + hi);
        if ((dy_dI(mid) < 0.0) == (prev_d < 0.0)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      fold_intensities.push_back(0.5 * (lo + hi));
    }
    prev_i = cur_i;
    prev_d = cur_d;
  }

  if (fold_intensities.empty()) {
    throw std::domain_error(
        "turning_points: parameters admit no bistability (at resonance this "
        "requires cooperativity C > 4; C = " +
        std::to_string(coop) + ")");
  }
  if (fold_intensities.size() != 2) {
    throw std::domain_error(
        "turning_points: unexpected fold structure with " +
        std::to_string(fold_intensities.size()) + " extrema");
  }

  auto eta_at = [&](double intensity) {
    return std::sqrt(n * intensity * h_of(intensity));
  };
  // The smaller-intensity extremum is the local maximum terminating the
  // lower branch (eta_high); the larger one starts the upper branch.
  TurningPoints tp;
  tp.eta_high = eta_at(fold_intensities[0]);
  tp.alpha_at_eta_high = std::sqrt(fold_intensities[0]);
  tp.eta_low = eta_at(fold_intensities[1]);
  tp.alpha_at_eta_low = std::sqrt(fold_intensities[1]);
  if (tp.eta_low >= tp.eta_high) {
    throw std::domain_error(
        "turning_points: degenerate window (eta_low >= eta_high)");
  }
  return tp;
}

}  // namespace obsim::meanfield
