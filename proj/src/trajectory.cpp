#include "obsim/trajectory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

namespace obsim::mcwf {

void TrajectoryConfig::validate() const {
  if (dim_mode < 2) {
    throw std::invalid_argument("TrajectoryConfig: dim_mode must be >= 2");
  }
  if (!(dt_max > 0.0)) {
    throw std::invalid_argument("TrajectoryConfig: dt_max must be positive");
  }
  if (burn_in < 0.0) {
    throw std::invalid_argument("TrajectoryConfig: burn_in must be >= 0");
  }
  if (!(sample_interval > 0.0)) {
    throw std::invalid_argument(
        "TrajectoryConfig: sample_interval must be positive");
  }
  if (n_samples_planned() < 1) {
    throw std::invalid_argument(
        "TrajectoryConfig: total_time leaves no room for samples after "
        "burn-in");
  }
  if (!(norm_tolerance > 0.0)) {
    throw std::invalid_argument(
        "TrajectoryConfig: norm_tolerance must be positive");
  }
  if (hist_bins < 1) {
    throw std::invalid_argument("TrajectoryConfig: hist_bins must be >= 1");
  }
}

namespace {

// Relative accuracy of the bisected jump time.
constexpr double kJumpTimeRelTol = 1e-3;
// Samples per block for the standard-error estimate.
constexpr std::size_t kBlockLength = 50;
// Top-Fock population above which results are flagged as truncation-limited.
constexpr double kTruncationAlarm = 1e-6;

// Scalar time series with 50-sample block averaging. The mean uses every
// sample; the standard error uses complete blocks only.
class BlockSeries {
 public:
  void add(double x) {
    total_ += x;
    ++n_;
    block_sum_ += x;
    if (++in_block_ == kBlockLength) {
      block_means_.push_back(block_sum_ / static_cast<double>(kBlockLength));
      block_sum_ = 0.0;
      in_block_ = 0;
    }
  }

  double mean() const { return n_ ? total_ / static_cast<double>(n_) : 0.0; }

  const std::vector<double>& block_means() const { return block_means_; }

  static double se_of(const std::vector<double>& blocks) {
    const std::size_t b = blocks.size();
    if (b < 2) return 0.0;
    double m = 0.0;
    for (double x : blocks) m += x;
    m /= static_cast<double>(b);
    double ss = 0.0;
    for (double x : blocks) ss += (x - m) * (x - m);
    return std::sqrt(ss / (static_cast<double>(b) * static_cast<double>(b - 1)));
  }

  void merge(const BlockSeries& other) {
    total_ += other.total_;
    n_ += other.n_;
    block_means_.insert(block_means_.end(), other.block_means_.begin(),
                        other.block_means_.end());
    // Partial blocks of either side are dropped from the error estimate.
  }

 private:
  double total_ = 0.0;
  std::size_t n_ = 0;
  double block_sum_ = 0.0;
  std::size_t in_block_ = 0;
  std::vector<double> block_means_;
};

// Classical RK4 for d psi/dt = -i H_eff psi with preallocated stage vectors.
class Propagator {
 public:
  Propagator(const BasisLayout& layout, const SystemParams& params)
      : params_(params),
        k1_(layout),
        k2_(layout),
        k3_(layout),
        k4_(layout),
        tmp_(layout) {}

  // out may alias in.
  void step_into(const StateVector& in, double dt, StateVector& out) {
    apply_effective_rhs_into(in, params_, k1_);
    add_scaled(in, k1_, 0.5 * dt, tmp_);
    apply_effective_rhs_into(tmp_, params_, k2_);
    add_scaled(in, k2_, 0.5 * dt, tmp_);
    apply_effective_rhs_into(tmp_, params_, k3_);
    add_scaled(in, k3_, dt, tmp_);
    apply_effective_rhs_into(tmp_, params_, k4_);
    const double c = dt / 6.0;
    const std::size_t dim = in.size();
    for (std::size_t f = 0; f < dim; ++f) {
      out.amp[f] = in.amp[f] + c * (k1_.amp[f] + 2.0 * (k2_.amp[f] + k3_.amp[f]) +
                                    k4_.amp[f]);
    }
  }

 private:
  static void add_scaled(const StateVector& base, const StateVector& k,
                         double c, StateVector& out) {
    const std::size_t dim = base.size();
    for (std::size_t f = 0; f < dim; ++f) {
      out.amp[f] = base.amp[f] + c * k.amp[f];
    }
  }

  SystemParams params_;
  StateVector k1_, k2_, k3_, k4_, tmp_;
};

// Rate-weighted populations of each decay channel in the (unnormalized)
// state. Returns the total weight.
double jump_weights(const StateVector& psi, const SystemParams& params,
                    std::vector<double>& weights) {
  const BasisLayout& layout = psi.layout;
  const std::size_t atoms = static_cast<std::size_t>(params.n_atoms);
  weights.assign(atoms + 1, 0.0);
  const std::size_t a_dim = layout.atom_dim;
  for (int n = 0; n < layout.dim_mode; ++n) {
    const std::size_t row = static_cast<std::size_t>(n) * a_dim;
    for (std::uint32_t b = 0; b < a_dim; ++b) {
      const double p = std::norm(psi.amp[row + b]);
      weights[0] += static_cast<double>(n) * p;
      std::uint32_t rest = b;
      while (rest) {
        const int i = std::countr_zero(rest);
        weights[1 + static_cast<std::size_t>(i)] += p;
        rest &= rest - 1;
      }
    }
  }
  weights[0] *= 2.0 * params.kappa;
  double total = weights[0];
  for (std::size_t i = 1; i <= atoms; ++i) {
    weights[i] *= 2.0 * params.gamma;
    total += weights[i];
  }
  return total;
}

struct WorkerResult {
  BlockSeries photon, sigma_z, a_re, a_im, sigma_re, sigma_im, adag_sigma_re,
      adag_sigma_im, a_squared_re, a_squared_im;
  Histogram hist;
  ModeDensityMatrix density;
  std::vector<std::uint64_t> jumps;
  double max_top_fock = 0.0;
  std::size_t n_samples = 0;
};

WorkerResult run_worker(const SystemParams& params,
                        const TrajectoryConfig& cfg,
                        std::uint64_t stream_seed) {
  const BasisLayout layout(params.n_atoms, cfg.dim_mode);
  StateVector psi = StateVector::basis_state(layout, 0, 0);
  StateVector trial(layout), probe(layout);
  TrajectoryRng rng(stream_seed);
  Propagator prop(layout, params);
  std::vector<double> weights;

  WorkerResult res;
  const double hist_hi =
      cfg.hist_max > 0.0
          ? cfg.hist_max
          : 1.5 * std::sqrt(params.kappa * static_cast<double>(cfg.dim_mode));
  res.hist = Histogram(0.0, hist_hi, cfg.hist_bins);
  res.density = ModeDensityMatrix(cfg.dim_mode);
  res.jumps.assign(static_cast<std::size_t>(params.n_atoms) + 1, 0);

  double t = 0.0;
  double norm2 = 1.0;
  double threshold = rng.uniform_positive();

  auto advance_to = [&](double target) {
    while (target - t > 1e-12) {
      const double dt = std::min(cfg.dt_max, target - t);
      prop.step_into(psi, dt, trial);
      const double n2_new = trial.norm2();
      if (n2_new > norm2 * (1.0 + cfg.norm_tolerance)) {
        throw std::runtime_error(
            "trajectory: squared norm grew by more than norm_tolerance in "
            "one step; reduce dt_max (dt = " +
            std::to_string(dt) + ")");
      }
      if (n2_new > threshold) {
        psi.amp.swap(trial.amp);
        norm2 = n2_new;
        t += dt;
        continue;
      }
      // The norm crossed the waiting-time threshold inside (t, t + dt]:
      // bisect for the crossing, then resolve the jump. The iteration cap
      // bounds the loop when the crossing sits at the very start of the
      // step and hi collapses toward zero.
      double lo = 0.0, hi = dt;
      for (int it = 0; it < 64 && hi - lo > kJumpTimeRelTol * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        prop.step_into(psi, mid, probe);
        if (probe.norm2() > threshold) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      prop.step_into(psi, hi, probe);
      if (jump_weights(probe, params, weights) <= 0.0) {
        // No excitation anywhere (threshold ~ 1 on a dark state): treat as
        // no jump and rearm the threshold.
        psi.amp.swap(trial.amp);
        norm2 = trial.norm2();
        t += dt;
        threshold = rng.uniform_positive();
        continue;
      }
      auto [channel, post] = sample_jump(probe, rng, params);
      psi.amp.swap(post.amp);
      norm2 = 1.0;
      t += hi;
      threshold = rng.uniform_positive();
      ++res.jumps[static_cast<std::size_t>(channel)];
    }
    t = target;
  };

  const int n_samples = cfg.n_samples_planned();
  for (int k = 1; k <= n_samples; ++k) {
    advance_to(cfg.burn_in + static_cast<double>(k) * cfg.sample_interval);
    const double inv_n2 = 1.0 / norm2;
    const double n_exp =
        expectation(psi, Observable::photon_number).real() * inv_n2;
    const Complex a_exp = expectation(psi, Observable::a) * inv_n2;
    const Complex a2_exp = expectation(psi, Observable::a_squared) * inv_n2;
    const Complex s_exp = expectation(psi, Observable::Sigma) * inv_n2;
    const Complex as_exp =
        expectation(psi, Observable::a_dagger_Sigma) * inv_n2;
    const double sz_exp = expectation(psi, Observable::Sigma_z).real() * inv_n2;

    res.photon.add(n_exp);
    res.sigma_z.add(sz_exp);
    res.a_re.add(a_exp.real());
    res.a_im.add(a_exp.imag());
    res.sigma_re.add(s_exp.real());
    res.sigma_im.add(s_exp.imag());
    res.adag_sigma_re.add(as_exp.real());
    res.adag_sigma_im.add(as_exp.imag());
    res.a_squared_re.add(a2_exp.real());
    res.a_squared_im.add(a2_exp.imag());
    res.hist.add(std::sqrt(params.kappa * std::max(0.0, n_exp)));
    accumulate_mode_density(psi, inv_n2, res.density);
    res.max_top_fock = std::max(res.max_top_fock, top_fock_population(psi));
    ++res.n_samples;
  }
  return res;
}

SteadyStateStats finalize(const SystemParams& params,
                          std::vector<WorkerResult>& workers) {
  WorkerResult merged = std::move(workers.front());

  // Stationarity halves are taken per worker so that the comparison stays a
  // within-trajectory equilibration check even for merged ensembles.
  std::vector<double> first_blocks, second_blocks;
  auto split_blocks = [&](const BlockSeries& series) {
    const auto& blocks = series.block_means();
    const std::size_t half = blocks.size() / 2;
    first_blocks.insert(first_blocks.end(), blocks.begin(),
                        blocks.begin() + static_cast<std::ptrdiff_t>(half));
    second_blocks.insert(second_blocks.end(),
                         blocks.begin() + static_cast<std::ptrdiff_t>(half),
                         blocks.end());
  };
  split_blocks(merged.photon);

  for (std::size_t w = 1; w < workers.size(); ++w) {
    WorkerResult& other = workers[w];
    split_blocks(other.photon);
    merged.photon.merge(other.photon);
    merged.sigma_z.merge(other.sigma_z);
    merged.a_re.merge(other.a_re);
    merged.a_im.merge(other.a_im);
    merged.sigma_re.merge(other.sigma_re);
    merged.sigma_im.merge(other.sigma_im);
    merged.adag_sigma_re.merge(other.adag_sigma_re);
    merged.adag_sigma_im.merge(other.adag_sigma_im);
    merged.a_squared_re.merge(other.a_squared_re);
    merged.a_squared_im.merge(other.a_squared_im);
    merged.hist.merge(other.hist);
    merged.density.entries += other.density.entries;
    for (std::size_t c = 0; c < merged.jumps.size(); ++c) {
      merged.jumps[c] += other.jumps[c];
    }
    merged.max_top_fock = std::max(merged.max_top_fock, other.max_top_fock);
    merged.n_samples += other.n_samples;
  }

  SteadyStateStats out;
  out.mean_photon_number = merged.photon.mean();
  out.out_amplitude = std::sqrt(params.kappa *
                                std::max(0.0, out.mean_photon_number));
  out.mean_a = Complex{merged.a_re.mean(), merged.a_im.mean()};
  out.mean_a_squared =
      Complex{merged.a_squared_re.mean(), merged.a_squared_im.mean()};
  out.mean_sigma = Complex{merged.sigma_re.mean(), merged.sigma_im.mean()};
  out.mean_sigma_z = merged.sigma_z.mean();
  out.mean_adag_sigma =
      Complex{merged.adag_sigma_re.mean(), merged.adag_sigma_im.mean()};
  out.corr_adag_sigma =
      out.mean_adag_sigma - std::conj(out.mean_a) * out.mean_sigma;

  // Var X = <X^2> - <X>^2 with X^2 averaged inside each sample state, so
  // the result is the steady-state density-matrix variance.
  const double xx = 0.25 * (2.0 * out.mean_a_squared.real() +
                            2.0 * out.mean_photon_number + 1.0);
  const double yy = 0.25 * (-2.0 * out.mean_a_squared.real() +
                            2.0 * out.mean_photon_number + 1.0);
  out.quad_var_x = xx - out.mean_a.real() * out.mean_a.real();
  out.quad_var_y = yy - out.mean_a.imag() * out.mean_a.imag();

  out.amplitude_histogram = std::move(merged.hist);
  out.mode_density = std::move(merged.density);
  if (merged.n_samples > 0) {
    out.mode_density.scale(1.0 / static_cast<double>(merged.n_samples));
  }
  out.n_samples = merged.n_samples;
  out.jumps_per_channel = std::move(merged.jumps);

  out.se.photon_number = BlockSeries::se_of(merged.photon.block_means());
  out.se.sigma_z = BlockSeries::se_of(merged.sigma_z.block_means());
  out.se.a_re = BlockSeries::se_of(merged.a_re.block_means());
  out.se.a_im = BlockSeries::se_of(merged.a_im.block_means());
  out.se.sigma_re = BlockSeries::se_of(merged.sigma_re.block_means());
  out.se.sigma_im = BlockSeries::se_of(merged.sigma_im.block_means());
  out.se.adag_sigma_re = BlockSeries::se_of(merged.adag_sigma_re.block_means());
  out.se.adag_sigma_im = BlockSeries::se_of(merged.adag_sigma_im.block_means());
  out.se.a_squared_re = BlockSeries::se_of(merged.a_squared_re.block_means());
  out.se.a_squared_im = BlockSeries::se_of(merged.a_squared_im.block_means());
  out.se.n_blocks = merged.photon.block_means().size();

  out.max_top_fock_population = merged.max_top_fock;
  out.truncation_warning = merged.max_top_fock > kTruncationAlarm;

  auto mean_of = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  out.first_half_photon_mean = mean_of(first_blocks);
  out.second_half_photon_mean = mean_of(second_blocks);
  if (first_blocks.size() >= 2 && second_blocks.size() >= 2) {
    const double gap =
        std::abs(out.first_half_photon_mean - out.second_half_photon_mean);
    const double se1 = BlockSeries::se_of(first_blocks);
    const double se2 = BlockSeries::se_of(second_blocks);
    const double scale = 4.0 * std::sqrt(se1 * se1 + se2 * se2);
    out.stationarity_ok = gap <= std::max(scale, 1e-12);
  } else {
    out.stationarity_ok = true;
  }
  return out;
}

}  // namespace

StateVector propagate_no_jump(const StateVector& state, double dt,
                              const SystemParams& params,
                              double norm_growth_tol) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("propagate_no_jump: dt must be positive");
  }
  Propagator prop(state.layout, params);
  StateVector out(state.layout);
  const double before = state.norm2();
  prop.step_into(state, dt, out);
  if (out.norm2() > before * (1.0 + norm_growth_tol)) {
    throw std::runtime_error(
        "propagate_no_jump: norm grew beyond tolerance; step too large");
  }
  return out;
}

std::pair<int, StateVector> sample_jump(const StateVector& state,
                                        TrajectoryRng& rng,
                                        const SystemParams& params) {
  std::vector<double> weights;
  const double total = jump_weights(state, params, weights);
  if (!(total > 0.0)) {
    throw std::domain_error(
        "sample_jump: dark state, no decay channel has weight");
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t channel = weights.size() - 1;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    acc += weights[c];
    if (u < acc) {
      channel = c;
      break;
    }
  }
  StateVector post(state.layout);
  if (channel == 0) {
    apply_annihilation_into(state, post);
  } else {
    apply_sigma_minus_into(state, static_cast<int>(channel) - 1, post);
  }
  post.normalize();
  return {static_cast<int>(channel), post};
}

SteadyStateStats run_trajectory(const SystemParams& params,
                                const TrajectoryConfig& config) {
  return run_ensemble(params, config, 1);
}

SteadyStateStats run_ensemble(const SystemParams& params,
                              const TrajectoryConfig& config, int n_workers) {
  params.validate();
  config.validate();
  if (n_workers < 1) {
    throw std::invalid_argument("run_ensemble: n_workers must be >= 1");
  }

  std::vector<WorkerResult> results(static_cast<std::size_t>(n_workers));
  if (n_workers == 1) {
    results[0] = run_worker(
        params, config,
        derive_stream_seed(config.seed, kStreamTrajectoryWorker, 0));
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(
        static_cast<std::size_t>(n_workers));
    threads.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
      threads.emplace_back([&, w]() {
        try {
          results[static_cast<std::size_t>(w)] = run_worker(
              params, config,
              derive_stream_seed(config.seed, kStreamTrajectoryWorker,
                                 static_cast<std::uint64_t>(w)));
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& th : threads) th.join();
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  return finalize(params, results);
}

}  // namespace obsim::mcwf
