#include "obsim/orchestrator.hpp"

#include "obsim/rng.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace obsim {

int thread_budget() {
  const char* env = std::getenv("OBSIM_THREADS");
  if (env != nullptr) {
    int value = 0;
    try {
      std::size_t used = 0;
      value = std::stoi(env, &used);
      if (used != std::string(env).size()) value = 0;
    } catch (const std::exception&) {
      value = 0;
    }
    if (value < 1) {
      throw std::invalid_argument(
          "OBSIM_THREADS must be a positive integer, got '" +
          std::string(env) + "'");
    }
    return value;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

SweepPointRecord compute_point(const RunConfig& config,
                               const SystemParams& params, double key,
                               std::uint64_t point_index,
                               const RunParts& parts) {
  SweepPointRecord record;
  record.key = key;
  record.params = params;
  if (parts.trajectories) {
    mcwf::TrajectoryConfig tc = config.trajectory;
    tc.seed = derive_stream_seed(config.trajectory.seed, kStreamSweepPoint,
                                 point_index);
    record.stats = mcwf::run_ensemble(params, tc, config.workers);
    record.has_stats = true;
  }
  if (parts.mean_field) {
    record.mean_field = meanfield::steady_states(params);
  }
  if (parts.fluctuation_table) {
    const std::vector<double> single{params.eta};
    for (auto label :
         {meanfield::BranchLabel::lower, meanfield::BranchLabel::upper}) {
      for (auto& row : fluct::variance_scan(params, single, label)) {
        record.fluctuations.push_back(row);
      }
    }
  }
  return record;
}

}  // namespace

SweepResult orchestrate(const RunConfig& config, const Provenance& provenance,
                        const RunParts& parts) {
  config.validate();
  const std::vector<SystemParams> grid_params = resolve_scaling(config);

  SweepResult result;
  result.provenance = provenance;
  result.points.resize(grid_params.size());

  // Pool sized so that grid-level and trajectory-level parallelism together
  // stay near the thread budget.
  const int budget = thread_budget();
  const int inner = parts.trajectories ? std::max(1, config.workers) : 1;
  const int pool = std::min<int>(
      static_cast<int>(grid_params.size()),
      std::max(1, budget / inner));

  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= grid_params.size()) return;
      try {
        const double key =
            config.sweep ? config.sweep->grid[i] : config.params.eta;
        result.points[i] = compute_point(config, grid_params[i], key,
                                         static_cast<std::uint64_t>(i), parts);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(pool));
    for (int t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  if (parts.mean_field || parts.fluctuation_table) {
    try {
      result.folds = meanfield::turning_points(config.params);
    } catch (const std::domain_error&) {
      // monostable parameters have no fold window to report
    }
  }
  return result;
}

}  // namespace obsim
