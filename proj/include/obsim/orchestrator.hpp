#pragma once

#include "obsim/output.hpp"
#include "obsim/run_config.hpp"

namespace obsim {

// Worker threads available to the orchestrator: the OBSIM_THREADS
// environment variable when set (a positive integer, anything else raises
// std::invalid_argument), machine parallelism otherwise. Thread count never
// changes numeric results; it only sets how many grid points run at once.
int thread_budget();

// Which parts each grid point computes. Trajectory statistics are the
// expensive part; the semiclassical pieces are effectively free.
struct RunParts {
  bool trajectories = false;
  bool mean_field = false;
  bool fluctuation_table = false;
};

// Expand the config into grid points, compute the requested parts for each
// on a worker pool, and collect records in grid order. Point i draws its
// trajectory seed from stream (sweep-point, i) of the master seed, so the
// result depends only on the config, never on scheduling. Turning points of
// the base parameters are attached when mean-field parts are requested and
// the system is bistable.
SweepResult orchestrate(const RunConfig& config, const Provenance& provenance,
                        const RunParts& parts);

}  // namespace obsim
