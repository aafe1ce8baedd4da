#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "obsim/system_params.hpp"
#include "obsim/trajectory.hpp"
#include "obsim/wigner.hpp"

namespace obsim {

// Sweep request: vary one parameter over an explicit grid while everything
// else stays at its [system] value. With scaling_lock on (n_atoms sweeps
// only) the coupling and drive are rescaled per point so that N g^2 and
// eta / sqrt(N) match the base system.
struct SweepSpec {
  std::string variable;  // eta | n_atoms | g | kappa | delta_m | delta_a
  std::vector<double> grid;
  bool scaling_lock = false;
};

// Full description of one run, parsed from a sectioned key-value config
// file. The exact grammar is documented in the README; every field has a
// default so presets only need to state what they change.
struct RunConfig {
  SystemParams params;
  mcwf::TrajectoryConfig trajectory;
  int workers = 1;  // trajectories averaged per grid point
  std::optional<SweepSpec> sweep;
  std::string output_dir = "out";
  // phase-space rendering inputs ([wigner] section)
  std::string density_path;  // stored mode density to render
  wigner::PhaseSpaceGrid phase_grid;

  // Structural checks beyond SystemParams/TrajectoryConfig: known sweep
  // variable, nonempty finite grid, integral atom counts on n_atoms grids,
  // scaling_lock only on n_atoms sweeps.
  void validate() const;
};

// Parse the sectioned key-value format. Unknown sections or keys raise
// std::invalid_argument naming the offender; so do malformed values.
RunConfig parse_config(std::istream& in);

// Read and parse a config file; I/O errors carry the path.
RunConfig load_config(const std::string& path);

// Fixed-order, fixed-format rendering of a config. Two configs with the
// same meaning (keys reordered, comments added) serialize identically, so
// this string is the hashing and round-trip canonical form.
std::string canonical_serialize(const RunConfig& config);

// FNV-1a 64-bit hash of arbitrary bytes.
std::uint64_t fnv1a(const std::string& bytes);

// Hash of the canonical serialization with the output directory masked out:
// it identifies the computation, not the destination, so runs differing only
// in --out share a hash. Stamped into every output file.
std::uint64_t config_hash(const RunConfig& config);

// Expand the sweep into one SystemParams per grid point (a single entry
// when no sweep is configured). n_atoms sweeps honor scaling_lock; the
// cooperativity is then constant across the list.
std::vector<SystemParams> resolve_scaling(const RunConfig& config);

}  // namespace obsim
