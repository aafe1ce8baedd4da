#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "obsim/fluctuations.hpp"
#include "obsim/meanfield.hpp"
#include "obsim/mode_density.hpp"
#include "obsim/run_config.hpp"
#include "obsim/trajectory.hpp"
#include "obsim/wigner.hpp"

namespace obsim {

// Identification block stamped into every output file: code version, the
// subcommand that produced the file, the master seed, and the config hash.
// Deliberately no timestamps or host names, so reruns are byte-identical.
struct Provenance {
  std::string version;
  std::string subcommand;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

// Everything computed at one grid point. Subcommands fill the parts they
// produce: trajectory statistics, the mean-field solution set, and the
// per-branch linearized variances.
struct SweepPointRecord {
  double key = 0.0;  // swept value; params.eta when nothing is swept
  SystemParams params;
  bool has_stats = false;
  mcwf::SteadyStateStats stats;
  meanfield::MeanFieldBranch mean_field;
  std::vector<fluct::VarianceScanRow> fluctuations;
};

struct SweepResult {
  Provenance provenance;
  std::vector<SweepPointRecord> points;  // one record per grid point
  // Fold drives of the bistable window, when the parameters admit one.
  std::optional<meanfield::TurningPoints> folds;
  // Emit the single point's accumulated mode density as its own artifact
  // (single-run subcommand only; sweeps would produce one per point).
  bool store_density = false;
};

struct ManifestEntry {
  std::string filename;
  std::uint64_t bytes = 0;
  std::uint64_t content_hash = 0;  // FNV-1a 64 of the file's exact bytes
};

struct FileManifest {
  std::vector<ManifestEntry> entries;
};

// Render `result` into `directory`: CSV tables for whichever parts the
// records carry, a JSON summary, and manifest.json listing every written
// file with its content hash. Filenames are fixed; numeric text uses
// round-trip decimal formatting. An existing manifest.json blocks the write
// unless `overwrite` is set. I/O failures carry the offending path.
FileManifest write_outputs(const SweepResult& result,
                           const std::string& directory, bool overwrite);

// Same contract for a rendered phase-space field: CSV and binary field
// files, moment summary, manifest.
FileManifest write_wigner_outputs(const wigner::WignerField& field,
                                  const wigner::WignerMoments& moments,
                                  const Provenance& provenance,
                                  const std::string& directory, bool overwrite);

// Mode density round-trip: dense complex entries as "row,col,re,im" CSV
// under the usual provenance block. The loader ignores '#' lines, checks
// the column header, and rejects ragged or non-square data.
std::string render_mode_density_csv(const ModeDensityMatrix& rho,
                                    const Provenance& provenance);
ModeDensityMatrix load_mode_density(const std::string& path);

}  // namespace obsim
