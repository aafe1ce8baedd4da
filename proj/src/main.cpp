#include "CLI11.hpp"

#include "obsim/orchestrator.hpp"
#include "obsim/output.hpp"
#include "obsim/run_config.hpp"
#include "obsim/version.hpp"

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool overwrite = false;
};

void add_common(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--config", opt.config_path, "run configuration file")
      ->required();
  cmd->add_option("--seed", opt.seed, "override the [trajectory] seed");
  cmd->add_option("--out", opt.out_dir, "override the [output] directory");
  cmd->add_flag("--overwrite", opt.overwrite,
                "replace results already present in the output directory");
}

void require_eta_sweep(const obsim::RunConfig& config, const char* name) {
  if (!config.sweep || config.sweep->variable != "eta") {
    throw std::invalid_argument(std::string(name) +
                                " needs a [sweep] section with variable = eta");
  }
}

int run(const std::string& name, const CliOptions& opt, bool seed_given,
        bool out_given) {
  obsim::RunConfig config = obsim::load_config(opt.config_path);
  if (seed_given) config.trajectory.seed = opt.seed;
  if (out_given) config.output_dir = opt.out_dir;

  obsim::Provenance prov;
  prov.version = obsim::kVersion;
  prov.subcommand = name;
  prov.seed = config.trajectory.seed;
  prov.config_hash = obsim::config_hash(config);

  obsim::FileManifest manifest;
  if (name == "wigner") {
    if (config.density_path.empty()) {
      throw std::invalid_argument(
          "wigner needs [wigner] density pointing at a stored mode density");
    }
    const obsim::ModeDensityMatrix rho =
        obsim::load_mode_density(config.density_path);
    const auto field = obsim::wigner::wigner_from_density(rho, config.phase_grid);
    const auto moments = obsim::wigner::wigner_moments(field);
    if (moments.coverage_warning) {
      std::fprintf(stderr,
                   "warning: phase-space grid clips the state (norm %.3f); "
                   "widen [wigner] bounds\n",
                   moments.norm);
    }
    manifest = obsim::write_wigner_outputs(field, moments, prov,
                                           config.output_dir, opt.overwrite);
  } else {
    obsim::RunParts parts;
    if (name == "trajectory") {
      if (config.sweep) {
        throw std::invalid_argument(
            "trajectory runs a single point; drop the [sweep] section or use "
            "the sweep subcommand");
      }
      parts = {true, true, true};
    } else if (name == "sweep") {
      if (!config.sweep) {
        throw std::invalid_argument("sweep needs a [sweep] section");
      }
      parts = {true, true, true};
    } else if (name == "meanfield") {
      require_eta_sweep(config, "meanfield");
      parts = {false, true, false};
    } else {  // fluct
      require_eta_sweep(config, "fluct");
      parts = {false, false, true};
    }
    obsim::SweepResult result = obsim::orchestrate(config, prov, parts);
    result.store_density = (name == "trajectory");
    manifest =
        obsim::write_outputs(result, config.output_dir, opt.overwrite);
  }
  std::printf("wrote %zu files to %s\n", manifest.entries.size() + 1,
              config.output_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "steady-state statistics of a driven cavity mode coupled to N "
      "two-level atoms"};
  app.set_version_flag("--version", obsim::kVersion);
  app.require_subcommand(1);

  CliOptions opt;
  add_common(app.add_subcommand(
                 "trajectory", "single quantum run with stored mode density"),
             opt);
  add_common(app.add_subcommand(
                 "sweep", "quantum statistics across a parameter grid"),
             opt);
  add_common(app.add_subcommand(
                 "meanfield", "semiclassical branch structure over a drive grid"),
             opt);
  add_common(app.add_subcommand(
                 "fluct", "linearized variances along the stable branches"),
             opt);
  add_common(app.add_subcommand(
                 "wigner", "render a stored mode density to phase space"),
             opt);

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  try {
    return run(sub->get_name(), opt, sub->count("--seed") > 0,
               sub->count("--out") > 0);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
