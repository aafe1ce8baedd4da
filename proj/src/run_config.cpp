#include "obsim/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace obsim {

namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kSweepVariables = {"eta",     "n_atoms", "g",
                                               "kappa",   "delta_m", "delta_a"};

[[noreturn]] void bad_key(const std::string& section, const std::string& key,
                          const std::string& why) {
  throw std::invalid_argument("config: [" + section + "] " + key + ": " + why);
}

double parse_double(const std::string& section, const std::string& key,
                    const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    bad_key(section, key, "expected a number, got '" + text + "'");
  }
}

int parse_int(const std::string& section, const std::string& key,
              const std::string& text) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    bad_key(section, key, "expected an integer, got '" + text + "'");
  }
}

std::uint64_t parse_u64(const std::string& section, const std::string& key,
                        const std::string& text) {
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    bad_key(section, key, "expected an unsigned integer, got '" + text + "'");
  }
}

bool parse_bool(const std::string& section, const std::string& key,
                const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  bad_key(section, key, "expected true or false, got '" + text + "'");
}

std::vector<double> parse_grid(const std::string& section,
                               const std::string& key, std::string text) {
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream in(text);
  std::vector<double> grid;
  std::string token;
  while (in >> token) {
    grid.push_back(parse_double(section, key, token));
  }
  if (grid.empty()) bad_key(section, key, "grid must not be empty");
  return grid;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Section walker: applies `handle(key, value)` to every entry and rejects
// keys the handler does not recognize.
template <typename Handler>
void walk_section(const pt::ptree& tree, const std::string& section,
                  Handler handle) {
  const auto child = tree.get_child_optional(section);
  if (!child) return;
  for (const auto& kv : *child) {
    if (!handle(kv.first, kv.second.data())) {
      bad_key(section, kv.first, "unknown key");
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  params.validate();
  trajectory.validate();
  if (workers < 1) {
    throw std::invalid_argument("config: [trajectory] workers must be >= 1");
  }
  if (output_dir.empty()) {
    throw std::invalid_argument("config: [output] directory must not be empty");
  }
  phase_grid.validate();
  if (!sweep) return;
  if (kSweepVariables.count(sweep->variable) == 0) {
    throw std::invalid_argument("config: [sweep] variable '" + sweep->variable +
                                "' is not sweepable");
  }
  if (sweep->grid.empty()) {
    throw std::invalid_argument("config: [sweep] grid must not be empty");
  }
  for (double v : sweep->grid) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("config: [sweep] grid values must be finite");
    }
  }
  if (sweep->variable == "n_atoms") {
    for (double v : sweep->grid) {
      if (v < 1.0 || v != std::floor(v)) {
        throw std::invalid_argument(
            "config: [sweep] n_atoms grid needs whole numbers >= 1");
      }
    }
  } else if (sweep->scaling_lock) {
    throw std::invalid_argument(
        "config: [sweep] scaling_lock applies only to n_atoms sweeps");
  }
}

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }

  const std::set<std::string> known_sections = {"system", "trajectory", "sweep",
                                                "output", "wigner"};
  for (const auto& kv : tree) {
    if (known_sections.count(kv.first) == 0) {
      throw std::invalid_argument(kv.second.empty()
                                      ? "config: key '" + kv.first +
                                            "' must live inside a section"
                                      : "config: unknown section [" + kv.first +
                                            "]");
    }
  }

  RunConfig config;
  walk_section(tree, "system", [&](const std::string& k, const std::string& v) {
    if (k == "n_atoms") config.params.n_atoms = parse_int("system", k, v);
    else if (k == "g") config.params.g = parse_double("system", k, v);
    else if (k == "kappa") config.params.kappa = parse_double("system", k, v);
    else if (k == "gamma") config.params.gamma = parse_double("system", k, v);
    else if (k == "delta_m") config.params.delta_m = parse_double("system", k, v);
    else if (k == "delta_a") config.params.delta_a = parse_double("system", k, v);
    else if (k == "eta") config.params.eta = parse_double("system", k, v);
    else return false;
    return true;
  });
  walk_section(tree, "trajectory",
               [&](const std::string& k, const std::string& v) {
    auto& t = config.trajectory;
    if (k == "dim_mode") t.dim_mode = parse_int("trajectory", k, v);
    else if (k == "dt_max") t.dt_max = parse_double("trajectory", k, v);
    else if (k == "burn_in") t.burn_in = parse_double("trajectory", k, v);
    else if (k == "sample_interval")
      t.sample_interval = parse_double("trajectory", k, v);
    else if (k == "total_time") t.total_time = parse_double("trajectory", k, v);
    else if (k == "seed") t.seed = parse_u64("trajectory", k, v);
    else if (k == "norm_tolerance")
      t.norm_tolerance = parse_double("trajectory", k, v);
    else if (k == "hist_bins") t.hist_bins = parse_int("trajectory", k, v);
    else if (k == "hist_max") t.hist_max = parse_double("trajectory", k, v);
    else if (k == "workers") config.workers = parse_int("trajectory", k, v);
    else return false;
    return true;
  });
  if (tree.get_child_optional("sweep")) {
    SweepSpec spec;
    walk_section(tree, "sweep", [&](const std::string& k, const std::string& v) {
      if (k == "variable") spec.variable = v;
      else if (k == "grid") spec.grid = parse_grid("sweep", k, v);
      else if (k == "scaling_lock") spec.scaling_lock = parse_bool("sweep", k, v);
      else return false;
      return true;
    });
    config.sweep = std::move(spec);
  }
  walk_section(tree, "output", [&](const std::string& k, const std::string& v) {
    if (k == "directory") config.output_dir = v;
    else return false;
    return true;
  });
  walk_section(tree, "wigner", [&](const std::string& k, const std::string& v) {
    auto& g = config.phase_grid;
    if (k == "density") config.density_path = v;
    else if (k == "x_min") g.x_min = parse_double("wigner", k, v);
    else if (k == "x_max") g.x_max = parse_double("wigner", k, v);
    else if (k == "y_min") g.y_min = parse_double("wigner", k, v);
    else if (k == "y_max") g.y_max = parse_double("wigner", k, v);
    else if (k == "nx") g.nx = parse_int("wigner", k, v);
    else if (k == "ny") g.ny = parse_int("wigner", k, v);
    else return false;
    return true;
  });

  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("config: cannot read '" + path + "'");
  }
  try {
    return parse_config(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(e.what()) + " (in " + path + ")");
  }
}

std::string canonical_serialize(const RunConfig& config) {
  std::ostringstream out;
  out << "[system]\n";
  out << "n_atoms = " << config.params.n_atoms << "\n";
  out << "g = " << format_double(config.params.g) << "\n";
  out << "kappa = " << format_double(config.params.kappa) << "\n";
  out << "gamma = " << format_double(config.params.gamma) << "\n";
  out << "delta_m = " << format_double(config.params.delta_m) << "\n";
  out << "delta_a = " << format_double(config.params.delta_a) << "\n";
  out << "eta = " << format_double(config.params.eta) << "\n";
  out << "[trajectory]\n";
  out << "dim_mode = " << config.trajectory.dim_mode << "\n";
  out << "dt_max = " << format_double(config.trajectory.dt_max) << "\n";
  out << "burn_in = " << format_double(config.trajectory.burn_in) << "\n";
  out << "sample_interval = " << format_double(config.trajectory.sample_interval)
      << "\n";
  out << "total_time = " << format_double(config.trajectory.total_time) << "\n";
  out << "seed = " << config.trajectory.seed << "\n";
  out << "norm_tolerance = " << format_double(config.trajectory.norm_tolerance)
      << "\n";
  out << "hist_bins = " << config.trajectory.hist_bins << "\n";
  out << "hist_max = " << format_double(config.trajectory.hist_max) << "\n";
  out << "workers = " << config.workers << "\n";
  if (config.sweep) {
    out << "[sweep]\n";
    out << "variable = " << config.sweep->variable << "\n";
    out << "grid =";
    for (double v : config.sweep->grid) out << " " << format_double(v);
    out << "\n";
    out << "scaling_lock = " << (config.sweep->scaling_lock ? "true" : "false")
        << "\n";
  }
  out << "[output]\n";
  out << "directory = " << config.output_dir << "\n";
  out << "[wigner]\n";
  out << "density = " << config.density_path << "\n";
  out << "x_min = " << format_double(config.phase_grid.x_min) << "\n";
  out << "x_max = " << format_double(config.phase_grid.x_max) << "\n";
  out << "y_min = " << format_double(config.phase_grid.y_min) << "\n";
  out << "y_max = " << format_double(config.phase_grid.y_max) << "\n";
  out << "nx = " << config.phase_grid.nx << "\n";
  out << "ny = " << config.phase_grid.ny << "\n";
  return out.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::uint64_t config_hash(const RunConfig& config) {
  // The destination directory has no bearing on what gets computed, so runs
  // that differ only in --out share a hash and stay byte-comparable.
  RunConfig computation = config;
  computation.output_dir.clear();
  return fnv1a(canonical_serialize(computation));
}

std::vector<SystemParams> resolve_scaling(const RunConfig& config) {
  std::vector<SystemParams> list;
  if (!config.sweep) {
    list.push_back(config.params);
    return list;
  }
  const SweepSpec& sweep = *config.sweep;
  list.reserve(sweep.grid.size());
  for (double value : sweep.grid) {
    SystemParams p = config.params;
    if (sweep.variable == "eta") p.eta = value;
    else if (sweep.variable == "g") p.g = value;
    else if (sweep.variable == "kappa") p.kappa = value;
    else if (sweep.variable == "delta_m") p.delta_m = value;
    else if (sweep.variable == "delta_a") p.delta_a = value;
    else if (sweep.variable == "n_atoms") {
      const int n = static_cast<int>(std::lround(value));
      if (n < 1) {
        throw std::invalid_argument("resolve_scaling: n_atoms must be >= 1");
      }
      if (sweep.scaling_lock) {
        p = obsim::resolve_scaling(config.params, n);
      } else {
        p.n_atoms = n;
      }
    } else {
      throw std::invalid_argument("resolve_scaling: unknown sweep variable '" +
                                  sweep.variable + "'");
    }
    p.validate();
    list.push_back(p);
  }
  return list;
}

}  // namespace obsim
