#include "obsim/output.hpp"

#include "json.hpp"
#include "obsim/version.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace obsim {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex_hash(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

// The '#' block at the top of every CSV artifact. No timestamps: reruns of
// the same config and seed must be byte-identical.
std::string provenance_lines(const Provenance& p) {
  std::ostringstream out;
  out << "# obsim " << p.version << "\n";
  out << "# subcommand: " << p.subcommand << "\n";
  out << "# seed: " << p.seed << "\n";
  out << "# config: " << hex_hash(p.config_hash) << "\n";
  out << "# units: time in 1/gamma, rates in units of gamma, amplitudes "
         "dimensionless\n";
  return out.str();
}

json provenance_json(const Provenance& p) {
  json j;
  j["version"] = p.version;
  j["subcommand"] = p.subcommand;
  j["seed"] = p.seed;
  j["config"] = hex_hash(p.config_hash);
  return j;
}

const char* branch_name(meanfield::BranchLabel label) {
  switch (label) {
    case meanfield::BranchLabel::lower: return "lower";
    case meanfield::BranchLabel::middle: return "middle";
    case meanfield::BranchLabel::upper: return "upper";
  }
  return "?";
}

// Serialized single-writer: files are rendered to strings first, hashed,
// then written one at a time through this helper.
void emit(const fs::path& dir, const std::string& name,
          const std::string& content, FileManifest& manifest) {
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  out.write(content.data(),
            static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw std::runtime_error("output: cannot write '" + path.string() + "'");
  }
  manifest.entries.push_back(
      {name, content.size(), fnv1a(content)});
}

void check_collision(const fs::path& dir, bool overwrite) {
  if (!overwrite && fs::exists(dir / "manifest.json")) {
    throw std::runtime_error("output: directory '" + dir.string() +
                             "' already holds results; pass --overwrite to "
                             "replace them");
  }
}

std::string render_manifest(const FileManifest& manifest,
                            const Provenance& prov) {
  json j;
  j["provenance"] = provenance_json(prov);
  j["files"] = json::array();
  for (const auto& entry : manifest.entries) {
    json f;
    f["name"] = entry.filename;
    f["bytes"] = entry.bytes;
    f["fnv1a"] = hex_hash(entry.content_hash);
    j["files"].push_back(f);
  }
  return j.dump(2) + "\n";
}

std::string render_quantum_csv(const SweepResult& result) {
  std::ostringstream out;
  out << provenance_lines(result.provenance);
  out << "key,n_atoms,g,kappa,gamma,delta_m,delta_a,eta,photon_mean,"
         "photon_se,out_amplitude,a_re,a_im,sigma_re,sigma_im,sigma_z,"
         "sigma_z_se,adag_sigma_re,adag_sigma_im,corr_adag_sigma_re,"
         "corr_adag_sigma_im,var_x,var_y,n_samples,jumps_total,"
         "truncation_warning,stationarity_ok\n";
  for (const auto& pt : result.points) {
    if (!pt.has_stats) continue;
    const auto& s = pt.stats;
    std::uint64_t jumps = 0;
    for (std::uint64_t n : s.jumps_per_channel) jumps += n;
    out << fmt(pt.key) << ',' << pt.params.n_atoms << ',' << fmt(pt.params.g)
        << ',' << fmt(pt.params.kappa) << ',' << fmt(pt.params.gamma) << ','
        << fmt(pt.params.delta_m) << ',' << fmt(pt.params.delta_a) << ','
        << fmt(pt.params.eta) << ',' << fmt(s.mean_photon_number) << ','
        << fmt(s.se.photon_number) << ',' << fmt(s.out_amplitude) << ','
        << fmt(s.mean_a.real()) << ',' << fmt(s.mean_a.imag()) << ','
        << fmt(s.mean_sigma.real()) << ',' << fmt(s.mean_sigma.imag()) << ','
        << fmt(s.mean_sigma_z) << ',' << fmt(s.se.sigma_z) << ','
        << fmt(s.mean_adag_sigma.real()) << ',' << fmt(s.mean_adag_sigma.imag())
        << ',' << fmt(s.corr_adag_sigma.real()) << ','
        << fmt(s.corr_adag_sigma.imag()) << ',' << fmt(s.quad_var_x) << ','
        << fmt(s.quad_var_y) << ',' << s.n_samples << ',' << jumps << ','
        << (s.truncation_warning ? 1 : 0) << ',' << (s.stationarity_ok ? 1 : 0)
        << "\n";
  }
  return out.str();
}

std::string render_histograms_csv(const SweepResult& result) {
  std::ostringstream out;
  out << provenance_lines(result.provenance);
  out << "key,bin,lower,upper,count,density\n";
  for (const auto& pt : result.points) {
    if (!pt.has_stats) continue;
    const Histogram& h = pt.stats.amplitude_histogram;
    const double total = h.total > 0 ? static_cast<double>(h.total) : 1.0;
    for (int b = 0; b < h.n_bins(); ++b) {
      const auto [lo, hi] = h.bin_range(b);
      const double density =
          static_cast<double>(h.counts[static_cast<std::size_t>(b)]) /
          (total * (hi - lo));
      out << fmt(pt.key) << ',' << b << ',' << fmt(lo) << ',' << fmt(hi) << ','
          << h.counts[static_cast<std::size_t>(b)] << ',' << fmt(density)
          << "\n";
    }
  }
  return out.str();
}

std::string render_meanfield_csv(const SweepResult& result) {
  std::ostringstream out;
  out << provenance_lines(result.provenance);
  out << "key,eta,branch,stable,alpha_abs,alpha_re,alpha_im,s_re,s_im,s_z,"
         "out_amplitude,max_re_eigenvalue,residual\n";
  for (const auto& pt : result.points) {
    for (const auto& sol : pt.mean_field.solutions) {
      out << fmt(pt.key) << ',' << fmt(pt.mean_field.eta) << ','
          << branch_name(sol.label) << ','
          << (sol.stability == meanfield::Stability::stable ? 1 : 0) << ','
          << fmt(std::abs(sol.state.alpha)) << ',' << fmt(sol.state.alpha.real())
          << ',' << fmt(sol.state.alpha.imag()) << ',' << fmt(sol.state.s.real())
          << ',' << fmt(sol.state.s.imag()) << ',' << fmt(sol.state.s_z) << ','
          << fmt(meanfield::out_amplitude(sol, pt.params)) << ','
          << fmt(sol.max_re_eigenvalue) << ',' << fmt(sol.residual) << "\n";
    }
  }
  return out.str();
}

std::string render_fluctuations_csv(const SweepResult& result) {
  std::ostringstream out;
  out << provenance_lines(result.provenance);
  out << "key,eta,branch,present,stable,var_x,var_y,corr_re,corr_im,"
         "corr_per_atom_re,corr_per_atom_im\n";
  for (const auto& pt : result.points) {
    for (const auto& row : pt.fluctuations) {
      out << fmt(pt.key) << ',' << fmt(row.eta) << ',' << branch_name(row.branch)
          << ',' << (row.present ? 1 : 0) << ',' << (row.stable ? 1 : 0) << ','
          << fmt(row.var_x) << ',' << fmt(row.var_y) << ','
          << fmt(row.corr.real()) << ',' << fmt(row.corr.imag()) << ','
          << fmt(row.corr_per_atom.real()) << ',' << fmt(row.corr_per_atom.imag())
          << "\n";
    }
  }
  return out.str();
}

std::string render_summary(const SweepResult& result) {
  json j;
  j["provenance"] = provenance_json(result.provenance);
  j["points"] = json::array();
  for (const auto& pt : result.points) {
    json p;
    p["key"] = pt.key;
    p["eta"] = pt.params.eta;
    p["n_atoms"] = pt.params.n_atoms;
    p["cooperativity"] = pt.params.cooperativity();
    if (pt.has_stats) {
      p["photon_mean"] = pt.stats.mean_photon_number;
      p["out_amplitude"] = pt.stats.out_amplitude;
      p["var_x"] = pt.stats.quad_var_x;
      p["var_y"] = pt.stats.quad_var_y;
      p["n_samples"] = pt.stats.n_samples;
      p["truncation_warning"] = pt.stats.truncation_warning;
      p["stationarity_ok"] = pt.stats.stationarity_ok;
    }
    if (!pt.mean_field.solutions.empty()) {
      p["mean_field_solutions"] = pt.mean_field.solutions.size();
    }
    j["points"].push_back(p);
  }
  if (result.folds) {
    json f;
    f["eta_low"] = result.folds->eta_low;
    f["eta_high"] = result.folds->eta_high;
    f["alpha_at_eta_low"] = result.folds->alpha_at_eta_low;
    f["alpha_at_eta_high"] = result.folds->alpha_at_eta_high;
    j["turning_points"] = f;
  }
  return j.dump(2) + "\n";
}

}  // namespace

FileManifest write_outputs(const SweepResult& result,
                           const std::string& directory, bool overwrite) {
  const fs::path dir(directory);
  fs::create_directories(dir);
  check_collision(dir, overwrite);

  bool any_stats = false;
  bool any_meanfield = false;
  bool any_fluct = false;
  for (const auto& pt : result.points) {
    any_stats = any_stats || pt.has_stats;
    any_meanfield = any_meanfield || !pt.mean_field.solutions.empty();
    any_fluct = any_fluct || !pt.fluctuations.empty();
  }

  FileManifest manifest;
  emit(dir, "summary.json", render_summary(result), manifest);
  if (any_stats) {
    emit(dir, "quantum_sweep.csv", render_quantum_csv(result), manifest);
    emit(dir, "histograms.csv", render_histograms_csv(result), manifest);
  }
  if (any_meanfield) {
    emit(dir, "meanfield.csv", render_meanfield_csv(result), manifest);
  }
  if (any_fluct) {
    emit(dir, "fluctuations.csv", render_fluctuations_csv(result), manifest);
  }
  if (result.store_density) {
    for (const auto& pt : result.points) {
      if (!pt.has_stats) continue;
      emit(dir, "mode_density.csv",
           render_mode_density_csv(pt.stats.mode_density, result.provenance),
           manifest);
      break;  // single-run artifact; first stats-bearing point only
    }
  }
  emit(dir, "manifest.json", render_manifest(manifest, result.provenance),
       manifest);
  manifest.entries.pop_back();  // the manifest does not list itself
  return manifest;
}

FileManifest write_wigner_outputs(const wigner::WignerField& field,
                                  const wigner::WignerMoments& moments,
                                  const Provenance& provenance,
                                  const std::string& directory,
                                  bool overwrite) {
  const fs::path dir(directory);
  fs::create_directories(dir);
  check_collision(dir, overwrite);

  FileManifest manifest;

  json j;
  j["provenance"] = provenance_json(provenance);
  json m;
  m["norm"] = moments.norm;
  m["mean_x"] = moments.mean_x;
  m["mean_y"] = moments.mean_y;
  m["var_x"] = moments.var_x;
  m["var_y"] = moments.var_y;
  m["coverage_warning"] = moments.coverage_warning;
  j["moments"] = m;
  emit(dir, "summary.json", j.dump(2) + "\n", manifest);

  std::ostringstream csv;
  csv << provenance_lines(provenance);
  wigner::write_csv(field, csv);
  emit(dir, "wigner.csv", csv.str(), manifest);

  std::ostringstream bin(std::ios::binary);
  std::ostringstream extra;
  extra << "\"version\":\"" << provenance.version << "\",\"subcommand\":\""
        << provenance.subcommand << "\",\"seed\":" << provenance.seed
        << ",\"config\":\"" << hex_hash(provenance.config_hash) << "\"";
  wigner::write_binary(field, bin, extra.str());
  emit(dir, "wigner.bin", bin.str(), manifest);

  emit(dir, "manifest.json", render_manifest(manifest, provenance), manifest);
  manifest.entries.pop_back();
  return manifest;
}

std::string render_mode_density_csv(const ModeDensityMatrix& rho,
                                    const Provenance& provenance) {
  std::ostringstream out;
  out << provenance_lines(provenance);
  out << "# dim: " << rho.dim() << "\n";
  out << "row,col,re,im\n";
  for (int r = 0; r < rho.dim(); ++r) {
    for (int c = 0; c < rho.dim(); ++c) {
      out << r << ',' << c << ',' << fmt(rho.entries(r, c).real()) << ','
          << fmt(rho.entries(r, c).imag()) << "\n";
    }
  }
  return out.str();
}

ModeDensityMatrix load_mode_density(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("mode density: cannot read '" + path + "'");
  }
  int dim = -1;
  std::string line;
  bool header_seen = false;
  struct Entry {
    int row, col;
    double re, im;
  };
  std::vector<Entry> entries;
  int max_index = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      int d = 0;
      if (std::sscanf(line.c_str(), "# dim: %d", &d) == 1) dim = d;
      continue;
    }
    if (!header_seen) {
      if (line != "row,col,re,im") {
        throw std::runtime_error("mode density: '" + path +
                                 "' lacks the row,col,re,im header");
      }
      header_seen = true;
      continue;
    }
    Entry e{};
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &e.row, &e.col, &e.re,
                    &e.im) != 4 ||
        e.row < 0 || e.col < 0) {
      throw std::runtime_error("mode density: malformed row in '" + path +
                               "': " + line);
    }
    max_index = std::max({max_index, e.row, e.col});
    entries.push_back(e);
  }
  if (entries.empty()) {
    throw std::runtime_error("mode density: '" + path + "' holds no entries");
  }
  if (dim < 0) dim = max_index + 1;
  if (max_index >= dim) {
    throw std::runtime_error("mode density: '" + path +
                             "' has indices past its declared dimension");
  }
  ModeDensityMatrix rho(dim);
  for (const auto& e : entries) {
    rho.entries(e.row, e.col) = {e.re, e.im};
  }
  return rho;
}

}  // namespace obsim
