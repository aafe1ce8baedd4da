// Checks an output directory against its manifest.json: every listed file
// must exist with the recorded byte count and FNV-1a content hash. Exits
// nonzero on the first discrepancy so scripts can gate on it.

#include "json.hpp"
#include "obsim/run_config.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <output-directory>\n", argv[0]);
    return 2;
  }
  const fs::path dir(argv[1]);
  try {
    const json manifest = json::parse(slurp(dir / "manifest.json"));
    int checked = 0;
    for (const auto& entry : manifest.at("files")) {
      const std::string name = entry.at("name").get<std::string>();
      const std::string content = slurp(dir / name);
      const auto bytes = entry.at("bytes").get<std::uint64_t>();
      if (content.size() != bytes) {
        std::fprintf(stderr, "%s: size %zu, manifest says %" PRIu64 "\n",
                     name.c_str(), content.size(), bytes);
        return 1;
      }
      char hash[24];
      std::snprintf(hash, sizeof hash, "%016" PRIx64, obsim::fnv1a(content));
      if (entry.at("fnv1a").get<std::string>() != hash) {
        std::fprintf(stderr, "%s: content hash mismatch\n", name.c_str());
        return 1;
      }
      ++checked;
    }
    std::printf("ok: %d files match %s\n", checked,
                (dir / "manifest.json").c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
