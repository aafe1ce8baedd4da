#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace obsim {

// Fixed-binning histogram over [lower, upper). Samples outside the range are
// clamped into the edge bins so the total count always equals the number of
// samples added; merge() requires identical binning.
struct Histogram {
  double lower = 0.0;
  double upper = 1.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  Histogram() = default;

  Histogram(double lo, double hi, int n_bins) : lower(lo), upper(hi) {
    if (!(hi > lo)) {
      throw std::invalid_argument("Histogram: upper must exceed lower");
    }
    if (n_bins < 1) {
      throw std::invalid_argument("Histogram: need at least one bin");
    }
    counts.assign(static_cast<std::size_t>(n_bins), 0);
  }

  int n_bins() const { return static_cast<int>(counts.size()); }

  void add(double x) {
    const double width = (upper - lower) / static_cast<double>(counts.size());
    long bin = static_cast<long>((x - lower) / width);
    if (bin < 0) bin = 0;
    if (bin >= static_cast<long>(counts.size())) {
      bin = static_cast<long>(counts.size()) - 1;
    }
    ++counts[static_cast<std::size_t>(bin)];
    ++total;
  }

  std::pair<double, double> bin_range(int bin) const {
    const double width = (upper - lower) / static_cast<double>(counts.size());
    return {lower + bin * width, lower + (bin + 1) * width};
  }

  void merge(const Histogram& other) {
    if (other.lower != lower || other.upper != upper ||
        other.counts.size() != counts.size()) {
      throw std::invalid_argument("Histogram::merge: binning mismatch");
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
      counts[i] += other.counts[i];
    }
    total += other.total;
  }
};

}  // namespace obsim
