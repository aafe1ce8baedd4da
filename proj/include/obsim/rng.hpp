#pragma once

#include <cstdint>
#include <random>

namespace obsim {

// Mixing function of the splitmix64 generator. Used to derive well-separated
// seeds for parallel workers from one master seed; the full generator state
// walk plus the avalanche mix keeps sibling streams decorrelated even for
// adjacent master seeds.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Seed for stream (kind, index) under a master seed. Streams are stable:
// the same (master, kind, index) always maps to the same seed, so ensemble
// results are reproducible for a fixed worker count.
inline std::uint64_t derive_stream_seed(std::uint64_t master,
                                        std::uint64_t kind,
                                        std::uint64_t index) {
  std::uint64_t s = master;
  (void)splitmix64_next(s);
  s ^= 0xA5A5A5A55A5A5A5Aull * (kind + 1);
  (void)splitmix64_next(s);
  s ^= index;
  return splitmix64_next(s);
}

// Stream kinds, kept distinct so e.g. sweep-point seeds never collide with
// trajectory worker seeds derived from the same master.
inline constexpr std::uint64_t kStreamTrajectoryWorker = 0;
inline constexpr std::uint64_t kStreamSweepPoint = 1;

// Uniform random source for the jump sampling. mt19937_64 output is fully
// specified by the standard, and the [0,1) mapping below uses the top 53
// bits directly, so trajectories reproduce bit-for-bit across platforms.
class TrajectoryRng {
 public:
  explicit TrajectoryRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform double in (0, 1]; used for waiting-time thresholds where a zero
  // draw would trigger an immediate spurious jump.
  double uniform_positive() { return 1.0 - uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace obsim
