#pragma once

#include <cstdint>
#include <random>

namespace lgle {

using Rng = std::mt19937_64;

// SplitMix64 finaliser; used to derive independent task seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Seed for task `index` of a run with `master` seed. Depends only on the pair,
// never on which worker executes the task.
inline std::uint64_t task_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x632BE59BD9B4E019ull));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index) {
  return Rng(task_seed(master, index));
}

// Uniform draw on the open interval (0,1).
inline double uniform_open(Rng& rng) {
  for (;;) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

}  // namespace lgle
