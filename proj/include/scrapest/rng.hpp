#pragma once

#include <cstdint>
#include <random>

namespace scrapest {

/// Named substreams of a master seed. Toggling one stream (e.g. turning the
/// partition trajectory on or off) must not perturb draws in the others, so
/// each stream gets its own engine seeded by a mixed tag.
enum class RngStream : std::uint64_t {
  kState = 1,
  kPartition = 2,
  kObservation = 3,
  kMasses = 4,
  kMisc = 5,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, RngStream stream) {
  return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(stream)));
}

inline std::mt19937_64 make_engine(std::uint64_t master, RngStream stream) {
  return std::mt19937_64(derive_seed(master, stream));
}

/// Engine for the i-th independent replicate of a stream (Monte Carlo
/// trajectories, per-chunk work); deterministic regardless of thread count.
inline std::mt19937_64 make_engine(std::uint64_t master, RngStream stream,
                                   std::uint64_t replicate) {
  return std::mt19937_64(splitmix64(derive_seed(master, stream) ^ splitmix64(replicate)));
}

}  // namespace scrapest
