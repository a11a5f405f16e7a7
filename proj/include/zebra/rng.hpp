#pragma once

// Counter-based bond randomness.
//
// Every bond of every trial gets its own 64-bit key, derived only from
// (seed, trial index, edge address):
//
//   trial key   t = mix(mix(seed ^ kSeedSalt) + (trial + 1) * kGolden)
//   edge key    e(root child c)   = mix(t ^ mix((c + 1) * kChildSalt))
//               e(child c of e')  = mix(e' ^ mix((c + 1) * kChildSalt))
//   uniform     u(e) = (mix(e ^ kDrawSalt) >> 11) * 2^-53      in [0, 1)
//   bond open   iff u(e) < p
//
// where mix is the SplitMix64 finalizer. A bond therefore has the same value
// whatever order the tree is traversed in and whichever worker runs the trial.

#include <cstdint>

namespace zebra::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kSeedSalt = 0x5A17BEEFC0FFEE11ULL;
inline constexpr std::uint64_t kChildSalt = 0xD1B54A32D192ED03ULL;
inline constexpr std::uint64_t kDrawSalt = 0x8CB92BA72F3D8DD7ULL;

constexpr std::uint64_t mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Key of one edge below a vertex keyed `parent` (the trial key at the root).
constexpr std::uint64_t child_key(std::uint64_t parent, std::uint64_t child_index) noexcept {
  return mix(parent ^ mix((child_index + 1) * kChildSalt));
}

// Per-trial substream. Bonds are addressed by key, not drawn sequentially.
class TrialStream {
 public:
  constexpr TrialStream(std::uint64_t seed, std::uint64_t trial) noexcept
      : key_(mix(mix(seed ^ kSeedSalt) + (trial + 1) * kGolden)) {}

  constexpr std::uint64_t root_key() const noexcept { return key_; }

  static constexpr double uniform(std::uint64_t edge_key) noexcept {
    return to_unit(mix(edge_key ^ kDrawSalt));
  }

  static constexpr bool open(std::uint64_t edge_key, double p) noexcept { return uniform(edge_key) < p; }

 private:
  std::uint64_t key_;
};

}  // namespace zebra::rng
