#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "zebra/error.hpp"

namespace zebra {

// Root degree convention. RootedK gives the root k children like every other
// vertex; FullCayley gives it k+1 so that all vertices have k+1 neighbours.
enum class RootMode { RootedK, FullCayley };

inline std::string_view to_string(RootMode mode) {
  return mode == RootMode::RootedK ? "rooted-k" : "full-cayley";
}

inline RootMode root_mode_from_string(std::string_view s) {
  if (s == "rooted-k") return RootMode::RootedK;
  if (s == "full-cayley") return RootMode::FullCayley;
  throw ParseError("unknown root mode '" + std::string(s) + "'");
}

class TreeParams {
 public:
  explicit TreeParams(std::uint32_t k, RootMode mode = RootMode::RootedK)
      : k_(k), mode_(mode) {
    if (k < 2) throw InvalidArgument("branching order k must be >= 2, got " + std::to_string(k));
  }

  std::uint32_t k() const noexcept { return k_; }
  RootMode root_mode() const noexcept { return mode_; }

  // Number of children of the root.
  std::uint32_t root_degree() const noexcept {
    return mode_ == RootMode::RootedK ? k_ : k_ + 1;
  }

  friend bool operator==(const TreeParams&, const TreeParams&) = default;

 private:
  std::uint32_t k_;
  RootMode mode_;
};

// A real number in [0, 1]. Construction outside the interval (or NaN) throws.
// Stored in extended precision so that values produced by the fixed-point
// solver keep their distance from 1 (see `precise`).
class Probability {
 public:
  constexpr Probability() = default;

  explicit Probability(double value) : value_(check(value)) {}

  static Probability extended(long double value) {
    Probability out;
    out.value_ = check(value);
    return out;
  }

  constexpr double value() const noexcept { return static_cast<double>(value_); }
  constexpr long double precise() const noexcept { return value_; }
  Probability complement() const { return extended(1.0L - value_); }

  friend constexpr auto operator<=>(const Probability&, const Probability&) = default;

 private:
  static long double check(long double v) {
    if (!(v >= 0.0L && v <= 1.0L)) {
      throw InvalidArgument("probability out of [0,1]: " + std::to_string(v));
    }
    return v;
  }

  long double value_ = 0.0L;
};

struct SolverConfig {
  double tol = 1e-12;
  std::uint64_t max_iter = 1'000'000;

  SolverConfig() = default;
  SolverConfig(double tolerance, std::uint64_t iterations) : tol(tolerance), max_iter(iterations) {
    if (!(tol > 0.0)) throw InvalidArgument("solver tolerance must be > 0");
    if (max_iter < 1) throw InvalidArgument("solver max_iter must be >= 1");
  }

  // Defaults for the branch fixed point of 1 - (1 - p x)^k.
  static SolverConfig fixed_point() { return {1e-12, 1'000'000}; }
  // Defaults for the depth iteration of the zebra recursion.
  static SolverConfig zebra() { return {1e-10, 100'000}; }
};

}  // namespace zebra
