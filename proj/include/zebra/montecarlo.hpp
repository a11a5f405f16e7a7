#pragma once

// Monte-Carlo estimation of truncated percolation events with lazily sampled
// bonds, the exhaustive-enumeration oracle, and critical-point location.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "zebra/analytic.hpp"
#include "zebra/error.hpp"
#include "zebra/params.hpp"
#include "zebra/rng.hpp"
#include "zebra/stats.hpp"
#include "zebra/tree.hpp"

namespace zebra {

using Rational = boost::multiprecision::cpp_rational;

enum class EventKind { OpenRay, ZebraRay, ZebraCount };

struct EventSpec {
  EventKind kind = EventKind::ZebraRay;
  std::uint32_t depth = 1;
  // ZebraRay only: restrict the state of the first edge at the root.
  std::optional<EdgeState> first{};

  static EventSpec open_ray(std::uint32_t n) { return {EventKind::OpenRay, check(n), std::nullopt}; }
  static EventSpec zebra_ray(std::uint32_t n, std::optional<EdgeState> first = std::nullopt) {
    return {EventKind::ZebraRay, check(n), first};
  }
  static EventSpec zebra_count(std::uint32_t n) { return {EventKind::ZebraCount, check(n), std::nullopt}; }

 private:
  static std::uint32_t check(std::uint32_t n) {
    if (n < 1) throw InvalidArgument("event depth must be >= 1");
    return n;
  }
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Lazy depth-first samplers. Each bond is drawn at its first (and only) visit
// from its counter-based key; existence events return at the first witness.

namespace detail {

struct LazyTree {
  const TreeParams& params;
  double p;
  std::uint32_t n;

  std::uint32_t arity(std::uint32_t level) const { return level == 0 ? params.root_degree() : params.k(); }

  bool open_ray(std::uint64_t key, std::uint32_t level) const {
    for (std::uint32_t c = 0; c < arity(level); ++c) {
      std::uint64_t edge = rng::child_key(key, c);
      if (!rng::TrialStream::open(edge, p)) continue;
      if (level + 1 == n || open_ray(edge, level + 1)) return true;
    }
    return false;
  }

  bool zebra_ray(std::uint64_t key, std::uint32_t level, std::optional<EdgeState> required) const {
    for (std::uint32_t c = 0; c < arity(level); ++c) {
      std::uint64_t edge = rng::child_key(key, c);
      EdgeState s = rng::TrialStream::open(edge, p) ? EdgeState::Open : EdgeState::Closed;
      if (required && s != *required) continue;
      if (level + 1 == n || zebra_ray(edge, level + 1, flip(s))) return true;
    }
    return false;
  }

  std::uint64_t zebra_count(std::uint64_t key, std::uint32_t level, std::optional<EdgeState> required) const {
    std::uint64_t total = 0;
    for (std::uint32_t c = 0; c < arity(level); ++c) {
      std::uint64_t edge = rng::child_key(key, c);
      EdgeState s = rng::TrialStream::open(edge, p) ? EdgeState::Open : EdgeState::Closed;
      if (required && s != *required) continue;
      total += level + 1 == n ? 1 : zebra_count(edge, level + 1, flip(s));
    }
    return total;
  }
};

}  // namespace detail

inline bool sample_open_ray(const TreeParams& params, Probability p, std::uint32_t n,
                            const rng::TrialStream& stream) {
  if (n < 1) throw InvalidArgument("sample depth must be >= 1");
  return detail::LazyTree{params, p.value(), n}.open_ray(stream.root_key(), 0);
}

inline bool sample_zebra_ray(const TreeParams& params, Probability p, std::uint32_t n,
                             const rng::TrialStream& stream, std::optional<EdgeState> first = std::nullopt) {
  if (n < 1) throw InvalidArgument("sample depth must be >= 1");
  return detail::LazyTree{params, p.value(), n}.zebra_ray(stream.root_key(), 0, first);
}

// X_n: number of level-n vertices joined to the root by a descending zebra path.
inline std::uint64_t count_zebra_connected(const TreeParams& params, Probability p, std::uint32_t n,
                                           const rng::TrialStream& stream) {
  if (n < 1) throw InvalidArgument("sample depth must be >= 1");
  return detail::LazyTree{params, p.value(), n}.zebra_count(stream.root_key(), 0, std::nullopt);
}

// Materializes the same bonds the lazy samplers would see for this trial.
inline SigmaConfig sample_sigma(const TreeParams& params, Probability p, std::uint32_t depth,
                                const rng::TrialStream& stream) {
  SigmaConfig sigma(params, depth);
  const TreeShape& shape = sigma.shape();
  auto fill = [&](auto&& self, std::uint64_t key, std::uint64_t edge_index, std::uint32_t level) -> void {
    if (level == depth) return;
    for (std::uint64_t c = 0; c < shape.arity_at(level); ++c) {
      std::uint64_t key_c = rng::child_key(key, c);
      std::uint64_t idx = shape.child_edge(edge_index, level, c);
      sigma.set_at(idx, rng::TrialStream::open(key_c, p.value()) ? EdgeState::Open : EdgeState::Closed);
      self(self, key_c, idx, level + 1);
    }
  };
  fill(fill, stream.root_key(), 0, 0);
  return sigma;
}

// ---------------------------------------------------------------------------
// Events evaluated on a fully materialized configuration (bottom-up counts).

namespace detail {

// reach[s]: level-n descendants of the vertex reachable by an alternating
// path whose first edge has state s. A vertex at level n reaches itself.
inline std::array<std::uint64_t, 2> zebra_reach(const SigmaConfig& sigma, std::uint64_t edge, std::uint32_t level,
                                                std::uint32_t n) {
  if (level == n) return {1, 1};
  std::array<std::uint64_t, 2> out{0, 0};
  const TreeShape& shape = sigma.shape();
  for (std::uint64_t c = 0; c < shape.arity_at(level); ++c) {
    std::uint64_t child = shape.child_edge(edge, level, c);
    auto s = static_cast<std::size_t>(sigma.state_at(child));
    out[s] += zebra_reach(sigma, child, level + 1, n)[1 - s];
  }
  return out;
}

inline std::uint64_t open_reach(const SigmaConfig& sigma, std::uint64_t edge, std::uint32_t level, std::uint32_t n) {
  if (level == n) return 1;
  std::uint64_t out = 0;
  const TreeShape& shape = sigma.shape();
  for (std::uint64_t c = 0; c < shape.arity_at(level); ++c) {
    std::uint64_t child = shape.child_edge(edge, level, c);
    if (sigma.state_at(child) == EdgeState::Open) out += open_reach(sigma, child, level + 1, n);
  }
  return out;
}

inline bool phi_ray(const PhiConfig& phi, PhiValue value, std::uint64_t edge, std::uint32_t level) {
  if (level == phi.depth()) return true;
  const TreeShape& shape = phi.shape();
  for (std::uint64_t c = 0; c < shape.arity_at(level); ++c) {
    std::uint64_t child = shape.child_edge(edge, level, c);
    if (phi.value_at(child) == value && phi_ray(phi, value, child, level + 1)) return true;
  }
  return false;
}

inline void check_event_depth(const SigmaConfig& sigma, std::uint32_t n) {
  if (n < 1 || n > sigma.depth()) {
    throw InvalidArgument("event depth " + std::to_string(n) + " outside 1.." + std::to_string(sigma.depth()));
  }
}

}  // namespace detail

inline bool has_open_ray(const SigmaConfig& sigma, std::uint32_t n) {
  detail::check_event_depth(sigma, n);
  return detail::open_reach(sigma, 0, 0, n) > 0;
}

inline bool has_zebra_ray(const SigmaConfig& sigma, std::uint32_t n, std::optional<EdgeState> first = std::nullopt) {
  detail::check_event_depth(sigma, n);
  auto reach = detail::zebra_reach(sigma, 0, 0, n);
  if (first) return reach[static_cast<std::size_t>(*first)] > 0;
  return reach[0] + reach[1] > 0;
}

inline std::uint64_t zebra_count(const SigmaConfig& sigma, std::uint32_t n) {
  detail::check_event_depth(sigma, n);
  auto reach = detail::zebra_reach(sigma, 0, 0, n);
  return reach[0] + reach[1];
}

// Lexicographically first endpoint of a full-depth zebra ray whose first edge
// is `first`, if any.
inline std::optional<VertexAddress> find_zebra_witness(const SigmaConfig& sigma, EdgeState first) {
  const TreeShape& shape = sigma.shape();
  std::vector<std::uint32_t> path;
  auto search = [&](auto&& self, std::uint64_t edge, std::uint32_t level, EdgeState required) -> bool {
    if (level == sigma.depth()) return true;
    for (std::uint32_t c = 0; c < shape.arity_at(level); ++c) {
      std::uint64_t child = shape.child_edge(edge, level, c);
      if (sigma.state_at(child) != required) continue;
      path.push_back(c);
      if (self(self, child, level + 1, flip(required))) return true;
      path.pop_back();
    }
    return false;
  };
  if (sigma.depth() == 0 || !search(search, 0, 0, first)) return std::nullopt;
  return VertexAddress(path);
}

// A descending path of full length whose φ-edges all equal `value`.
inline bool has_phi_ray(const PhiConfig& phi, PhiValue value) {
  if (phi.depth() == 0) return true;
  return detail::phi_ray(phi, value, 0, 0);
}

// Value of `event` on a materialized configuration (count for ZebraCount,
// 0/1 otherwise).
inline std::uint64_t evaluate_event(const SigmaConfig& sigma, const EventSpec& event) {
  switch (event.kind) {
    case EventKind::OpenRay: return has_open_ray(sigma, event.depth);
    case EventKind::ZebraRay: return has_zebra_ray(sigma, event.depth, event.first);
    case EventKind::ZebraCount: return zebra_count(sigma, event.depth);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Exhaustive oracle.

namespace detail {

template <class Real>
Real power(Real base, std::uint64_t e) {
  Real out = 1;
  for (std::uint64_t i = 0; i < e; ++i) out *= base;
  return out;
}

template <class Real>
Real brute_force(const TreeParams& params, const Real& p, const EventSpec& event) {
  ConfigEnumeration configs = enumerate_configs(params, event.depth);
  std::uint64_t edges = sigma_shape(params, event.depth).edge_count();
  std::vector<Real> weight(edges + 1);
  for (std::uint64_t open = 0; open <= edges; ++open) {
    weight[open] = power<Real>(p, open) * power<Real>(Real(1) - p, edges - open);
  }
  Real total = 0;
  SigmaConfig sigma(params, event.depth);
  for (std::uint64_t c = 0; c < configs.size(); ++c) {
    sigma.assign_bits(c);
    std::uint64_t value = evaluate_event(sigma, event);
    if (value != 0) total += Real(value) * weight[sigma.open_count()];
  }
  return total;
}

}  // namespace detail

// Σ_σ P(σ) · event(σ) over every configuration of the depth-n truncation.
// For ZebraCount this is E[X_n].
inline double brute_force_probability(const TreeParams& params, Probability p, const EventSpec& event) {
  return detail::brute_force<double>(params, p.value(), event);
}

// Exact rational version; p must lie in [0, 1].
inline Rational brute_force_probability_exact(const TreeParams& params, const Rational& p, const EventSpec& event) {
  if (p < 0 || p > 1) throw InvalidArgument("probability out of [0,1]");
  return detail::brute_force<Rational>(params, p, event);
}

// ---------------------------------------------------------------------------
// Estimators.

inline unsigned resolve_workers(unsigned workers) {
  if (workers != 0) return workers;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace detail {

struct Tally {
  std::uint64_t sum = 0;
  unsigned __int128 sum_sq = 0;

  void add(std::uint64_t x) {
    sum += x;
    sum_sq += static_cast<unsigned __int128>(x) * x;
  }
  void merge(const Tally& other) {
    sum += other.sum;
    sum_sq += other.sum_sq;
  }
};

inline std::uint64_t sample_event(const TreeParams& params, Probability p, const EventSpec& event,
                                  const rng::TrialStream& stream) {
  switch (event.kind) {
    case EventKind::OpenRay: return sample_open_ray(params, p, event.depth, stream);
    case EventKind::ZebraRay: return sample_zebra_ray(params, p, event.depth, stream, event.first);
    case EventKind::ZebraCount: return count_zebra_connected(params, p, event.depth, stream);
  }
  return 0;
}

// Trials split into contiguous blocks, one per worker; tallies are integer
// sums, so the merged result does not depend on the split.
inline Tally run_trials(const TreeParams& params, Probability p, const EventSpec& event, std::uint64_t trials,
                        std::uint64_t seed, unsigned workers) {
  workers = static_cast<unsigned>(std::min<std::uint64_t>(resolve_workers(workers), trials));
  std::vector<Tally> tallies(workers);
  auto run = [&](unsigned w) {
    std::uint64_t begin = trials * w / workers;
    std::uint64_t end = trials * (w + 1) / workers;
    for (std::uint64_t t = begin; t < end; ++t) {
      tallies[w].add(sample_event(params, p, event, rng::TrialStream(seed, t)));
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  Tally total;
  for (const Tally& t : tallies) total.merge(t);
  return total;
}

inline void require_trials(std::uint64_t trials) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
}

}  // namespace detail

// Bernoulli event probability with a Wilson 95% interval.
inline Estimate estimate_probability(const TreeParams& params, Probability p, const EventSpec& event,
                                     std::uint64_t trials, std::uint64_t seed, unsigned workers = 0) {
  detail::require_trials(trials);
  if (event.kind == EventKind::ZebraCount) {
    throw InvalidArgument("estimate_probability takes an existence event; use estimate_mean for counts");
  }
  detail::Tally tally = detail::run_trials(params, p, event, trials, seed, workers);
  const double n = static_cast<double>(trials);
  const double mean = static_cast<double>(tally.sum) / n;
  Interval ci = wilson_interval(tally.sum, trials);
  return {mean, std::sqrt(mean * (1.0 - mean) / n), ci.low, ci.high, trials, seed};
}

// Mean of any event value (counts included) with a normal 95% interval.
inline Estimate estimate_mean(const TreeParams& params, Probability p, const EventSpec& event, std::uint64_t trials,
                              std::uint64_t seed, unsigned workers = 0) {
  detail::require_trials(trials);
  detail::Tally tally = detail::run_trials(params, p, event, trials, seed, workers);
  const double n = static_cast<double>(trials);
  const double mean = static_cast<double>(tally.sum) / n;
  double var = 0.0;
  if (trials > 1) {
    var = (static_cast<double>(tally.sum_sq) - n * mean * mean) / (n - 1.0);
    var = std::max(var, 0.0);
  }
  const double se = std::sqrt(var / n);
  return {mean, se, std::max(0.0, mean - kZ95 * se), mean + kZ95 * se, trials, seed};
}

// ---------------------------------------------------------------------------
// Zebra / φ correspondence.

// For σ of even depth 2m: a zebra ray of length 2m starting Open exists iff an
// all-Plus φ ray of length m exists, and likewise Closed / Minus. `phi` is a
// scratch buffer of the matching shape.
inline bool transform_equivalence_holds(const SigmaConfig& sigma, PhiConfig& phi) {
  phi_of_sigma_into(sigma, phi);
  auto reach = detail::zebra_reach(sigma, 0, 0, sigma.depth());
  bool open_first = reach[static_cast<std::size_t>(EdgeState::Open)] > 0;
  bool closed_first = reach[static_cast<std::size_t>(EdgeState::Closed)] > 0;
  return open_first == has_phi_ray(phi, PhiValue::Plus) && closed_first == has_phi_ray(phi, PhiValue::Minus);
}

inline bool transform_equivalence_holds(const SigmaConfig& sigma) {
  if (sigma.depth() % 2 != 0) throw OddDepth("sigma depth is odd");
  PhiConfig phi(sigma.params(), sigma.depth() / 2);
  return transform_equivalence_holds(sigma, phi);
}

inline bool transform_equivalence_trial(const TreeParams& params, Probability p, std::uint32_t m,
                                        const rng::TrialStream& stream) {
  if (m < 1) throw InvalidArgument("transform trial needs m >= 1");
  return transform_equivalence_holds(sample_sigma(params, p, 2 * m, stream));
}

// ---------------------------------------------------------------------------
// Critical points.

enum class Side { Lower, Upper };

inline constexpr double kCriticalThreshold = 1e-6;

// Bisection on [zebra_limit(p) > tau]. NonConvergence counts as below tau.
inline Probability find_critical_dp(const TreeParams& params, Side side,
                                    const SolverConfig& cfg = SolverConfig(1e-6, 200),
                                    double tau = kCriticalThreshold) {
  auto above = [&](double p) {
    try {
      return zebra_limit(params, Probability(p)).value() > tau;
    } catch (const NonConvergence&) {
      return false;
    }
  };
  if (!above(0.5)) {
    throw NoBracket("zebra indicator never exceeds threshold for k=" + std::to_string(params.k()) +
                    ": no zebra-percolation");
  }
  // Invariant: indicator false at `out`, true at `in`.
  double out = side == Side::Lower ? 0.0 : 1.0;
  double in = 0.5;
  for (std::uint64_t i = 0; i < cfg.max_iter && std::abs(in - out) > cfg.tol; ++i) {
    double mid = 0.5 * (in + out);
    (above(mid) ? in : out) = mid;
  }
  return Probability(0.5 * (in + out));
}

// Finite-depth crossing level used by find_critical_mc.
inline double mc_critical_threshold(std::uint32_t depth) { return std::min(0.5, 4.0 / depth); }

// Bisection on [MC estimate of ZebraRay(depth) > 4/depth]. All bisection steps
// share the seed, so bond uniforms are common across p. A finite-depth proxy:
// its bias shrinks as depth grows.
inline Probability find_critical_mc(const TreeParams& params, Side side, std::uint32_t depth, std::uint64_t trials,
                                    std::uint64_t seed, const SolverConfig& cfg = SolverConfig(1e-4, 60),
                                    unsigned workers = 0) {
  if (params.k() < 3) {
    throw NoBracket("k=" + std::to_string(params.k()) + " has no zebra-percolation window");
  }
  const double tau = mc_critical_threshold(depth);
  EventSpec event = EventSpec::zebra_ray(depth);
  auto above = [&](double p) { return estimate_probability(params, Probability(p), event, trials, seed, workers).mean > tau; };
  if (!above(0.5)) throw NoBracket("MC zebra estimate at p=1/2 is below the crossing level");
  double out = side == Side::Lower ? 0.0 : 1.0;
  double in = 0.5;
  for (std::uint64_t i = 0; i < cfg.max_iter && std::abs(in - out) > cfg.tol; ++i) {
    double mid = 0.5 * (in + out);
    (above(mid) ? in : out) = mid;
  }
  return Probability(0.5 * (in + out));
}

}  // namespace zebra
