#pragma once

// Deterministic numerics for the standard and zebra percolation functions:
// closed forms, the branch fixed point of f(x) = 1 - (1 - p x)^k, exact
// finite-depth recursions, and the critical values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "zebra/error.hpp"
#include "zebra/params.hpp"
#include "zebra/tree.hpp"

namespace zebra {

// Probability that one fixed length-n path from the root alternates.
inline Probability path_probability(Probability p, std::uint32_t n) {
  if (n == 0) throw InvalidArgument("path_probability needs n >= 1");
  double pq = p.value() * (1.0 - p.value());
  if (n % 2 == 0) return Probability(2.0 * std::pow(pq, n / 2));
  return Probability(std::pow(pq, (n - 1) / 2));
}

// 1/k for either root mode.
inline Probability standard_critical(const TreeParams& params) {
  return Probability(1.0 / params.k());
}

struct CriticalPair {
  Probability p_low;
  Probability p_high;
};

// Roots of k^2 p (1 - p) = 1.
inline CriticalPair zebra_critical_pair(const TreeParams& params) {
  const double k = params.k();
  const double s = std::sqrt(k * k - 4.0);
  // (k - s) / (2k) rewritten to avoid cancellation.
  return {Probability(2.0 / (k * (k + s))), Probability((k + s) / (2.0 * k))};
}

inline bool zebra_supercritical(const TreeParams& params, Probability p) {
  const double k = params.k();
  return k * k * p.value() * (1.0 - p.value()) > 1.0;
}

namespace detail {

// 1 - (1 - x)^d, accurate for small x.
template <class Real>
Real survive_any(Real x, Real d) {
  if (x >= Real(1)) return Real(1);
  return -std::expm1(d * std::log1p(-x));
}

}  // namespace detail

// θ̂: the largest fixed point of f(x) = 1 - (1 - p x)^k, or exactly 0 when
// p <= 1/k. Iterates x <- f(x) from x = 1; f is increasing and concave, so the
// iterates decrease monotonically onto θ̂. Stops once the step is below tol and
// the geometric error estimate step * f'/(1 - f') is below tol as well.
// Runs in long double: near p = 1 the distance 1 - θ̂ is far below double
// resolution and the inverse map needs it.
inline Probability theta_branch(std::uint32_t k, Probability p, const SolverConfig& cfg = SolverConfig::fixed_point()) {
  const long double pv = p.precise();
  const long double kk = k;
  // p at or below the double nearest 1/k is treated as critical or below.
  if (p.value() <= 1.0 / k || pv * kk <= 1.0L) return Probability(0.0);
  long double x = 1.0L;
  for (std::uint64_t i = 0; i < cfg.max_iter; ++i) {
    long double next = detail::survive_any(pv * x, kk);
    long double step = std::abs(next - x);
    long double slope = kk * pv * std::pow(1.0L - pv * next, kk - 1.0L);
    x = next;
    if (step <= cfg.tol && slope < 1.0L && step * slope / (1.0L - slope) <= cfg.tol) {
      return Probability::extended(x);
    }
  }
  throw NonConvergence("theta fixed point did not converge for k=" + std::to_string(k) +
                           ", p=" + std::to_string(p.value()),
                       static_cast<double>(x));
}

// θ_k(p) with the root correction for the chosen root degree.
inline Probability theta_fixed_point(const TreeParams& params, Probability p,
                                     const SolverConfig& cfg = SolverConfig::fixed_point()) {
  Probability branch = theta_branch(params.k(), p, cfg);
  if (branch.value() == 0.0 || params.root_mode() == RootMode::RootedK) return branch;
  return Probability::extended(
      detail::survive_any(p.precise() * branch.precise(), static_cast<long double>(params.root_degree())));
}

// The printed closed forms for θ_2 and θ_3.
inline Probability theta_closed_form(std::uint32_t k, Probability p) {
  const double x = p.value();
  if (k == 2) {
    if (x <= 0.5) return Probability(0.0);
    return Probability((2.0 * x - 1.0) / (x * x));
  }
  if (k == 3) {
    if (3.0 * x <= 1.0) return Probability(0.0);
    return Probability(2.0 * (3.0 * x - 1.0) / (x * (3.0 * x + std::sqrt(x * (4.0 - 3.0 * x)))));
  }
  throw UnsupportedOrder("closed form available only for k in {2,3}, got k=" + std::to_string(k));
}

// Inverse of p -> θ̂_k(p): (1 - (1 - x)^(1/k)) / x, extended by 1/k at x = 0.
inline Probability theta_inverse(std::uint32_t k, Probability x) {
  if (k < 2) throw InvalidArgument("theta_inverse needs k >= 2");
  const long double v = x.precise();
  if (v == 0.0L) return Probability::extended(1.0L / k);
  if (v == 1.0L) return Probability(1.0);
  return Probability::extended(-std::expm1(std::log1p(-v) / k) / v);
}

// Depth-n probability of an all-open descending ray: f iterated n times from 1,
// with the root step using the root degree.
inline Probability open_ray_probability(const TreeParams& params, Probability p, std::uint32_t n) {
  if (n == 0) return Probability(1.0);
  const double pv = p.value();
  double x = 1.0;
  for (std::uint32_t i = 1; i < n; ++i) x = detail::survive_any(pv * x, double(params.k()));
  return Probability(detail::survive_any(pv * x, double(params.root_degree())));
}

// Parity-conditioned depth-n probabilities.
//   a: an alternating descending path of length n exists from a k-child vertex
//      with its first edge open;
//   b: same with the first edge closed;
//   z: same from the root with either first edge.
struct ZebraDPState {
  std::uint32_t depth = 0;
  Probability a{1.0};
  Probability b{1.0};
  Probability z{1.0};
};

// Runs in long double with q the exact complement of p, so the step at 1 - p
// is the step at p with a and b exchanged.
inline ZebraDPState zebra_dp_step(const TreeParams& params, Probability p, const ZebraDPState& prev) {
  const long double pv = p.precise();
  const long double qv = p.complement().precise();
  const long double a = prev.a.precise();
  const long double b = prev.b.precise();
  const long double k = params.k();
  const long double per_child = std::min(pv * b + qv * a, 1.0L);
  return {prev.depth + 1, Probability::extended(detail::survive_any(pv * b, k)),
          Probability::extended(detail::survive_any(qv * a, k)),
          Probability::extended(detail::survive_any(per_child, static_cast<long double>(params.root_degree())))};
}

// States for depths 0..n.
inline std::vector<ZebraDPState> zebra_dp(const TreeParams& params, Probability p, std::uint32_t n) {
  std::vector<ZebraDPState> out;
  out.reserve(n + 1);
  out.emplace_back();
  for (std::uint32_t m = 1; m <= n; ++m) out.push_back(zebra_dp_step(params, p, out.back()));
  return out;
}

// ζ_k(p) as the depth limit of the recursion; exact 0 when k^2 p (1-p) <= 1.
inline Probability zebra_limit(const TreeParams& params, Probability p,
                               const SolverConfig& cfg = SolverConfig::zebra()) {
  if (!zebra_supercritical(params, p)) return Probability(0.0);
  ZebraDPState state;
  for (std::uint64_t m = 0; m < cfg.max_iter; ++m) {
    ZebraDPState next = zebra_dp_step(params, p, state);
    double step = std::max({std::abs(next.a.value() - state.a.value()), std::abs(next.b.value() - state.b.value()),
                            std::abs(next.z.value() - state.z.value())});
    state = next;
    // Z_1 = Z_0 = 1 for every p, so the first step says nothing.
    if (state.depth >= 2 && step < cfg.tol) return state.z;
  }
  throw NonConvergence("zebra limit did not converge for k=" + std::to_string(params.k()) +
                           ", p=" + std::to_string(p.value()),
                       state.z.value());
}

// θ_{k^2}(p (1 - p)) on a rooted order-k^2 tree.
inline Probability zebra_via_relation(const TreeParams& params, Probability p,
                                      const SolverConfig& cfg = SolverConfig::fixed_point()) {
  TreeParams squared(params.k() * params.k(), RootMode::RootedK);
  return theta_fixed_point(squared, Probability(p.value() * (1.0 - p.value())), cfg);
}

// E[X_n] = |W_n| P_n.
inline double expected_zebra_count(const TreeParams& params, Probability p, std::uint32_t n) {
  return static_cast<double>(level_size(params, n)) * path_probability(p, n).value();
}

}  // namespace zebra
