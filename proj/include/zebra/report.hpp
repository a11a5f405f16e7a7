#pragma once

// Point evaluation by method and the CSV / JSON record format shared by the
// command-line tool and the verification suites.

#include <array>
#include <charconv>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "zebra/analytic.hpp"
#include "zebra/error.hpp"
#include "zebra/montecarlo.hpp"
#include "zebra/params.hpp"

namespace zebra {

enum class Method { ClosedForm, FixedPoint, DP, Relation, MC, BruteForce };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::ClosedForm: return "closed-form";
    case Method::FixedPoint: return "fixed-point";
    case Method::DP: return "dp";
    case Method::Relation: return "relation";
    case Method::MC: return "mc";
    case Method::BruteForce: return "brute-force";
  }
  return "?";
}

inline Method method_from_string(std::string_view s) {
  for (Method m : {Method::ClosedForm, Method::FixedPoint, Method::DP, Method::Relation, Method::MC,
                   Method::BruteForce}) {
    if (to_string(m) == s) return m;
  }
  throw ParseError("unknown method '" + std::string(s) + "'");
}

inline std::string_view to_string(EventKind e) {
  switch (e) {
    case EventKind::OpenRay: return "open";
    case EventKind::ZebraRay: return "zebra";
    case EventKind::ZebraCount: return "zebra-count";
  }
  return "?";
}

inline EventKind event_from_string(std::string_view s) {
  for (EventKind e : {EventKind::OpenRay, EventKind::ZebraRay, EventKind::ZebraCount}) {
    if (to_string(e) == s) return e;
  }
  throw ParseError("unknown event '" + std::string(s) + "'");
}

// One evaluated point. Limits are recorded with depth 0; deterministic
// methods have ci_low = ci_high = value and trials = 0.
struct CurvePoint {
  std::uint32_t k = 2;
  RootMode root_mode = RootMode::RootedK;
  double p = 0.0;
  std::uint32_t depth = 0;
  Method method = Method::FixedPoint;
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

struct PointRequest {
  TreeParams params{2};
  Probability p{0.5};
  Method method = Method::FixedPoint;
  EventKind event = EventKind::ZebraRay;
  std::optional<EdgeState> first{};
  std::uint32_t depth = 0;
  std::uint64_t trials = 10'000;
  std::uint64_t seed = 0;
  std::optional<double> tol{};
  std::optional<std::uint64_t> max_iter{};
  unsigned workers = 0;
};

namespace detail {

inline SolverConfig solver_for(const PointRequest& r, SolverConfig defaults) {
  return SolverConfig(r.tol.value_or(defaults.tol), r.max_iter.value_or(defaults.max_iter));
}

inline EventSpec event_for(const PointRequest& r) {
  if (r.depth < 1) throw InvalidArgument("depth: method " + std::string(to_string(r.method)) + " needs --depth >= 1");
  switch (r.event) {
    case EventKind::OpenRay: return EventSpec::open_ray(r.depth);
    case EventKind::ZebraRay: return EventSpec::zebra_ray(r.depth, r.first);
    case EventKind::ZebraCount: return EventSpec::zebra_count(r.depth);
  }
  return {};
}

inline double dp_value(const PointRequest& r) {
  switch (r.event) {
    case EventKind::OpenRay:
      if (r.depth == 0) return theta_fixed_point(r.params, r.p, solver_for(r, SolverConfig::fixed_point())).value();
      return open_ray_probability(r.params, r.p, r.depth).value();
    case EventKind::ZebraRay:
      if (r.first) throw InvalidArgument("first: parity restriction is available for mc and brute-force only");
      if (r.depth == 0) return zebra_limit(r.params, r.p, solver_for(r, SolverConfig::zebra())).value();
      return zebra_dp(r.params, r.p, r.depth).back().z.value();
    case EventKind::ZebraCount:
      if (r.depth < 1) throw InvalidArgument("depth: zebra-count needs --depth >= 1");
      return expected_zebra_count(r.params, r.p, r.depth);
  }
  return 0.0;
}

}  // namespace detail

inline CurvePoint evaluate_point(const PointRequest& r) {
  CurvePoint out;
  out.k = r.params.k();
  out.root_mode = r.params.root_mode();
  out.p = r.p.value();
  out.method = r.method;
  switch (r.method) {
    case Method::ClosedForm:
      if (r.params.root_mode() != RootMode::RootedK) {
        throw InvalidArgument("root_mode: closed forms are for the rooted-k tree");
      }
      out.value = theta_closed_form(r.params.k(), r.p).value();
      break;
    case Method::FixedPoint:
      out.value = theta_fixed_point(r.params, r.p, detail::solver_for(r, SolverConfig::fixed_point())).value();
      break;
    case Method::DP:
      out.depth = r.depth;
      out.value = detail::dp_value(r);
      break;
    case Method::Relation:
      out.value = zebra_via_relation(r.params, r.p, detail::solver_for(r, SolverConfig::fixed_point())).value();
      break;
    case Method::BruteForce:
      out.depth = r.depth;
      out.value = brute_force_probability(r.params, r.p, detail::event_for(r));
      break;
    case Method::MC: {
      EventSpec event = detail::event_for(r);
      Estimate e = event.kind == EventKind::ZebraCount
                       ? estimate_mean(r.params, r.p, event, r.trials, r.seed, r.workers)
                       : estimate_probability(r.params, r.p, event, r.trials, r.seed, r.workers);
      out.depth = r.depth;
      out.value = e.mean;
      out.ci_low = e.ci95_low;
      out.ci_high = e.ci95_high;
      out.trials = e.trials;
      out.seed = e.seed;
      return out;
    }
  }
  out.ci_low = out.ci_high = out.value;
  return out;
}

// 12 significant digits, shortest form, independent of the C locale.
inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 12);
  if (ec != std::errc{}) throw Error("number formatting failed");
  return std::string(buf.data(), ptr);
}

inline constexpr std::string_view kCsvHeader = "k,root_mode,p,depth,method,value,ci_low,ci_high,trials,seed";

inline std::string to_csv(const CurvePoint& c) {
  std::string out;
  out += std::to_string(c.k);
  out += ',';
  out += to_string(c.root_mode);
  out += ',';
  out += format_number(c.p);
  out += ',';
  out += std::to_string(c.depth);
  out += ',';
  out += to_string(c.method);
  out += ',';
  out += format_number(c.value);
  out += ',';
  out += format_number(c.ci_low);
  out += ',';
  out += format_number(c.ci_high);
  out += ',';
  out += std::to_string(c.trials);
  out += ',';
  out += std::to_string(c.seed);
  return out;
}

inline nlohmann::json to_json(const CurvePoint& c) {
  return {{"k", c.k},
          {"root_mode", to_string(c.root_mode)},
          {"p", c.p},
          {"depth", c.depth},
          {"method", to_string(c.method)},
          {"value", c.value},
          {"ci_low", c.ci_low},
          {"ci_high", c.ci_high},
          {"trials", c.trials},
          {"seed", c.seed}};
}

// Evenly spaced grid from pmin to pmax inclusive.
inline std::vector<double> probability_grid(double pmin, double pmax, std::uint32_t steps) {
  if (!(pmin >= 0.0 && pmax <= 1.0 && pmin <= pmax)) {
    throw InvalidArgument("pmin/pmax: need 0 <= pmin <= pmax <= 1");
  }
  if (steps < 1) throw InvalidArgument("steps: must be >= 1");
  std::vector<double> grid;
  grid.reserve(steps);
  if (steps == 1) {
    grid.push_back(pmin);
    return grid;
  }
  for (std::uint32_t i = 0; i < steps; ++i) {
    grid.push_back(i + 1 == steps ? pmax : pmin + (pmax - pmin) * i / (steps - 1));
  }
  return grid;
}

}  // namespace zebra
