// zebra_perc: command-line front end for the percolation engine.
//
//   zebra_perc eval           --k 2 --p 0.75 --method closed-form
//   zebra_perc sweep          --k 3 --methods fixed-point,dp,relation --steps 101
//   zebra_perc critical       --k 3 --mode zebra-dp
//   zebra_perc verify         --suite all
//   zebra_perc transform-demo --k 2 --depth 4 --seed 3
//
// Data goes to stdout (or --output), messages to stderr. Exit codes:
// 0 ok, 1 verification failure, 2 invalid configuration, 3 non-convergence,
// 4 instance too large / unsupported order, 5 no bracket.

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zebra/analytic.hpp"
#include "zebra/montecarlo.hpp"
#include "zebra/report.hpp"
#include "zebra/tree.hpp"
#include "zebra/verify.hpp"

namespace {

using nlohmann::json;
using namespace zebra;

enum ExitCode : int {
  kOk = 0,
  kVerifyFailed = 1,
  kInvalidConfig = 2,
  kNonConvergence = 3,
  kTooLarge = 4,
  kNoBracket = 5,
};

struct RunConfig {
  std::uint32_t k = 2;
  bool full_cayley = false;
  std::optional<double> p;
  double pmin = 0.0;
  double pmax = 1.0;
  std::uint32_t steps = 101;
  std::uint32_t depth = 0;
  std::uint64_t trials = 10'000;
  std::uint64_t seed = 0;
  std::string method = "fixed-point";
  std::vector<std::string> methods{"fixed-point"};
  std::string event = "zebra";
  std::string first;
  std::string output;
  std::string format = "csv";
  std::optional<double> tol;
  std::optional<std::uint64_t> max_iter;
  std::string mode = "standard";
  std::string suite = "all";
  bool exhaustive = false;
  std::string sigma_file;
  std::string config_path;
};

json to_json(const RunConfig& c) {
  json j = {{"k", c.k},           {"full-cayley", c.full_cayley}, {"pmin", c.pmin},     {"pmax", c.pmax},
            {"steps", c.steps},   {"depth", c.depth},             {"trials", c.trials}, {"seed", c.seed},
            {"method", c.method}, {"methods", c.methods},         {"event", c.event},   {"first", c.first},
            {"output", c.output}, {"format", c.format},           {"mode", c.mode},     {"suite", c.suite},
            {"exhaustive", c.exhaustive}, {"sigma-file", c.sigma_file}};
  j["p"] = c.p ? json(*c.p) : json(nullptr);
  j["tol"] = c.tol ? json(*c.tol) : json(nullptr);
  j["max-iter"] = c.max_iter ? json(*c.max_iter) : json(nullptr);
  return j;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Fills `c` from a JSON object whose keys are the long flag names.
void apply_json(const json& j, RunConfig& c) {
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "k") c.k = v.get<std::uint32_t>();
      else if (key == "full-cayley") c.full_cayley = v.get<bool>();
      else if (key == "p") c.p = v.get<double>();
      else if (key == "pmin") c.pmin = v.get<double>();
      else if (key == "pmax") c.pmax = v.get<double>();
      else if (key == "steps") c.steps = v.get<std::uint32_t>();
      else if (key == "depth") c.depth = v.get<std::uint32_t>();
      else if (key == "trials") c.trials = v.get<std::uint64_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "method") c.method = v.get<std::string>();
      else if (key == "methods") c.methods = v.is_array() ? v.get<std::vector<std::string>>() : split_list(v.get<std::string>());
      else if (key == "event") c.event = v.get<std::string>();
      else if (key == "first") c.first = v.get<std::string>();
      else if (key == "output") c.output = v.get<std::string>();
      else if (key == "format") c.format = v.get<std::string>();
      else if (key == "tol") c.tol = v.get<double>();
      else if (key == "max-iter") c.max_iter = v.get<std::uint64_t>();
      else if (key == "mode") c.mode = v.get<std::string>();
      else if (key == "suite") c.suite = v.get<std::string>();
      else if (key == "exhaustive") c.exhaustive = v.get<bool>();
      else if (key == "sigma-file") c.sigma_file = v.get<std::string>();
      else throw InvalidArgument("config: unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw InvalidArgument("config: bad value for '" + key + "': " + e.what());
    }
  }
}

// Finds --config before the real parse so that flags can override the file.
std::optional<std::string> find_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    std::string_view arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (arg.rfind("--config=", 0) == 0) return std::string(arg.substr(9));
  }
  return std::nullopt;
}

unsigned workers_from_env() {
  const char* env = std::getenv("ZEBRA_PERC_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  std::string_view s(env);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw InvalidArgument("ZEBRA_PERC_THREADS: expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return value;
}

TreeParams params_of(const RunConfig& c) {
  return TreeParams(c.k, c.full_cayley ? RootMode::FullCayley : RootMode::RootedK);
}

std::optional<EdgeState> first_of(const RunConfig& c) {
  if (c.first.empty()) return std::nullopt;
  if (c.first == "open") return EdgeState::Open;
  if (c.first == "closed") return EdgeState::Closed;
  throw InvalidArgument("first: expected 'open' or 'closed'");
}

Probability probability_of(double v, const char* field) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(field) + ": must lie in [0,1]");
  return Probability(v);
}

void check_format(const RunConfig& c) {
  if (c.format != "csv" && c.format != "json") throw InvalidArgument("format: expected csv or json");
}

PointRequest request_of(const RunConfig& c, Method method, double p, unsigned workers) {
  PointRequest r;
  r.params = params_of(c);
  r.p = probability_of(p, "p");
  r.method = method;
  r.event = event_from_string(c.event);
  r.first = first_of(c);
  r.depth = c.depth;
  r.trials = c.trials;
  r.seed = c.seed;
  r.tol = c.tol;
  r.max_iter = c.max_iter;
  r.workers = workers;
  if (c.trials < 1) throw InvalidArgument("trials: must be >= 1");
  return r;
}

// Opens --output or falls back to stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw InvalidArgument("output: cannot open '" + path + "'");
    }
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

int cmd_eval(const RunConfig& c, unsigned workers) {
  check_format(c);
  if (!c.p) throw InvalidArgument("p: eval needs --p");
  CurvePoint point = evaluate_point(request_of(c, method_from_string(c.method), *c.p, workers));
  Sink sink(c.output);
  if (c.format == "json") {
    sink.out() << zebra::to_json(point).dump() << '\n';
  } else {
    sink.out() << kCsvHeader << '\n' << to_csv(point) << '\n';
  }
  return kOk;
}

int cmd_sweep(const RunConfig& c, unsigned workers) {
  check_format(c);
  if (c.methods.empty()) throw InvalidArgument("methods: at least one method is required");
  std::vector<Method> methods;
  for (const std::string& m : c.methods) methods.push_back(method_from_string(m));
  std::vector<double> grid = probability_grid(c.pmin, c.pmax, c.steps);
  // Validate the shared fields before any output.
  request_of(c, methods.front(), grid.front(), workers);

  Sink sink(c.output);
  std::ostream& os = sink.out();
  json records = json::array();
  auto finish_json = [&] {
    if (c.format == "json") os << records.dump() << '\n';
    os.flush();
  };
  if (c.format == "csv") os << kCsvHeader << '\n';
  try {
    for (double p : grid) {
      for (Method m : methods) {
        CurvePoint point = evaluate_point(request_of(c, m, p, workers));
        if (c.format == "json") {
          records.push_back(zebra::to_json(point));
        } else {
          os << to_csv(point) << '\n';
        }
      }
    }
  } catch (...) {
    finish_json();
    throw;
  }
  finish_json();
  return kOk;
}

int cmd_critical(const RunConfig& c, unsigned workers) {
  check_format(c);
  TreeParams params = params_of(c);
  struct Row {
    std::string side;
    double value;
    double reference;
  };
  std::vector<Row> rows;
  if (c.mode == "standard") {
    double v = standard_critical(params).value();
    rows.push_back({"threshold", v, 1.0 / params.k()});
  } else if (c.mode == "zebra-dp" || c.mode == "zebra-mc") {
    if (params.k() < 3) {
      throw NoBracket("k=" + std::to_string(params.k()) + ": no zebra-percolation (k^2 p(1-p) <= 1 for every p)");
    }
    CriticalPair ref = zebra_critical_pair(params);
    for (Side side : {Side::Lower, Side::Upper}) {
      double located = 0.0;
      if (c.mode == "zebra-dp") {
        SolverConfig cfg(c.tol.value_or(1e-6), c.max_iter.value_or(200));
        located = find_critical_dp(params, side, cfg).value();
      } else {
        SolverConfig cfg(c.tol.value_or(1e-4), c.max_iter.value_or(60));
        if (c.trials < 1) throw InvalidArgument("trials: must be >= 1");
        located = find_critical_mc(params, side, c.depth == 0 ? 16 : c.depth, c.trials, c.seed, cfg, workers).value();
      }
      rows.push_back({side == Side::Lower ? "lower" : "upper", located,
                      (side == Side::Lower ? ref.p_low : ref.p_high).value()});
    }
  } else {
    throw InvalidArgument("mode: expected standard, zebra-dp or zebra-mc");
  }

  Sink sink(c.output);
  if (c.format == "json") {
    json out = json::array();
    for (const Row& r : rows) {
      out.push_back({{"k", params.k()}, {"root_mode", to_string(params.root_mode())}, {"mode", c.mode},
                     {"side", r.side}, {"value", r.value}, {"reference", r.reference},
                     {"abs_gap", std::abs(r.value - r.reference)}});
    }
    sink.out() << out.dump() << '\n';
  } else {
    sink.out() << "k,root_mode,mode,side,value,reference,abs_gap\n";
    for (const Row& r : rows) {
      sink.out() << params.k() << ',' << to_string(params.root_mode()) << ',' << c.mode << ',' << r.side << ','
                 << format_number(r.value) << ',' << format_number(r.reference) << ','
                 << format_number(std::abs(r.value - r.reference)) << '\n';
    }
  }
  return kOk;
}

int cmd_verify(const RunConfig& c) {
  const std::vector<std::string> known{"closed-form", "inverse", "oracle", "transform", "relation", "all"};
  if (std::find(known.begin(), known.end(), c.suite) == known.end()) {
    throw InvalidArgument("suite: expected one of closed-form, inverse, oracle, transform, relation, all");
  }
  bool all = c.suite == "all";
  std::vector<verify::CheckResult> results;
  auto run = [&](const std::vector<verify::CheckResult>& part) {
    verify::print(std::cout, part);
    results.insert(results.end(), part.begin(), part.end());
  };
  if (all || c.suite == "closed-form") run(verify::closed_form_suite());
  if (all || c.suite == "inverse") run(verify::inverse_suite());
  if (all || c.suite == "oracle") run(verify::oracle_suite());
  if (all || c.suite == "transform") run(verify::transform_suite(c.exhaustive));
  if (all || c.suite == "relation") {
    std::string path = c.output.empty() ? "relation_deviation.csv" : c.output;
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw InvalidArgument("output: cannot open '" + path + "'");
    run(verify::relation_suite(csv));
    std::cerr << "relation deviation written to " << path << '\n';
  }
  bool ok = verify::all_passed(results);
  std::cout << (ok ? "verify: all asserted checks passed" : "verify: FAILED") << '\n';
  return ok ? kOk : kVerifyFailed;
}

int cmd_transform_demo(const RunConfig& c) {
  TreeParams params = params_of(c);
  if (params.k() > 3) throw TooLarge("transform-demo supports k <= 3");
  std::optional<SigmaConfig> sigma;
  if (!c.sigma_file.empty()) {
    std::ifstream in(c.sigma_file);
    if (!in) throw InvalidArgument("sigma-file: cannot open '" + c.sigma_file + "'");
    sigma = read_sigma(in, params);
  } else {
    std::uint32_t depth = c.depth == 0 ? 4 : c.depth;
    if (depth % 2 != 0) throw OddDepth("depth: transform needs an even depth, got " + std::to_string(depth));
    if (depth > 6) throw TooLarge("transform-demo supports depth <= 6");
    sigma = sample_sigma(params, probability_of(c.p.value_or(0.5), "p"), depth, rng::TrialStream(c.seed, 0));
  }
  if (sigma->depth() % 2 != 0) throw OddDepth("sigma depth " + std::to_string(sigma->depth()) + " is odd");
  if (sigma->depth() > 6) throw TooLarge("transform-demo supports depth <= 6");
  PhiConfig phi = phi_of_sigma(*sigma);

  Sink sink(c.output);
  std::ostream& os = sink.out();
  os << "# sigma k=" << params.k() << " root_mode=" << to_string(params.root_mode()) << " depth=" << sigma->depth()
     << '\n';
  write_sigma(os, *sigma);
  os << "# phi depth=" << phi.depth() << '\n';
  write_phi(os, phi);
  for (auto [state, value, label] : {std::tuple{EdgeState::Open, PhiValue::Plus, "open-first/plus"},
                                     std::tuple{EdgeState::Closed, PhiValue::Minus, "closed-first/minus"}}) {
    std::optional<VertexAddress> witness = find_zebra_witness(*sigma, state);
    os << "# witness " << label << ": ";
    if (witness) {
      os << "sigma " << witness->to_string() << " phi " << gamma_to_hat(params, *witness).to_string();
    } else {
      os << "none";
    }
    os << " (phi ray " << (has_phi_ray(phi, value) ? "present" : "absent") << ")\n";
  }
  return kOk;
}

void add_tree_options(CLI::App* app, RunConfig& c) {
  app->add_option("--k", c.k, "Branching order k >= 2");
  app->add_flag("--full-cayley", c.full_cayley, "Root has k+1 children instead of k");
  app->add_option("--config", c.config_path, "JSON config file; flags override its values");
}

void add_method_options(CLI::App* app, RunConfig& c) {
  app->add_option("--depth", c.depth, "Truncation depth (0 = limit)");
  app->add_option("--trials", c.trials, "Monte-Carlo trials");
  app->add_option("--seed", c.seed, "Monte-Carlo seed");
  app->add_option("--event", c.event, "Event: open, zebra, zebra-count");
  app->add_option("--first", c.first, "Restrict zebra rays to a first edge: open or closed");
  app->add_option("--tol", c.tol, "Solver tolerance");
  app->add_option("--max-iter", c.max_iter, "Solver iteration cap");
  app->add_option("--output,-o", c.output, "Output file (default stdout)");
  app->add_option("--format", c.format, "csv or json");
}

int dispatch(int argc, char** argv) {
  RunConfig config;
  if (auto path = find_config_path(argc, argv)) {
    std::ifstream in(*path);
    if (!in) throw InvalidArgument("config: cannot open '" + *path + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw InvalidArgument(std::string("config: ") + e.what());
    }
    apply_json(j, config);
  }

  CLI::App app{"Standard and zebra percolation on rooted Cayley trees"};
  app.require_subcommand(1);

  auto* eval = app.add_subcommand("eval", "Evaluate one point");
  add_tree_options(eval, config);
  add_method_options(eval, config);
  eval->add_option("--p", config.p, "Bond-open probability");
  eval->add_option("--method", config.method, "closed-form, fixed-point, dp, relation, mc, brute-force");

  auto* sweep = app.add_subcommand("sweep", "Evaluate methods over a p grid");
  add_tree_options(sweep, config);
  add_method_options(sweep, config);
  sweep->add_option("--methods", config.methods, "Comma-separated methods")->delimiter(',');
  sweep->add_option("--pmin", config.pmin, "Grid start");
  sweep->add_option("--pmax", config.pmax, "Grid end");
  sweep->add_option("--steps", config.steps, "Grid points");

  auto* critical = app.add_subcommand("critical", "Locate critical points");
  add_tree_options(critical, config);
  add_method_options(critical, config);
  critical->add_option("--mode", config.mode, "standard, zebra-dp or zebra-mc");

  auto* verify_cmd = app.add_subcommand("verify", "Run invariant suites");
  verify_cmd->add_option("--suite", config.suite, "closed-form, inverse, oracle, transform, relation, all");
  verify_cmd->add_option("--output,-o", config.output, "Relation deviation CSV path");
  verify_cmd->add_flag("--exhaustive", config.exhaustive, "Enumerate all 2^30 depth-4 configurations (slow)");
  verify_cmd->add_option("--config", config.config_path, "JSON config file; flags override its values");

  auto* demo = app.add_subcommand("transform-demo", "Print a sigma configuration and its phi image");
  add_tree_options(demo, config);
  demo->add_option("--depth", config.depth, "Even depth <= 6 (default 4)");
  demo->add_option("--seed", config.seed, "Sampling seed");
  demo->add_option("--p", config.p, "Bond-open probability (default 0.5)");
  demo->add_option("--sigma-file", config.sigma_file, "Read sigma from a fixture file instead of sampling");
  demo->add_option("--output,-o", config.output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidConfig;
  }

  unsigned workers = workers_from_env();
  std::cerr << "resolved config: " << to_json(config).dump() << " threads=" << workers << '\n';

  if (*eval) return cmd_eval(config, workers);
  if (*sweep) return cmd_sweep(config, workers);
  if (*critical) return cmd_critical(config, workers);
  if (*verify_cmd) return cmd_verify(config);
  return cmd_transform_demo(config);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const zebra::NonConvergence& e) {
    std::cerr << "error: " << e.what() << " (last value " << e.last_value() << ")\n";
    return kNonConvergence;
  } catch (const zebra::NoBracket& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoBracket;
  } catch (const zebra::TooLarge& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kTooLarge;
  } catch (const zebra::UnsupportedOrder& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kTooLarge;
  } catch (const zebra::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const zebra::OddDepth& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const zebra::InvalidHatEdge& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerifyFailed;
  }
}
