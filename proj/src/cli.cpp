#include "qsearch/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "qsearch/adaptive.hpp"
#include "qsearch/asymptotics.hpp"
#include "qsearch/bounds.hpp"
#include "qsearch/capacity.hpp"
#include "qsearch/errors.hpp"
#include "qsearch/figures.hpp"
#include "qsearch/harness.hpp"
#include "qsearch/parallel.hpp"

namespace qsearch::cli {
namespace {

using nlohmann::json;

// Usage errors raised after CLI11 has finished parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string channel;
  double param = 0.0;
  std::string out;
  std::string config;
  unsigned threads = 0;
};

void add_channel(CLI::App* cmd, Common& c) {
  cmd->add_option("--channel", c.channel, "Channel family: bsc, bec or z")
      ->required()
      ->check(CLI::IsMember({"bsc", "bec", "z"}));
  cmd->add_option("--param", c.param, "Channel parameter (nu, tau or zeta) in [0,1]")->required();
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Output file (default: stdout)");
  cmd->add_option("--config", c.config, "Config file with `key = value` lines");
  cmd->add_option("--threads", c.threads, "Worker threads (0: QSEARCH_THREADS or all cores)");
}

ChannelSpec build_channel(const Common& c) {
  try {
    return make_channel(c.channel, c.param);
  } catch (const std::domain_error& e) {
    throw UsageError(std::string("--param: ") + e.what());
  }
}

// Writes `text` to --out or to `out`.
void emit(const Common& c, std::ostream& out, const std::string& text) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(c.out, std::ios::binary);
  if (!file) throw UsageError("--out: cannot open '" + c.out + "' for writing");
  file << text;
}

json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// --- config overlay ---------------------------------------------------------

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot read '" + path + "'");
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--config: line " + std::to_string(number) + " is not `key = value`");
    }
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return entries;
}

// Single-letter keys prefer the short flag (-n) but fall back to --M style names.
std::string flag_for(const CLI::App& cmd, const std::string& key) {
  if (key.size() == 1 && cmd.get_option_no_throw("-" + key) != nullptr) return "-" + key;
  return "--" + key;
}

bool mentions(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

std::optional<std::string> config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

// Appends config entries whose flags are absent from `args`.
std::vector<std::string> overlay(const CLI::App& app, std::vector<std::string> args) {
  const auto path = config_path(args);
  if (!path) return args;
  const CLI::App* cmd = nullptr;
  for (const auto& a : args) {
    if (const CLI::App* sub = app.get_subcommand_no_throw(a)) {
      cmd = sub;
      break;
    }
  }
  if (cmd == nullptr) throw UsageError("--config: a subcommand is required");
  for (const auto& [key, value] : read_config(*path)) {
    const std::string flag = flag_for(*cmd, key);
    const CLI::Option* opt = cmd->get_option_no_throw(flag);
    if (opt == nullptr || key == "config") {
      throw UsageError("--config: unknown key '" + key + "' for " + cmd->get_name());
    }
    if (mentions(args, flag)) continue;
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1") args.push_back(flag);
      else if (value != "false" && value != "0") {
        throw UsageError("--config: key '" + key + "' expects true or false");
      }
      continue;
    }
    args.push_back(flag);
    args.push_back(value);
  }
  return args;
}

// --- subcommands ------------------------------------------------------------

struct CapacityArgs {
  Common c;
  int grid = 20001;
};

std::string run_capacity(const CapacityArgs& a) {
  CapacityOptions options;
  if (a.grid < 3) throw UsageError("--grid: must be at least 3");
  options.grid_size = a.grid;
  const CapacityReport r = capacity(build_channel(a.c), options);
  json j;
  j["C"] = r.capacity;
  j["achievers"] = r.achievers;
  j["V_low"] = r.v_low;
  j["V_high"] = r.v_high;
  j["T"] = r.third_moment;
  j["grid"] = r.grid_size;
  j["tol"] = r.tolerance;
  return j.dump(2) + "\n";
}

struct SecondOrderArgs {
  Common c;
  std::int64_t n = 0;
  int d = 1;
  double eps = 0.0;
  std::string mode = "joint";
  std::string log_term = "none";
  double mean_queries = 0.0;
  bool bits = false;
};

std::string run_second_order(const SecondOrderArgs& a) {
  const ChannelSpec spec = build_channel(a.c);
  const LogTerm term = a.log_term == "minus-half-log" ? LogTerm::kMinusHalfLog
                       : a.log_term == "plus-log"     ? LogTerm::kPlusLog
                                                      : LogTerm::kNone;
  SecondOrderValue v;
  bool windowed = true;
  if (a.mode == "mi") {
    MiChannel mi;
    mi.flavor = spec.kind() == ChannelKind::kBsc   ? MiFlavor::kBsc
                : spec.kind() == ChannelKind::kBec ? MiFlavor::kBec
                                                   : MiFlavor::kZ;
    mi.param = spec.param();
    v = mi_resolution(mi, a.n, a.d, a.eps, term);
  } else {
    const CapacityReport report = capacity(spec);
    if (a.mode == "joint") {
      v = joint_resolution(report, a.n, a.d, a.eps, term);
    } else if (a.mode == "separate") {
      v = separate_resolution(report, a.n, a.d, a.eps, term);
    } else if (a.mode == "adaptive") {
      const double l = a.mean_queries > 0.0 ? a.mean_queries : static_cast<double>(a.n);
      v.value = adaptive_resolution_lb(report, l, a.d, a.eps);
      windowed = false;
    } else {
      v.value = adaptivity_gain_lb(report, a.n, a.d, a.eps);
      windowed = false;
    }
  }
  const double scale = a.bits ? 1.0 / std::numbers::ln2 : 1.0;
  json j;
  j["value_nats"] = v.value;
  j["value_bits"] = v.value / std::numbers::ln2;
  j["window_low"] = windowed ? json(v.window_low * scale) : json(nullptr);
  j["window_high"] = windowed ? json(v.window_high * scale) : json(nullptr);
  j["units"] = a.bits ? "bits" : "nats";
  return j.dump(2) + "\n";
}

struct BoundsArgs {
  Common c;
  std::string kind;
  std::int64_t n = 0;
  int d = 1;
  double M = 0.0;
  double p = -1.0;
  double eta = 0.0;
  std::string mode = "md";
  double eps = -1.0;
  double beta = 0.0;
  double kappa = 0.0;
  int qgrid = 201;
  double qmin = 1e-3;
};

std::string run_bounds(const BoundsArgs& a) {
  const ChannelSpec spec = build_channel(a.c);
  json j;
  if (a.kind == "ach") {
    if (!(a.M >= 1.0)) throw UsageError("--M: required for `bounds ach` and must be at least 1");
    const double p = a.p >= 0.0 ? a.p : capacity(spec).reporting_achiever;
    const double eta = a.eta > 0.0 ? a.eta : default_eta(a.M, a.d);
    const BoundMode mode = a.mode == "mi" ? BoundMode::kMeasurementIndependent
                                          : BoundMode::kMeasurementDependent;
    const AchievabilityTerms t = achievability_bound(spec, a.n, a.d, a.M, p, eta, mode);
    j["bound"] = t.value;
    j["raw"] = real_or_null(t.raw);
    j["atypicality"] = t.atypicality;
    j["change_of_measure"] = real_or_null(t.change_of_measure);
    j["tail_probability"] = t.tail_probability;
    j["union_slack"] = t.union_slack;
    j["M"] = a.M;
    j["p"] = p;
    j["eta"] = eta;
    j["mode"] = a.mode;
  } else {
    if (a.eps < 0.0) throw UsageError("--eps: required for `bounds conv`");
    const double beta = a.beta > 0.0 ? a.beta : default_beta(a.n, a.d);
    const double kappa = a.kappa > 0.0 ? a.kappa : default_kappa(a.n);
    ConverseOptions options;
    options.q_grid = a.qgrid;
    options.q_min = a.qmin;
    options.extra_q = capacity(spec).achievers;
    const ConverseResult r = converse_bound(spec, a.n, a.d, a.eps, beta, kappa, options);
    j["value_nats"] = r.value;
    j["value_bits"] = r.value / std::numbers::ln2;
    j["quantile"] = r.quantile;
    j["best_q"] = r.best_q;
    j["level"] = r.level;
    j["beta"] = r.beta;
    j["kappa"] = r.kappa;
    j["q_grid"] = a.qgrid;
    j["q_min"] = r.q_min;
  }
  return j.dump(2) + "\n";
}

TargetModel parse_target(const std::string& text) {
  if (text.empty() || text == "uniform") return TargetModel::uniform();
  std::vector<double> coords;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      coords.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--target: expected `uniform` or comma-separated decimals");
    }
  }
  return TargetModel::fixed(std::move(coords));
}

struct SimulateArgs {
  Common c;
  std::int64_t n = 0;
  int d = 1;
  double eps = 0.0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  bool separate = false;
  bool adaptive = false;
  std::string margin = "none";
  std::string target = "uniform";
  std::uint64_t M = 0;
  double p = -1.0;
  double lambda = 0.0;
};

std::string run_simulate(const SimulateArgs& a) {
  if (a.separate && a.adaptive) throw UsageError("--separate and --adaptive are exclusive");
  ExperimentSpec e(build_channel(a.c));
  e.n = a.n;
  e.d = a.d;
  e.eps = a.eps;
  e.trials = a.trials;
  e.master_seed = a.seed;
  e.mode = a.separate ? SearchMode::kSeparate : a.adaptive ? SearchMode::kAdaptive : SearchMode::kJoint;
  e.margin = a.margin == "halflog" ? MarginRule::kMinusHalfLogN : MarginRule::kNone;
  e.target = parse_target(a.target);
  e.forced_M = a.M;
  e.p = a.p;
  e.threads = resolve_threads(a.c.threads);
  e.adaptive.lambda = a.lambda;
  if (a.adaptive && (a.M == 0 || !(a.lambda > 0.0))) {
    throw UsageError("--adaptive needs --M and a positive --lambda");
  }
  const ExperimentSummary s = run_experiment(e);
  std::ostringstream os;
  if (a.adaptive) write_adaptive_csv(os, {s});
  else write_simulation_csv(os, {s});
  return os.str();
}

struct AdaptiveArgs {
  Common c;
  std::uint64_t M = 0;
  int d = 1;
  double p = -1.0;
  double eps = 0.5;
  double lambda = 0.0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  std::int64_t max_steps = 0;
  double dropout = 0.0;
  std::string target = "uniform";
};

std::string run_adaptive(const AdaptiveArgs& a) {
  ExperimentSpec e(build_channel(a.c));
  e.d = a.d;
  e.eps = a.eps;
  e.trials = a.trials;
  e.master_seed = a.seed;
  e.mode = SearchMode::kAdaptive;
  e.target = parse_target(a.target);
  e.forced_M = a.M;
  e.p = a.p;
  e.threads = resolve_threads(a.c.threads);
  e.adaptive.lambda = a.lambda;
  e.adaptive.max_steps = a.max_steps;
  e.adaptive.dropout = a.dropout;
  std::ostringstream os;
  write_adaptive_csv(os, {run_adaptive_experiment(e)});
  return os.str();
}

struct FigureArgs {
  Common c;
  std::string id;
  std::int64_t trials = 2000;
  std::optional<std::uint64_t> seed;
  std::vector<std::int64_t> n_values;
  std::vector<int> d_values;
};

void run_figure(const FigureArgs& a, std::ostream& out) {
  std::vector<FigureId> ids;
  if (a.id == "all") {
    ids = all_figures();
  } else {
    try {
      ids.push_back(parse_figure_id(a.id));
    } catch (const std::domain_error& e) {
      throw UsageError(std::string("figure id: ") + e.what());
    }
  }
  const bool randomized = std::any_of(ids.begin(), ids.end(), [](FigureId id) {
    return id == FigureId::kDimensions || id == FigureId::kSeparate;
  });
  if (randomized && !a.seed) throw UsageError("--seed: required for simulated figures");
  if (a.c.out.empty()) throw UsageError("--out: an output directory is required");
  std::filesystem::create_directories(a.c.out);
  FigureParams params;
  params.trials = a.trials;
  params.seed = a.seed.value_or(0);
  params.threads = resolve_threads(a.c.threads);
  params.n_values = a.n_values;
  params.d_values = a.d_values;
  for (const FigureId id : ids) {
    const FigureTable t = figure_series(id, params);
    const auto path = std::filesystem::path(a.c.out) / (std::string(figure_name(id)) + ".csv");
    std::ofstream file(path, std::ios::binary);
    if (!file) throw UsageError("--out: cannot write '" + path.string() + "'");
    write_figure_csv(file, t);
    out << path.string() << '\n';
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Noisy twenty-questions toolkit: capacities, second-order predictions, bounds "
               "and Monte Carlo simulation over measurement-dependent channels.",
               "qsearch"};
  app.require_subcommand(1);

  CapacityArgs cap;
  auto* capacity_cmd = app.add_subcommand("capacity", "Capacity, achievers and dispersion as JSON");
  add_channel(capacity_cmd, cap.c);
  capacity_cmd->add_option("--grid", cap.grid, "Grid points on [0,1] before refinement")
      ->capture_default_str();
  add_common(capacity_cmd, cap.c);

  SecondOrderArgs so;
  auto* so_cmd = app.add_subcommand("second-order", "Second-order resolution predictions as JSON");
  add_channel(so_cmd, so.c);
  so_cmd->add_option("-n", so.n, "Number of queries")->required()->check(CLI::PositiveNumber);
  so_cmd->add_option("-d", so.d, "Dimension")->capture_default_str()->check(CLI::PositiveNumber);
  so_cmd->add_option("--eps", so.eps, "Target excess-resolution probability")->required();
  so_cmd->add_option("--mode", so.mode, "joint, separate, adaptive, gain or mi")
      ->capture_default_str()
      ->check(CLI::IsMember({"joint", "separate", "adaptive", "gain", "mi"}));
  so_cmd->add_option("--log-term", so.log_term, "none, minus-half-log or plus-log")
      ->capture_default_str()
      ->check(CLI::IsMember({"none", "minus-half-log", "plus-log"}));
  so_cmd->add_option("--l", so.mean_queries, "Mean query budget for --mode adaptive (default n)");
  so_cmd->add_flag("--bits", so.bits, "Report the window in bits instead of nats");
  add_common(so_cmd, so.c);

  BoundsArgs bd;
  auto* bounds_cmd = app.add_subcommand("bounds", "Achievability (ach) or converse (conv) bound as JSON");
  bounds_cmd->add_option("kind", bd.kind, "ach or conv")->required()->check(CLI::IsMember({"ach", "conv"}));
  add_channel(bounds_cmd, bd.c);
  bounds_cmd->add_option("-n", bd.n, "Number of queries")->required()->check(CLI::PositiveNumber);
  bounds_cmd->add_option("-d", bd.d, "Dimension")->capture_default_str()->check(CLI::PositiveNumber);
  bounds_cmd->add_option("--M", bd.M, "ach: bins per dimension (real allowed)");
  bounds_cmd->add_option("--p", bd.p, "ach: design fraction (default: capacity achiever)");
  bounds_cmd->add_option("--eta", bd.eta, "ach: typicality slack (default: sqrt(d log M / 2M^d))");
  bounds_cmd->add_option("--mode", bd.mode, "ach: md or mi")->capture_default_str()->check(CLI::IsMember({"md", "mi"}));
  bounds_cmd->add_option("--eps", bd.eps, "conv: target excess-resolution probability");
  bounds_cmd->add_option("--beta", bd.beta, "conv: quantisation slack (default 1/(d sqrt n))");
  bounds_cmd->add_option("--kappa", bd.kappa, "conv: hypothesis-testing slack (default 1/sqrt n)");
  bounds_cmd->add_option("--qgrid", bd.qgrid, "conv: grid points for the query fraction")->capture_default_str();
  bounds_cmd->add_option("--qmin", bd.qmin, "conv: grid margin at both ends of [0,1]")->capture_default_str();
  add_common(bounds_cmd, bd.c);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo excess-resolution experiment as CSV");
  add_channel(sim_cmd, sim.c);
  sim_cmd->add_option("-n", sim.n, "Number of queries")->required()->check(CLI::PositiveNumber);
  sim_cmd->add_option("-d", sim.d, "Dimension")->capture_default_str()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--eps", sim.eps, "Target excess-resolution probability")->required();
  sim_cmd->add_option("--trials", sim.trials, "Independent trials")->required()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "Master seed")->required();
  sim_cmd->add_flag("--separate", sim.separate, "Search each dimension separately with n/d queries");
  sim_cmd->add_flag("--adaptive", sim.adaptive, "Run the adaptive procedure (needs --M, --lambda)");
  sim_cmd->add_option("--margin", sim.margin, "none or halflog (subtract (1/2) log n before choosing M)")
      ->capture_default_str()
      ->check(CLI::IsMember({"none", "halflog"}));
  sim_cmd->add_option("--target", sim.target, "uniform or comma-separated fixed coordinates")->capture_default_str();
  sim_cmd->add_option("--M", sim.M, "Force bins per dimension instead of the formula");
  sim_cmd->add_option("--p", sim.p, "Design fraction (default: capacity achiever)");
  sim_cmd->add_option("--lambda", sim.lambda, "Adaptive threshold in nats");
  add_common(sim_cmd, sim.c);

  AdaptiveArgs ad;
  auto* ad_cmd = app.add_subcommand("adaptive-sim", "Adaptive stopping-time sessions as CSV");
  add_channel(ad_cmd, ad.c);
  ad_cmd->add_option("--M", ad.M, "Bins per dimension")->required()->check(CLI::PositiveNumber);
  ad_cmd->add_option("-d", ad.d, "Dimension")->capture_default_str()->check(CLI::PositiveNumber);
  ad_cmd->add_option("--p", ad.p, "Design fraction (default: capacity achiever)");
  ad_cmd->add_option("--eps", ad.eps, "Picks the achiever branch when --p is absent")->capture_default_str();
  ad_cmd->add_option("--lambda", ad.lambda, "Threshold in nats")->required();
  ad_cmd->add_option("--trials", ad.trials, "Sessions")->required()->check(CLI::PositiveNumber);
  ad_cmd->add_option("--seed", ad.seed, "Master seed")->required();
  ad_cmd->add_option("--max-steps", ad.max_steps, "Step cap (default ceil(50 lambda / C1))");
  ad_cmd->add_option("--dropout", ad.dropout, "Probability of posing no query")->capture_default_str();
  ad_cmd->add_option("--target", ad.target, "uniform or comma-separated fixed coordinates")->capture_default_str();
  add_common(ad_cmd, ad.c);

  FigureArgs fig;
  auto* fig_cmd = app.add_subcommand("figure", "Figure data; writes <out>/<id>.csv");
  fig_cmd->add_option("id", fig.id, "f1_phase, f2_bscC, f3_becC, f4_gain, f4z_gain, f5_ddim, f6_separate or all")
      ->required();
  fig_cmd->add_option("--trials", fig.trials, "Trials per simulated point")->capture_default_str()->check(CLI::PositiveNumber);
  fig_cmd->add_option("--seed", fig.seed, "Master seed (required for f5_ddim, f6_separate)");
  fig_cmd->add_option("--n", fig.n_values, "Query counts for simulated figures")->delimiter(',');
  fig_cmd->add_option("--d", fig.d_values, "Dimensions for simulated figures")->delimiter(',');
  fig_cmd->add_option("--out", fig.c.out, "Output directory")->required();
  fig_cmd->add_option("--config", fig.c.config, "Config file with `key = value` lines");
  fig_cmd->add_option("--threads", fig.c.threads, "Worker threads (0: QSEARCH_THREADS or all cores)");

  try {
    std::vector<std::string> tokens = overlay(app, args);
    std::reverse(tokens.begin(), tokens.end());
    app.parse(tokens);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (capacity_cmd->parsed()) emit(cap.c, out, run_capacity(cap));
    else if (so_cmd->parsed()) emit(so.c, out, run_second_order(so));
    else if (bounds_cmd->parsed()) emit(bd.c, out, run_bounds(bd));
    else if (sim_cmd->parsed()) emit(sim.c, out, run_simulate(sim));
    else if (ad_cmd->parsed()) emit(ad.c, out, run_adaptive(ad));
    else if (fig_cmd->parsed()) run_figure(fig, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ResourceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitResource;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace qsearch::cli
