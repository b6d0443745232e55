#include "qsearch/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "qsearch/asymptotics.hpp"
#include "qsearch/parallel.hpp"
#include "qsearch/rng.hpp"

namespace qsearch {
namespace {

// Substream under a trial seed for the dropout coin.
constexpr std::uint64_t kDropoutStream = 3;
// Separate mode: dimension j runs on derive_seed(trial seed, kSeparateBase + j).
constexpr std::uint64_t kSeparateBase = 16;

ResolutionChoice floor_exp(double x) {
  ResolutionChoice out;
  out.log_M = x;
  constexpr double kLog2To64 = 64.0 * 0.69314718055994530942;
  if (x >= kLog2To64) {
    out.M = std::numeric_limits<std::uint64_t>::max();
    out.saturated = true;
    return out;
  }
  // exp(x) carries a relative error of about |x| ulps; within that of the
  // next integer (e.g. x = 40 ln 2) the integer is taken as exact.
  const double e = std::exp(x);
  const double tolerance = e * (std::abs(x) + 1.0) * 4.0 * std::numeric_limits<double>::epsilon();
  const double m = std::ceil(e) - e <= tolerance ? std::ceil(e) : std::floor(e);
  if (!(m >= 2.0)) {
    out.M = 2;
    out.clamped = true;
    return out;
  }
  out.M = m >= 18446744073709551615.0 ? std::numeric_limits<std::uint64_t>::max()
                                      : static_cast<std::uint64_t>(m);
  return out;
}

void validate(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw std::domain_error("trials must be at least 1");
  if (!(spec.eps > 0.0 && spec.eps < 1.0)) throw std::domain_error("eps must lie in (0,1)");
  if (spec.n < 1) throw std::domain_error("number of queries must be at least 1");
  if (spec.d < 1) throw std::domain_error("dimension must be at least 1");
}

ExperimentSummary echo(const ExperimentSpec& spec) {
  ExperimentSummary s;
  s.channel = spec.channel.name();
  s.param = spec.channel.param();
  s.n = spec.n;
  s.d = spec.d;
  s.eps = spec.eps;
  s.mode = spec.mode;
  s.margin = spec.margin;
  s.trials = spec.trials;
  s.master_seed = spec.master_seed;
  return s;
}

void tally(ExperimentSummary& s, const std::vector<char>& excess, const std::vector<double>& err) {
  s.excess_count = 0;
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t i = 0; i < excess.size(); ++i) {
    s.excess_count += excess[i] ? 1 : 0;
    const double y = err[i] - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  s.excess_rate = static_cast<double>(s.excess_count) / static_cast<double>(s.trials);
  const Interval ci = wilson_interval(s.excess_count, s.trials);
  s.wilson_low = ci.low;
  s.wilson_high = ci.high;
  s.mean_max_abs_error = sum / static_cast<double>(s.trials);
}

}  // namespace

std::string to_string(SearchMode mode) {
  switch (mode) {
    case SearchMode::kJoint: return "joint";
    case SearchMode::kSeparate: return "separate";
    case SearchMode::kAdaptive: return "adaptive";
  }
  return "joint";
}

ResolutionChoice choose_resolution_M(const CapacityReport& report, std::int64_t n, int d,
                                     double eps, MarginRule margin) {
  double x = joint_resolution(report, n, d, eps).value;
  if (margin == MarginRule::kMinusHalfLogN) x -= 0.5 * std::log(static_cast<double>(n)) / d;
  return floor_exp(x);
}

ResolutionChoice choose_resolution_M(const ChannelSpec& spec, std::int64_t n, int d, double eps,
                                     MarginRule margin) {
  return choose_resolution_M(capacity(spec), n, d, eps, margin);
}

ResolutionChoice choose_separate_M(const CapacityReport& report, std::int64_t n, int d,
                                   double eps, MarginRule margin) {
  double x = separate_resolution(report, n, d, eps).value;
  const std::int64_t per_dim = n / d;
  if (margin == MarginRule::kMinusHalfLogN && per_dim >= 1) {
    x -= 0.5 * std::log(static_cast<double>(per_dim));
  }
  return floor_exp(x);
}

ExperimentSummary run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.mode == SearchMode::kAdaptive) return run_adaptive_experiment(spec);
  const auto start = std::chrono::steady_clock::now();
  ExperimentSummary s = echo(spec);
  const CapacityReport report = capacity(spec.channel);
  const bool separate = spec.mode == SearchMode::kSeparate;
  const double run_eps = separate ? spec.eps / spec.d : spec.eps;
  s.p = spec.p >= 0.0 ? spec.p : report.achiever_for(run_eps);
  if (spec.forced_M > 0) {
    s.M = spec.forced_M;
  } else {
    const ResolutionChoice choice =
        separate ? choose_separate_M(report, spec.n, spec.d, spec.eps, spec.margin)
                 : choose_resolution_M(report, spec.n, spec.d, spec.eps, spec.margin);
    s.M = choice.M;
    s.M_clamped = choice.clamped;
  }
  s.delta = 1.0 / static_cast<double>(s.M);
  s.queries_per_dimension = separate ? spec.n / spec.d : spec.n;
  s.discarded_queries = separate ? spec.n - spec.d * s.queries_per_dimension : 0;
  if (separate && s.queries_per_dimension < 1) {
    throw std::domain_error("separate search needs at least d queries");
  }

  const auto trials = static_cast<std::size_t>(spec.trials);
  std::vector<char> excess(trials, 0);
  std::vector<double> err(trials, 0.0);
  parallel_for(trials, resolve_threads(spec.threads), [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(spec.master_seed, i);
    if (!separate) {
      const TrialOutcome o =
          run_trial(spec.channel, s.M, spec.d, spec.n, s.p, spec.target, seed, spec.cell_budget);
      excess[i] = o.excess;
      err[i] = o.max_abs_error;
      return;
    }
    const std::vector<double> s_true = draw_target(spec.target, spec.d, seed);
    double worst = 0.0;
    bool any = false;
    for (int j = 0; j < spec.d; ++j) {
      const TrialOutcome o = run_trial(
          spec.channel, s.M, 1, s.queries_per_dimension, s.p,
          TargetModel::fixed({s_true[static_cast<std::size_t>(j)]}),
          derive_seed(seed, kSeparateBase + static_cast<std::uint64_t>(j)), spec.cell_budget);
      worst = std::max(worst, o.max_abs_error);
      any = any || o.excess;
    }
    excess[i] = any;
    err[i] = worst;
  });
  tally(s, excess, err);
  s.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

ExperimentSummary run_adaptive_experiment(const ExperimentSpec& spec) {
  validate(spec);
  if (spec.forced_M < 1) throw std::domain_error("adaptive experiments need an explicit M");
  if (!(spec.adaptive.lambda > 0.0)) throw std::domain_error("lambda must be positive");
  const auto start = std::chrono::steady_clock::now();
  ExperimentSummary s = echo(spec);
  s.mode = SearchMode::kAdaptive;
  s.M = spec.forced_M;
  s.delta = 1.0 / static_cast<double>(s.M);
  s.p = spec.p >= 0.0 ? spec.p : capacity(spec.channel).achiever_for(spec.eps);
  s.lambda = spec.adaptive.lambda;
  s.a0 = uniform_info_bound(spec.channel, s.p);
  s.c1 = mismatched_capacity(spec.channel, s.M, spec.d, s.p);
  s.design = adaptive_design_bounds(s.M, spec.d, s.lambda, s.a0, s.c1);
  s.max_steps = spec.adaptive.max_steps > 0 ? spec.adaptive.max_steps
                                            : default_max_steps(s.lambda, s.c1);

  const auto trials = static_cast<std::size_t>(spec.trials);
  std::vector<char> excess(trials, 0);
  std::vector<double> err(trials, 0.0);
  std::vector<std::int64_t> stop(trials, 0);
  std::vector<char> truncated(trials, 0);
  std::vector<char> dropped(trials, 0);
  parallel_for(trials, resolve_threads(spec.threads), [&](std::size_t i) {
    AdaptiveConfig cfg;
    cfg.M = s.M;
    cfg.d = spec.d;
    cfg.p = s.p;
    cfg.lambda = s.lambda;
    cfg.max_steps = s.max_steps;
    cfg.seed = derive_seed(spec.master_seed, i);
    cfg.hypothesis_budget = spec.cell_budget;
    Xoshiro256 coin(derive_seed(cfg.seed, kDropoutStream));
    const AdaptiveOutcome o = dropout_session(spec.channel, cfg, spec.adaptive.dropout, spec.target, coin);
    excess[i] = o.excess;
    err[i] = o.max_abs_error;
    stop[i] = o.stop_time;
    truncated[i] = o.truncated;
    dropped[i] = o.dropped;
  });
  tally(s, excess, err);
  double mean = 0.0;
  for (const auto t : stop) mean += static_cast<double>(t);
  mean /= static_cast<double>(trials);
  double var = 0.0;
  for (const auto t : stop) var += (static_cast<double>(t) - mean) * (static_cast<double>(t) - mean);
  var = trials > 1 ? var / static_cast<double>(trials - 1) : 0.0;
  s.mean_stop_time = mean;
  s.stop_time_std_error = std::sqrt(var / static_cast<double>(trials));
  for (std::size_t i = 0; i < trials; ++i) {
    s.truncated_count += truncated[i];
    s.dropped_count += dropped[i];
  }
  s.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

Interval wilson_interval(std::int64_t k, std::int64_t n, double confidence) {
  if (n < 1) throw std::domain_error("trial count must be at least 1");
  if (k < 0 || k > n) throw std::domain_error("success count must lie in [0, n]");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::domain_error("confidence must lie in (0,1)");
  const double z = gaussian_quantile(1.0 - (1.0 - confidence) / 2.0);
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (phat + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn));
  Interval out{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  if (k == 0) out.low = 0.0;
  if (k == n) out.high = 1.0;
  return out;
}

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_simulation_csv(std::ostream& os, const std::vector<ExperimentSummary>& rows) {
  os << kSimulationHeader << '\n';
  for (const auto& r : rows) {
    os << r.channel << ',' << format_real(r.param) << ',' << r.n << ',' << r.d << ','
       << format_real(r.eps) << ',' << to_string(r.mode) << ',' << r.M << ','
       << format_real(r.delta) << ',' << r.trials << ',' << r.excess_count << ','
       << format_real(r.excess_rate) << ',' << format_real(r.wilson_low) << ','
       << format_real(r.wilson_high) << ',' << format_real(r.mean_max_abs_error) << ','
       << r.master_seed << '\n';
  }
}

void write_adaptive_csv(std::ostream& os, const std::vector<ExperimentSummary>& rows) {
  os << kAdaptiveHeader << '\n';
  for (const auto& r : rows) {
    os << r.channel << ',' << format_real(r.param) << ',' << r.M << ',' << r.d << ','
       << format_real(r.p) << ',' << format_real(r.lambda) << ',' << r.max_steps << ','
       << r.dropped_count << ',' << r.trials << ',' << r.excess_count << ','
       << format_real(r.excess_rate) << ',' << format_real(r.wilson_low) << ','
       << format_real(r.wilson_high) << ',' << format_real(r.mean_stop_time) << ','
       << format_real(r.stop_time_std_error) << ',' << r.truncated_count << ','
       << format_real(r.design.mean_stop_ub) << ',' << format_real(r.design.error_ub) << ','
       << format_real(r.a0) << ',' << format_real(r.c1) << ',' << r.master_seed << '\n';
  }
}

}  // namespace qsearch
