#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qsearch/adaptive.hpp"
#include "qsearch/capacity.hpp"
#include "qsearch/channels.hpp"
#include "qsearch/nonadaptive.hpp"

namespace qsearch {

enum class SearchMode { kJoint, kSeparate, kAdaptive };
enum class MarginRule { kNone, kMinusHalfLogN };

std::string to_string(SearchMode mode);

/// Resolution picked from the second-order formula.
struct ResolutionChoice {
  std::uint64_t M = 2;
  double log_M = 0.0;      // the exponent before flooring
  bool clamped = false;    // formula gave M < 2
  bool saturated = false;  // formula exceeded 64 bits
};

/// M = max(2, floor(exp(x))) with x = (1/d)(nC + sqrt(n V_eps) Phi^{-1}(eps))
/// minus (1/2)(log n)/d under kMinusHalfLogN.
ResolutionChoice choose_resolution_M(const CapacityReport& report, std::int64_t n, int d,
                                     double eps, MarginRule margin);
ResolutionChoice choose_resolution_M(const ChannelSpec& spec, std::int64_t n, int d, double eps,
                                     MarginRule margin);

/// Per-dimension resolution for separate search: x = separate_resolution,
/// margin (1/2) log floor(n/d).
ResolutionChoice choose_separate_M(const CapacityReport& report, std::int64_t n, int d,
                                   double eps, MarginRule margin);

struct AdaptiveSettings {
  double lambda = 0.0;          // required, nats
  std::int64_t max_steps = 0;   // 0: default_max_steps(lambda, C1)
  double dropout = 0.0;
};

struct ExperimentSpec {
  explicit ExperimentSpec(ChannelSpec ch) : channel(std::move(ch)) {}

  ChannelSpec channel;
  std::int64_t n = 1;
  int d = 1;
  double eps = 0.1;
  std::int64_t trials = 1;
  std::uint64_t master_seed = 0;
  SearchMode mode = SearchMode::kJoint;
  MarginRule margin = MarginRule::kNone;
  TargetModel target;
  std::uint64_t forced_M = 0;  // 0: chosen by the formula for `mode`
  double p = -1.0;             // < 0: the capacity achiever for the run's eps
  unsigned threads = 0;
  std::uint64_t cell_budget = kDefaultCellBudget;
  AdaptiveSettings adaptive;
};

struct ExperimentSummary {
  std::string channel;
  double param = 0.0;
  std::int64_t n = 0;
  int d = 0;
  double eps = 0.0;
  SearchMode mode = SearchMode::kJoint;
  MarginRule margin = MarginRule::kNone;
  std::int64_t trials = 0;
  std::uint64_t master_seed = 0;

  std::uint64_t M = 0;
  double delta = 0.0;
  double p = 0.0;
  bool M_clamped = false;
  std::int64_t queries_per_dimension = 0;  // separate mode: floor(n/d)
  std::int64_t discarded_queries = 0;      // separate mode: n - d floor(n/d)

  std::int64_t excess_count = 0;
  double excess_rate = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  double mean_max_abs_error = 0.0;
  double elapsed_seconds = 0.0;

  // Adaptive mode only.
  double lambda = 0.0;
  std::int64_t max_steps = 0;
  double mean_stop_time = 0.0;
  double stop_time_std_error = 0.0;
  std::int64_t truncated_count = 0;
  std::int64_t dropped_count = 0;
  double a0 = 0.0;
  double c1 = 0.0;
  AdaptiveDesignBounds design;
};

/// Runs spec.trials independent trials; trial i uses derive_seed(master, i),
/// so the summary does not depend on the worker count.
ExperimentSummary run_experiment(const ExperimentSpec& spec);

/// Adaptive sessions with explicit M and p (spec.forced_M must be set).
ExperimentSummary run_adaptive_experiment(const ExperimentSpec& spec);

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for k successes in n trials.
Interval wilson_interval(std::int64_t k, std::int64_t n, double confidence = 0.95);

/// printf("%.17g").
std::string format_real(double value);

/// Header and one row per summary; see README for the column list.
void write_simulation_csv(std::ostream& os, const std::vector<ExperimentSummary>& rows);
void write_adaptive_csv(std::ostream& os, const std::vector<ExperimentSummary>& rows);

inline constexpr const char* kSimulationHeader =
    "channel,param,n,d,eps_target,mode,M,delta,trials,excess_count,excess_rate,wilson_low,"
    "wilson_high,mean_max_abs_err,master_seed";
inline constexpr const char* kAdaptiveHeader =
    "channel,param,M,d,p,lambda,max_steps,dropout_count,trials,excess_count,excess_rate,"
    "wilson_low,wilson_high,mean_stop_time,stop_time_std_error,truncated_count,mean_stop_ub,"
    "error_ub,a0,C1,master_seed";

}  // namespace qsearch
