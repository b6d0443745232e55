#pragma once

#include <cstdint>
#include <vector>

#include "qsearch/channels.hpp"
#include "qsearch/nonadaptive.hpp"
#include "qsearch/rng.hpp"

namespace qsearch {

/// Parameters of one adaptive session. `max_steps` caps the otherwise
/// unbounded codewords; use default_max_steps for the usual cap.
struct AdaptiveConfig {
  std::uint64_t M = 2;
  int d = 1;
  double p = 0.5;
  double lambda = 1.0;  // threshold in nats
  std::int64_t max_steps = 1;
  std::uint64_t seed = 0;
  std::uint64_t hypothesis_budget = kDefaultCellBudget;
};

struct AdaptiveOutcome {
  std::vector<double> true_target;
  std::vector<double> estimate;
  double max_abs_error = 0.0;
  std::int64_t stop_time = 0;   // 0 when the session was dropped
  std::uint64_t decoded_bin = 0;  // 0 when the session was dropped
  bool excess = false;
  bool truncated = false;  // hit max_steps without a crossing
  bool dropped = false;
};

/// ceil(50 * lambda / C1), at least 1.
std::int64_t default_max_steps(double lambda, double c1);

/// Sequential procedure with lazily extended random codewords. Each step
/// draws M^d fresh Bern(p) bits (index order, kCodebook substream), poses the
/// query of fraction mean(bits), and adds i_{p,p}(bit_m; y) to every score.
/// Stops at the first step where some score reaches lambda and decodes the
/// largest such index; on truncation decodes the best score (smallest index
/// among ties).
AdaptiveOutcome run_adaptive_session(const ChannelSpec& spec, const AdaptiveConfig& cfg,
                                     const TargetModel& target);

/// With probability eps_drop (one uniform from `rng`) poses no query and
/// answers the cube centre; otherwise runs run_adaptive_session.
AdaptiveOutcome dropout_session(const ChannelSpec& spec, const AdaptiveConfig& cfg,
                                double eps_drop, const TargetModel& target, Xoshiro256& rng);

/// a0: the largest finite i_{q,q}(x;y) over cells of positive probability.
double uniform_info_bound(const ChannelSpec& spec, double q);

/// C1 = E[i_{p,p}(X;Y)] when Y passes through the channel of size
/// (X + K)/M^d, K ~ Bin(M^d - 1, p). Binomial tails below 1e-12 are dropped.
double mismatched_capacity(const ChannelSpec& spec, std::uint64_t M, int d, double p);

struct AdaptiveDesignBounds {
  double mean_stop_ub = 0.0;  // (lambda + a0) / C1
  double error_ub = 0.0;      // min(1, (M^d - 1) e^{-lambda})
};

AdaptiveDesignBounds adaptive_design_bounds(std::uint64_t M, int d, double lambda, double a0,
                                            double c1);

}  // namespace qsearch
