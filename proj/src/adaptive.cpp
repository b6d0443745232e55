#include "qsearch/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qsearch/errors.hpp"
#include "qsearch/infodensity.hpp"

namespace qsearch {
namespace {

void validate(const AdaptiveConfig& cfg) {
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) {
    throw std::domain_error("threshold lambda must be finite and nonnegative");
  }
  if (cfg.max_steps < 1) throw std::domain_error("max_steps must be at least 1");
  if (!(cfg.p >= 0.0 && cfg.p <= 1.0)) throw std::domain_error("design fraction p must lie in the range [0,1]");
}

void finish_estimate(AdaptiveOutcome& out, std::uint64_t M, int d) {
  const std::vector<std::uint64_t> w = unflatten_index(out.decoded_bin, M, d);
  out.estimate.resize(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) out.estimate[j] = bin_center(w[j], M);
}

void score_error(AdaptiveOutcome& out, std::uint64_t M) {
  out.max_abs_error = 0.0;
  for (std::size_t j = 0; j < out.estimate.size(); ++j) {
    out.max_abs_error = std::max(out.max_abs_error, std::abs(out.estimate[j] - out.true_target[j]));
  }
  out.excess = out.max_abs_error > 1.0 / static_cast<double>(M);
}

double log_binomial_pmf(std::uint64_t n, std::uint64_t k, double log_p, double log_q) {
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  return std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0) +
         kk * log_p + (nn - kk) * log_q;
}

}  // namespace

std::int64_t default_max_steps(double lambda, double c1) {
  if (!(c1 > 0.0)) throw std::domain_error("mismatched capacity must be positive");
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(50.0 * lambda / c1)));
}

AdaptiveOutcome run_adaptive_session(const ChannelSpec& spec, const AdaptiveConfig& cfg,
                                     const TargetModel& target) {
  validate(cfg);
  const std::uint64_t count = hypothesis_count(cfg.M, cfg.d);
  if (count > cfg.hypothesis_budget) {
    throw ResourceError("M^d=" + std::to_string(count) + " exceeds the hypothesis budget of " +
                        std::to_string(cfg.hypothesis_budget));
  }
  AdaptiveOutcome out;
  out.true_target = draw_target(target, cfg.d, cfg.seed);
  std::vector<std::uint64_t> w(out.true_target.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = bin_index(out.true_target[j], cfg.M);
  const std::size_t truth = flatten_index(w, cfg.M) - 1;

  const InfoDensityTable table = info_density_table(spec, cfg.p, cfg.p);
  const std::size_t symbols = spec.alphabet_size();
  // gain[y][bit]; unreachable symbols kill every hypothesis.
  std::vector<double> gain(2 * symbols);
  for (std::size_t y = 0; y < symbols; ++y) {
    const auto col = static_cast<Eigen::Index>(y);
    gain[2 * y] = table.reachable(col) ? table.values(0, col) : kNegInf;
    gain[2 * y + 1] = table.reachable(col) ? table.values(1, col) : kNegInf;
  }

  Xoshiro256 bit_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(TrialStream::kCodebook)));
  Xoshiro256 channel_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(TrialStream::kChannel)));
  std::vector<double> scores(count, 0.0);
  std::vector<Bit> bits(count);
  const double inv_count = 1.0 / static_cast<double>(count);

  for (std::int64_t t = 1; t <= cfg.max_steps; ++t) {
    std::uint64_t ones = 0;
    for (std::size_t m = 0; m < count; ++m) {
      bits[m] = bit_rng.uniform() < cfg.p ? 1 : 0;
      ones += bits[m];
    }
    const double fraction = static_cast<double>(ones) * inv_count;
    const Symbol y = sample_output(spec, fraction, bits[truth], channel_rng);
    const double g0 = gain[2 * y];
    const double g1 = gain[2 * y + 1];
    bool crossed = false;
    for (std::size_t m = 0; m < count; ++m) {
      scores[m] += bits[m] ? g1 : g0;
      crossed = crossed || scores[m] >= cfg.lambda;
    }
    if (crossed) {
      out.stop_time = t;
      for (std::size_t m = count; m-- > 0;) {
        if (scores[m] >= cfg.lambda) {
          out.decoded_bin = m + 1;
          break;
        }
      }
      break;
    }
  }
  if (out.decoded_bin == 0) {
    out.stop_time = cfg.max_steps;
    out.truncated = true;
    out.decoded_bin = tolerant_argmax(scores) + 1;
  }
  finish_estimate(out, cfg.M, cfg.d);
  score_error(out, cfg.M);
  return out;
}

AdaptiveOutcome dropout_session(const ChannelSpec& spec, const AdaptiveConfig& cfg,
                                double eps_drop, const TargetModel& target, Xoshiro256& rng) {
  if (!(eps_drop >= 0.0 && eps_drop <= 1.0)) {
    throw std::domain_error("dropout probability must lie in the range [0,1]");
  }
  if (!(rng.uniform() < eps_drop)) return run_adaptive_session(spec, cfg, target);
  validate(cfg);
  AdaptiveOutcome out;
  out.dropped = true;
  out.true_target = draw_target(target, cfg.d, cfg.seed);
  out.estimate.assign(out.true_target.size(), 0.5);
  score_error(out, cfg.M);
  return out;
}

double uniform_info_bound(const ChannelSpec& spec, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("query fraction must lie in the range [0,1]");
  const TransitionMatrix P = transition_matrix(spec, q);
  const Eigen::RowVectorXd marginal = output_marginals(spec, q, q);
  double best = kNegInf;
  for (Bit x = 0; x < 2; ++x) {
    const double px = x ? q : 1.0 - q;
    if (px <= 0.0) continue;
    for (Eigen::Index y = 0; y < P.cols(); ++y) {
      if (P(x, y) <= 0.0) continue;
      best = std::max(best, std::log(P(x, y) / marginal(y)));
    }
  }
  return best;
}

double mismatched_capacity(const ChannelSpec& spec, std::uint64_t M, int d, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("design fraction p must lie in the range [0,1]");
  const std::uint64_t count = hypothesis_count(M, d);
  const InfoDensityTable table = info_density_table(spec, p, p);

  // E over Y ~ P^f(.|x) of i_{p,p}(x;Y), accumulated into `total`.
  auto add_cell = [&](Bit x, double fraction, double weight, double& total) {
    if (weight <= 0.0) return;
    for (Eigen::Index y = 0; y < table.values.cols(); ++y) {
      const double py = transition_prob(spec, fraction, x, static_cast<Symbol>(y));
      if (py <= 0.0) continue;
      const double value = table.reachable(y) ? table.values(x, y) : kNegInf;
      total += weight * py * value;
    }
  };

  const std::uint64_t others = count - 1;
  double total = 0.0;
  for (Bit x = 0; x < 2; ++x) {
    const double px = x ? p : 1.0 - p;
    if (px <= 0.0) continue;
    if (others == 0 || p <= 0.0 || p >= 1.0) {
      const std::uint64_t k = (p >= 1.0) ? others : 0;
      add_cell(x, static_cast<double>(x + k) / static_cast<double>(count), px, total);
      continue;
    }
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    const auto mode = std::min<std::uint64_t>(
        others, static_cast<std::uint64_t>(std::floor(static_cast<double>(others + 1) * p)));
    auto visit = [&](std::uint64_t k) {
      const double mass = std::exp(log_binomial_pmf(others, k, log_p, log_q));
      add_cell(x, static_cast<double>(x + k) / static_cast<double>(count), px * mass, total);
      return mass;
    };
    // Beyond the mode the pmf ratio r_k is decreasing, so the remaining
    // tail is at most pmf(k) / (1 - r_k).
    constexpr double kTail = 5e-13;
    visit(mode);
    for (std::uint64_t k = mode + 1; k <= others; ++k) {
      const double mass = visit(k);
      const double ratio = static_cast<double>(others - k) / static_cast<double>(k + 1) * p / (1.0 - p);
      if (ratio < 1.0 && mass / (1.0 - ratio) < kTail) break;
    }
    for (std::uint64_t k = mode; k-- > 0;) {
      const double mass = visit(k);
      const double ratio = static_cast<double>(k) / static_cast<double>(others - k + 1) * (1.0 - p) / p;
      if (ratio < 1.0 && mass / (1.0 - ratio) < kTail) break;
    }
  }
  return total;
}

AdaptiveDesignBounds adaptive_design_bounds(std::uint64_t M, int d, double lambda, double a0,
                                            double c1) {
  if (!(c1 > 0.0)) throw std::domain_error("mismatched capacity must be positive");
  const std::uint64_t count = hypothesis_count(M, d);
  AdaptiveDesignBounds out;
  out.mean_stop_ub = (lambda + a0) / c1;
  out.error_ub = std::min(1.0, static_cast<double>(count - 1) * std::exp(-lambda));
  return out;
}

}  // namespace qsearch
