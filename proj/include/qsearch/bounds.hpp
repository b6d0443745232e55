#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qsearch/channels.hpp"

namespace qsearch {

/// Law of the single-letter density i_{q,q}(X;Y) under Bern(q) x P^q,
/// collapsed to distinct values (ascending) with merged probabilities.
struct SingleLetterLaw {
  Eigen::VectorXd values;
  Eigen::VectorXd probs;
  double q = 0.0;
};

SingleLetterLaw single_letter_law(const ChannelSpec& spec, double q);

/// Materialised law of the n-fold i.i.d. sum, atoms sorted ascending.
class SumDistribution {
 public:
  /// ResourceError when the number of count vectors exceeds `max_vectors`.
  SumDistribution(const SingleLetterLaw& law, std::int64_t n,
                  std::uint64_t max_vectors = kMaterializeBudget);

  static constexpr std::uint64_t kMaterializeBudget = 5'000'000;

  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  std::int64_t n() const noexcept { return n_; }
  double q() const noexcept { return q_; }

  /// Pr{sum <= t}, with atoms within 1e-12 (1 + |t|) of t counted.
  double cdf(double t) const;

  /// sup{t : Pr{sum <= t} <= level}: the smallest atom whose cumulative
  /// mass exceeds `level`. Requires level in [0, 1).
  double quantile_sup(double level) const;

 private:
  std::vector<double> values_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
  std::int64_t n_;
  double q_;
};

/// C(n + m - 1, m - 1) for m categories; saturates at UINT64_MAX.
std::uint64_t count_vectors(std::int64_t n, std::size_t categories);

inline constexpr std::uint64_t kStreamingBudget = 50'000'000;

/// Pr{sum_{i<=n} i_{q,q}(X_i;Y_i) <= t} by streaming multinomial
/// enumeration (no atoms stored).
double exact_sum_cdf(const ChannelSpec& spec, double q, std::int64_t n, double t,
                     std::uint64_t max_vectors = kStreamingBudget);

double exact_sum_cdf(const SingleLetterLaw& law, std::int64_t n, double t,
                     std::uint64_t max_vectors = kStreamingBudget);

enum class BoundMode { kMeasurementDependent, kMeasurementIndependent };

/// Terms of the relaxed achievability bound. `value` = clamp(raw, 0, 1).
struct AchievabilityTerms {
  double atypicality = 0.0;      // 4n exp(-2 M^d eta^2); 0 in mi mode
  double change_of_measure = 1.0;  // exp(n eta c(p)); 1 in mi mode
  double tail_probability = 0.0;   // Pr{sum <= d log M + log sqrt(n)}
  double union_slack = 0.0;        // 1 / sqrt(n)
  double raw = 0.0;
  double value = 0.0;
};

/// eta = sqrt(d log M / (2 M^d)).
double default_eta(double M, int d);

/// Upper bound on the excess-resolution probability of the random-coding
/// procedure with M bins per side. M is real so callers can probe the
/// continuous relaxation.
AchievabilityTerms achievability_bound(const ChannelSpec& spec, std::int64_t n, int d, double M,
                                       double p, double eta, BoundMode mode);

/// Largest integer M in [1, m_max] with achievability_bound <= eps under
/// default_eta; 1 (the trivial one-bin procedure) when none qualifies.
std::uint64_t achievability_feasible_M(const ChannelSpec& spec, std::int64_t n, int d, double p,
                                       double eps, std::uint64_t m_max,
                                       BoundMode mode = BoundMode::kMeasurementDependent);

struct ConverseOptions {
  int q_grid = 201;                // points on [q_min, 1 - q_min]
  double q_min = 1e-3;
  std::vector<double> extra_q;     // evaluated in addition to the grid
  bool grid = true;                // false: only extra_q
};

struct ConverseResult {
  double value = 0.0;  // bound on -d log(delta), nats
  double quantile = 0.0;
  double best_q = 0.0;
  double level = 0.0;  // eps + 2 d beta + kappa
  double beta = 0.0;
  double kappa = 0.0;
  double q_min = 0.0;
  int evaluated = 0;
};

/// beta = 1/(d sqrt n), kappa = 1/sqrt n.
double default_beta(std::int64_t n, int d);
double default_kappa(std::int64_t n);

/// -d log beta - log kappa + max_q quantile_sup(level) of the equal-size sum.
ConverseResult converse_bound(const ChannelSpec& spec, std::int64_t n, int d, double eps,
                              double beta, double kappa, const ConverseOptions& options = {});

/// Monte Carlo estimate of E[min{1, M^d Pr{i(Xbar^n;Y^n) >= i(X^n;Y^n) | X^n, Y^n}}]
/// with (X^n, Y^n) ~ (Bern(p) x P^p)^n. The inner probability is exact: given y^n
/// it is a tail of independent binomials, one per output symbol.
struct RcuEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

RcuEstimate nested_rcu_estimate(const ChannelSpec& spec, std::int64_t n, int d, double M, double p,
                                std::int64_t outer, std::uint64_t seed, unsigned threads = 1);

}  // namespace qsearch
