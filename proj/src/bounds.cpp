#include "qsearch/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "qsearch/capacity.hpp"
#include "qsearch/errors.hpp"
#include "qsearch/infodensity.hpp"
#include "qsearch/parallel.hpp"
#include "qsearch/rng.hpp"

namespace qsearch {
namespace {

constexpr double kValueTolerance = 1e-12;

bool near(double a, double b) { return std::abs(a - b) <= kValueTolerance * (1.0 + std::abs(b)); }

double slack(double t) { return kValueTolerance * (1.0 + std::abs(t)); }

struct Kahan {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

std::vector<double> log_factorials(std::int64_t n) {
  std::vector<double> lf(static_cast<std::size_t>(n) + 1);
  for (std::int64_t k = 0; k <= n; ++k) lf[static_cast<std::size_t>(k)] = std::lgamma(k + 1.0);
  return lf;
}

// Visits every count vector (k_1..k_m), sum k = n, in lexicographic order
// with its log multinomial probability and the sum value.
template <typename Visit>
void for_each_count_vector(const SingleLetterLaw& law, std::int64_t n, Visit&& visit) {
  const auto m = static_cast<std::size_t>(law.values.size());
  const std::vector<double> lf = log_factorials(n);
  std::vector<double> log_p(m);
  for (std::size_t i = 0; i < m; ++i) log_p[i] = std::log(law.probs(static_cast<Eigen::Index>(i)));
  auto recurse = [&](auto&& self, std::size_t i, std::int64_t remaining, double log_w,
                     double value) -> void {
    const double v = law.values(static_cast<Eigen::Index>(i));
    if (i + 1 == m) {
      const auto k = remaining;
      visit(log_w + static_cast<double>(k) * log_p[i] - lf[static_cast<std::size_t>(k)],
            value + static_cast<double>(k) * v);
      return;
    }
    for (std::int64_t k = 0; k <= remaining; ++k) {
      self(self, i + 1, remaining - k,
           log_w + static_cast<double>(k) * log_p[i] - lf[static_cast<std::size_t>(k)],
           value + static_cast<double>(k) * v);
    }
  };
  recurse(recurse, 0, n, lf[static_cast<std::size_t>(n)], 0.0);
}

void require_length(std::int64_t n) {
  if (n < 0) throw std::domain_error("number of queries must be nonnegative");
}

void require_budget(std::int64_t n, std::size_t categories, std::uint64_t max_vectors) {
  const std::uint64_t count = count_vectors(n, categories);
  if (count > max_vectors) {
    throw ResourceError("exact sum law needs " + std::to_string(count) +
                        " count vectors, above the budget of " + std::to_string(max_vectors) +
                        "; reduce n");
  }
}

}  // namespace

SingleLetterLaw single_letter_law(const ChannelSpec& spec, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("query fraction must lie in the range [0,1]");
  const TransitionMatrix P = transition_matrix(spec, q);
  const Eigen::RowVectorXd marginal = (1.0 - q) * P.row(0) + q * P.row(1);
  std::vector<std::pair<double, double>> cells;
  for (Eigen::Index x = 0; x < 2; ++x) {
    const double px = x ? q : 1.0 - q;
    for (Eigen::Index y = 0; y < P.cols(); ++y) {
      const double mass = px * P(x, y);
      if (mass > 0.0) cells.emplace_back(std::log(P(x, y) / marginal(y)), mass);
    }
  }
  std::sort(cells.begin(), cells.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& c : cells) {
    if (!merged.empty() && near(c.first, merged.back().first)) {
      merged.back().second += c.second;
    } else {
      merged.push_back(c);
    }
  }
  SingleLetterLaw law;
  law.q = q;
  law.values.resize(static_cast<Eigen::Index>(merged.size()));
  law.probs.resize(static_cast<Eigen::Index>(merged.size()));
  for (std::size_t i = 0; i < merged.size(); ++i) {
    law.values(static_cast<Eigen::Index>(i)) = merged[i].first;
    law.probs(static_cast<Eigen::Index>(i)) = merged[i].second;
  }
  return law;
}

std::uint64_t count_vectors(std::int64_t n, std::size_t categories) {
  if (categories == 0) return n == 0 ? 1 : 0;
  // C(n + m - 1, m - 1) as a running product; each prefix is itself binomial.
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t c = 1;
  const auto base = static_cast<std::uint64_t>(n);
  for (std::uint64_t j = 1; j < categories; ++j) {
    const std::uint64_t factor = base + j;
    if (static_cast<double>(c) * static_cast<double>(factor) > 1.8e19) return kMax;
    c = c * factor / j;
  }
  return c;
}

SumDistribution::SumDistribution(const SingleLetterLaw& law, std::int64_t n,
                                 std::uint64_t max_vectors)
    : n_(n), q_(law.q) {
  require_length(n);
  require_budget(n, static_cast<std::size_t>(law.values.size()), max_vectors);
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(count_vectors(n, static_cast<std::size_t>(law.values.size())));
  for_each_count_vector(law, n, [&](double log_w, double value) {
    atoms.emplace_back(value, std::exp(log_w));
  });
  std::sort(atoms.begin(), atoms.end());
  Kahan running;
  for (std::size_t i = 0; i < atoms.size();) {
    const double anchor = atoms[i].first;
    Kahan group;
    std::size_t j = i;
    for (; j < atoms.size() && near(atoms[j].first, anchor); ++j) group.add(atoms[j].second);
    values_.push_back(anchor);
    probs_.push_back(group.sum);
    running.add(group.sum);
    cumulative_.push_back(running.sum);
    i = j;
  }
}

double SumDistribution::cdf(double t) const {
  if (std::isnan(t)) throw std::domain_error("threshold must not be NaN");
  if (t == std::numeric_limits<double>::infinity()) return 1.0;
  const auto it = std::upper_bound(values_.begin(), values_.end(), t + slack(t));
  if (it == values_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
}

double SumDistribution::quantile_sup(double level) const {
  if (!(level >= 0.0 && level < 1.0)) throw std::domain_error("quantile level must lie in [0,1)");
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), level);
  if (it == cumulative_.end()) return values_.back();
  return values_[static_cast<std::size_t>(it - cumulative_.begin())];
}

double exact_sum_cdf(const SingleLetterLaw& law, std::int64_t n, double t,
                     std::uint64_t max_vectors) {
  require_length(n);
  if (std::isnan(t)) throw std::domain_error("threshold must not be NaN");
  if (t == std::numeric_limits<double>::infinity()) return 1.0;
  require_budget(n, static_cast<std::size_t>(law.values.size()), max_vectors);
  const double limit = t + slack(t);
  Kahan total;
  for_each_count_vector(law, n, [&](double log_w, double value) {
    if (value <= limit) total.add(std::exp(log_w));
  });
  return std::min(1.0, total.sum);
}

double exact_sum_cdf(const ChannelSpec& spec, double q, std::int64_t n, double t,
                     std::uint64_t max_vectors) {
  return exact_sum_cdf(single_letter_law(spec, q), n, t, max_vectors);
}

double default_eta(double M, int d) {
  if (!(M >= 1.0)) throw std::domain_error("M must be at least 1");
  if (d < 1) throw std::domain_error("dimension must be at least 1");
  return std::sqrt(d * std::log(M) / (2.0 * std::pow(M, d)));
}

namespace {

AchievabilityTerms assemble(std::int64_t n, int d, double M, double eta, double c_p,
                            double tail, BoundMode mode) {
  AchievabilityTerms out;
  const double nn = static_cast<double>(n);
  out.tail_probability = tail;
  out.union_slack = 1.0 / std::sqrt(nn);
  if (mode == BoundMode::kMeasurementDependent) {
    out.atypicality = 4.0 * nn * std::exp(-2.0 * std::pow(M, d) * eta * eta);
    out.change_of_measure = std::exp(nn * eta * c_p);
  }
  out.raw = out.atypicality + out.change_of_measure * (out.tail_probability + out.union_slack);
  out.value = std::clamp(out.raw, 0.0, 1.0);
  return out;
}

double threshold(std::int64_t n, int d, double M) {
  return d * std::log(M) + 0.5 * std::log(static_cast<double>(n));
}

void validate_achievability(std::int64_t n, int d, double M, double p, double eta, BoundMode mode) {
  if (n < 1) throw std::domain_error("number of queries must be at least 1");
  if (d < 1) throw std::domain_error("dimension must be at least 1");
  if (!(M >= 1.0)) throw std::domain_error("M must be at least 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("design fraction p must lie in the range [0,1]");
  if (mode == BoundMode::kMeasurementDependent && !(eta > 0.0)) {
    throw std::domain_error("eta must be positive");
  }
}

}  // namespace

AchievabilityTerms achievability_bound(const ChannelSpec& spec, std::int64_t n, int d, double M,
                                       double p, double eta, BoundMode mode) {
  validate_achievability(n, d, M, p, eta, mode);
  const double c_p = mode == BoundMode::kMeasurementDependent ? continuity_constant(spec, p) : 0.0;
  const double tail = exact_sum_cdf(spec, p, n, threshold(n, d, M));
  return assemble(n, d, M, eta, c_p, tail, mode);
}

std::uint64_t achievability_feasible_M(const ChannelSpec& spec, std::int64_t n, int d, double p,
                                       double eps, std::uint64_t m_max, BoundMode mode) {
  validate_achievability(n, d, 2.0, p, 1.0, BoundMode::kMeasurementIndependent);
  const SingleLetterLaw law = single_letter_law(spec, p);
  const SumDistribution sum(law, n);
  const double c_p = mode == BoundMode::kMeasurementDependent ? continuity_constant(spec, p) : 0.0;
  std::uint64_t best = 1;
  for (std::uint64_t M = 2; M <= m_max; ++M) {
    const double m = static_cast<double>(M);
    const double eta = default_eta(m, d);
    const AchievabilityTerms terms =
        assemble(n, d, m, eta, c_p, sum.cdf(threshold(n, d, m)), mode);
    if (terms.raw <= eps) best = M;
  }
  return best;
}

double default_beta(std::int64_t n, int d) {
  if (n < 1 || d < 1) throw std::domain_error("n and d must be at least 1");
  return 1.0 / (d * std::sqrt(static_cast<double>(n)));
}

double default_kappa(std::int64_t n) {
  if (n < 1) throw std::domain_error("number of queries must be at least 1");
  return 1.0 / std::sqrt(static_cast<double>(n));
}

ConverseResult converse_bound(const ChannelSpec& spec, std::int64_t n, int d, double eps,
                              double beta, double kappa, const ConverseOptions& options) {
  if (n < 1) throw std::domain_error("number of queries must be at least 1");
  if (d < 1) throw std::domain_error("dimension must be at least 1");
  if (!(eps >= 0.0 && eps < 1.0)) throw std::domain_error("eps must lie in the range [0,1)");
  if (!(beta > 0.0 && beta < (1.0 - eps) / 2.0)) {
    throw std::domain_error("beta must lie in (0, (1-eps)/2)");
  }
  const double level = eps + 2.0 * d * beta + kappa;
  if (!(kappa > 0.0) || !(level < 1.0)) {
    throw std::domain_error("kappa must lie in (0, 1-eps-2*d*beta)");
  }
  if (!(options.q_min >= 0.0 && options.q_min < 0.5)) {
    throw std::domain_error("q_min must lie in [0, 0.5)");
  }
  std::vector<double> qs = options.extra_q;
  if (options.grid) {
    if (options.q_grid < 1) throw std::domain_error("q grid must have at least one point");
    const double lo = options.q_min;
    const double hi = 1.0 - options.q_min;
    if (options.q_grid == 1) {
      qs.push_back(0.5);
    } else {
      for (int i = 0; i < options.q_grid; ++i) qs.push_back(lo + (hi - lo) * i / (options.q_grid - 1));
    }
  }
  if (qs.empty()) throw std::domain_error("no query fractions to evaluate");

  ConverseResult out;
  out.level = level;
  out.beta = beta;
  out.kappa = kappa;
  out.q_min = options.q_min;
  out.quantile = -std::numeric_limits<double>::infinity();
  for (const double q : qs) {
    const SumDistribution sum(single_letter_law(spec, q), n);
    const double quantile = sum.quantile_sup(level);
    ++out.evaluated;
    if (quantile > out.quantile) {
      out.quantile = quantile;
      out.best_q = q;
    }
  }
  out.value = -d * std::log(beta) - std::log(kappa) + out.quantile;
  return out;
}

RcuEstimate nested_rcu_estimate(const ChannelSpec& spec, std::int64_t n, int d, double M, double p,
                                std::int64_t outer, std::uint64_t seed, unsigned threads) {
  if (n < 1) throw std::domain_error("number of queries must be at least 1");
  if (outer < 1) throw std::domain_error("outer sample count must be at least 1");
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("design fraction p must lie in (0,1)");
  const InfoDensityTable table = info_density_table(spec, p, p);
  const std::size_t symbols = spec.alphabet_size();
  const double md = std::pow(M, d);
  const std::vector<double> lf = log_factorials(n);
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);

  std::vector<double> samples(static_cast<std::size_t>(outer));
  parallel_for(samples.size(), threads, [&](std::size_t s) {
    Xoshiro256 rng(derive_seed(seed, s));
    std::vector<std::int64_t> counts(symbols, 0);
    double truth = 0.0;
    for (std::int64_t t = 0; t < n; ++t) {
      const Bit x = rng.uniform() < p ? 1 : 0;
      const Symbol y = sample_output(spec, p, x, rng);
      ++counts[y];
      truth += table(x, y);
    }
    // Pr over independent K_y ~ Bin(n_y, p) that
    // sum_y n_y a_y + K_y (b_y - a_y) >= truth.
    const double limit = truth - slack(truth);
    Kahan prob;
    auto recurse = [&](auto&& self, std::size_t y, double log_w, double value) -> void {
      if (y == symbols) {
        if (value >= limit) prob.add(std::exp(log_w));
        return;
      }
      const std::int64_t ny = counts[y];
      if (ny == 0) {
        self(self, y + 1, log_w, value);
        return;
      }
      const double a = table(0, y);
      const double b = table(1, y);
      for (std::int64_t k = 0; k <= ny; ++k) {
        if ((a == kNegInf && k < ny) || (b == kNegInf && k > 0)) continue;
        const double contribution = (k < ny ? (ny - k) * a : 0.0) + (k > 0 ? k * b : 0.0);
        const double log_mass = lf[static_cast<std::size_t>(ny)] - lf[static_cast<std::size_t>(k)] -
                                lf[static_cast<std::size_t>(ny - k)] + k * log_p + (ny - k) * log_q;
        self(self, y + 1, log_w + log_mass, value + contribution);
      }
    };
    recurse(recurse, 0, 0.0, 0.0);
    samples[s] = std::min(1.0, md * prob.sum);
  });

  Kahan sum;
  for (const double v : samples) sum.add(v);
  RcuEstimate out;
  out.samples = outer;
  out.mean = sum.sum / static_cast<double>(outer);
  Kahan sq;
  for (const double v : samples) sq.add((v - out.mean) * (v - out.mean));
  const double var = outer > 1 ? sq.sum / static_cast<double>(outer - 1) : 0.0;
  out.std_error = std::sqrt(var / static_cast<double>(outer));
  return out;
}

}  // namespace qsearch
