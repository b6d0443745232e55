#pragma once

// Reference implementations used only by the tests. They share no code
// with the library beyond transition_prob and the sample types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "qsearch/channels.hpp"
#include "qsearch/nonadaptive.hpp"

namespace oracle {

inline double h(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

/// Closed-form mean of i_{q,q} for the three families.
inline double bsc_mean(double nu, double q) {
  return h(q * (1.0 - nu * q) + (1.0 - q) * nu * q) - h(nu * q);
}
inline double bec_mean(double tau, double q) { return (1.0 - q * tau) * h(q); }
inline double z_mean(double zeta, double q) { return h(q * (1.0 - zeta * q)) - q * h(zeta * q); }

inline double family_mean(const qsearch::ChannelSpec& spec, double q) {
  switch (spec.kind()) {
    case qsearch::ChannelKind::kBsc: return bsc_mean(spec.param(), q);
    case qsearch::ChannelKind::kBec: return bec_mean(spec.param(), q);
    case qsearch::ChannelKind::kZ: return z_mean(spec.param(), q);
    case qsearch::ChannelKind::kFixed: break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Max of family_mean over `points` equally spaced q in [0, 1].
inline double grid_capacity(const qsearch::ChannelSpec& spec, int points) {
  double best = -1.0;
  for (int i = 0; i < points; ++i) best = std::max(best, family_mean(spec, i / double(points - 1)));
  return best;
}

/// Blahut-Arimoto capacity (nats) of a 2 x |Y| matrix.
inline double blahut_arimoto(const qsearch::TransitionMatrix& W, int iterations = 20000) {
  double p1 = 0.5;
  double lower = 0.0;
  for (int it = 0; it < iterations; ++it) {
    double c[2];
    for (int x = 0; x < 2; ++x) {
      double s = 0.0;
      for (Eigen::Index y = 0; y < W.cols(); ++y) {
        const double py = (1.0 - p1) * W(0, y) + p1 * W(1, y);
        if (W(x, y) > 0.0) s += W(x, y) * std::log(W(x, y) / py);
      }
      c[x] = std::exp(s);
    }
    const double z = (1.0 - p1) * c[0] + p1 * c[1];
    lower = std::log(z);
    p1 = p1 * c[1] / z;
  }
  return lower;
}

/// Standard normal CDF through an erf series, independent of std::erfc.
// Upper tail Pr{Z > x} for x >= 0: erf Taylor series near the origin,
// Laplace continued fraction for erfc beyond.
inline long double upper_tail(double x) {
  const long double z = static_cast<long double>(x) / std::sqrt(2.0L);
  const long double root_pi = std::sqrt(3.14159265358979323846264338327950288L);
  if (z < 2.0L) {
    long double term = z;
    long double sum = z;
    for (int k = 1; k < 400; ++k) {
      term *= -z * z / k;
      sum += term / (2 * k + 1);
      if (std::abs(term) < 1e-30L) break;
    }
    return 0.5L * (1.0L - 2.0L / root_pi * sum);
  }
  long double frac = z;
  for (int k = 300; k >= 1; --k) frac = z + (k / 2.0L) / frac;
  return 0.5L * std::exp(-z * z) / root_pi / frac;
}

inline double series_cdf(double x) {
  return x < 0 ? static_cast<double>(upper_tail(-x)) : static_cast<double>(1.0L - upper_tail(x));
}

// Bisection on the tail mass of the nearer side.
inline double bisection_quantile(double eps) {
  const bool upper = eps > 0.5;
  const long double mass = upper ? 1.0L - eps : eps;
  double lo = 0.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (upper_tail(mid) > mass ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  return upper ? x : -x;
}

/// max over a xi-grid in (0, min(q,1-q)/2] of |log P^{q+-xi}/P^q|_inf / xi,
/// skipping entries that vanish at q.
inline double finite_difference_slope(const qsearch::ChannelSpec& spec, double q, int points = 2000) {
  const double xi_max = std::min(q, 1.0 - q) / 2.0;
  double worst = 0.0;
  for (int k = 1; k <= points; ++k) {
    const double xi = xi_max * k / points;
    for (const double step : {xi, -xi}) {
      for (qsearch::Bit x = 0; x < 2; ++x) {
        for (qsearch::Symbol y = 0; y < spec.alphabet_size(); ++y) {
          const double base = qsearch::transition_prob(spec, q, x, y);
          if (base <= 0.0) continue;
          const double moved = qsearch::transition_prob(spec, q + step, x, y);
          worst = std::max(worst, std::abs(std::log(moved / base)) / xi);
        }
      }
    }
  }
  return worst;
}

/// Decoder by direct per-row summation of log(P^p(y|x) / P_Y^p(y)). Ties
/// within 1e-9 (1 + |max|) go to the smallest row; all -inf picks row 1.
inline std::uint64_t naive_decode(const qsearch::Codebook& cb, const std::vector<qsearch::Symbol>& y,
                                  const qsearch::ChannelSpec& spec) {
  const double p = cb.p;
  std::vector<double> scores(cb.rows());
  for (std::size_t r = 0; r < cb.rows(); ++r) {
    double s = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
      const qsearch::Bit x = cb.bits(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t));
      const double w = qsearch::transition_prob(spec, p, x, y[t]);
      const double marg = (1.0 - p) * qsearch::transition_prob(spec, p, 0, y[t]) +
                          p * qsearch::transition_prob(spec, p, 1, y[t]);
      if (w <= 0.0 || marg <= 0.0) {
        s = -std::numeric_limits<double>::infinity();
        break;
      }
      s += std::log(w / marg);
    }
    scores[r] = s;
  }
  const double best = *std::max_element(scores.begin(), scores.end());
  if (best == -std::numeric_limits<double>::infinity()) return 1;
  for (std::size_t r = 0; r < scores.size(); ++r) {
    if (scores[r] >= best - 1e-9 * (1.0 + std::abs(best))) return r + 1;
  }
  return 1;
}

/// Brute-force Pr{sum <= t} by enumerating all (x, y)^n sequences.
inline double brute_force_cdf(const qsearch::ChannelSpec& spec, double q, int n, double t) {
  const std::size_t cells = 2 * spec.alphabet_size();
  std::vector<double> value(cells), mass(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const qsearch::Bit x = static_cast<qsearch::Bit>(c / spec.alphabet_size());
    const qsearch::Symbol y = c % spec.alphabet_size();
    const double w = qsearch::transition_prob(spec, q, x, y);
    const double marg = (1.0 - q) * qsearch::transition_prob(spec, q, 0, y) +
                        q * qsearch::transition_prob(spec, q, 1, y);
    mass[c] = (x ? q : 1.0 - q) * w;
    value[c] = mass[c] > 0.0 ? std::log(w / marg) : 0.0;
  }
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  double total = 0.0;
  for (;;) {
    double m = 1.0;
    double v = 0.0;
    for (const auto c : idx) {
      m *= mass[c];
      v += value[c];
    }
    if (m > 0.0 && v <= t + 1e-12 * (1.0 + std::abs(t))) total += m;
    std::size_t pos = 0;
    while (pos < idx.size() && ++idx[pos] == cells) idx[pos++] = 0;
    if (pos == idx.size()) break;
  }
  return total;
}

}  // namespace oracle
