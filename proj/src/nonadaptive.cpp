#include "qsearch/nonadaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qsearch/errors.hpp"
#include "qsearch/infodensity.hpp"
#include "qsearch/rng.hpp"

namespace qsearch {
namespace {

void require_resolution(std::uint64_t M) {
  if (M < 1) throw std::domain_error("M must be at least 1");
}

void require_dimension(int d) {
  if (d < 1) throw std::domain_error("dimension must be at least 1");
}

}  // namespace

std::uint64_t hypothesis_count(std::uint64_t M, int d) {
  require_resolution(M);
  require_dimension(d);
  std::uint64_t total = 1;
  for (int j = 0; j < d; ++j) {
    if (total > std::numeric_limits<std::uint64_t>::max() / M) {
      throw ResourceError("M^d overflows 64 bits for M=" + std::to_string(M) +
                          " d=" + std::to_string(d));
    }
    total *= M;
  }
  return total;
}

std::uint64_t bin_index(double s, std::uint64_t M) {
  require_resolution(M);
  if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("coordinate must lie in the range [0,1]");
  const double scaled = std::ceil(s * static_cast<double>(M));
  const auto w = static_cast<std::uint64_t>(scaled);
  return std::clamp<std::uint64_t>(w, 1, M);
}

double bin_center(std::uint64_t w, std::uint64_t M) {
  require_resolution(M);
  if (w < 1 || w > M) throw std::domain_error("bin index must lie in [1, M]");
  return (2.0 * static_cast<double>(w) - 1.0) / (2.0 * static_cast<double>(M));
}

std::uint64_t flatten_index(std::span<const std::uint64_t> w, std::uint64_t M) {
  require_resolution(M);
  if (w.empty()) throw std::domain_error("bin vector must be nonempty");
  hypothesis_count(M, static_cast<int>(w.size()));
  std::uint64_t m = 0;
  for (const std::uint64_t wj : w) {
    if (wj < 1 || wj > M) throw std::domain_error("bin index must lie in [1, M]");
    m = m * M + (wj - 1);
  }
  return m + 1;
}

std::vector<std::uint64_t> unflatten_index(std::uint64_t m, std::uint64_t M, int d) {
  const std::uint64_t total = hypothesis_count(M, d);
  if (m < 1 || m > total) throw std::domain_error("flattened index must lie in [1, M^d]");
  std::vector<std::uint64_t> w(static_cast<std::size_t>(d));
  std::uint64_t rest = m - 1;
  for (int j = d - 1; j >= 0; --j) {
    w[static_cast<std::size_t>(j)] = rest % M + 1;
    rest /= M;
  }
  return w;
}

Eigen::VectorXd column_fractions(const BitMatrix& bits) {
  Eigen::VectorXd out(bits.cols());
  const double rows = static_cast<double>(bits.rows());
  for (Eigen::Index t = 0; t < bits.cols(); ++t) {
    std::uint64_t ones = 0;
    for (Eigen::Index r = 0; r < bits.rows(); ++r) ones += bits(r, t);
    out(t) = rows > 0 ? static_cast<double>(ones) / rows : 0.0;
  }
  return out;
}

Codebook generate_codebook(std::uint64_t M, int d, std::int64_t n, double p, std::uint64_t seed,
                           std::uint64_t cell_budget) {
  if (n < 0) throw std::domain_error("codeword length must be nonnegative");
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("design fraction p must lie in the range [0,1]");
  const std::uint64_t rows = hypothesis_count(M, d);
  const auto cols = static_cast<std::uint64_t>(n);
  if (cols > 0 && rows > cell_budget / cols) {
    throw ResourceError("codebook needs M^d*n cells beyond the budget of " +
                        std::to_string(cell_budget) + " (M^d=" + std::to_string(rows) +
                        ", n=" + std::to_string(n) + "); reduce n or M");
  }
  Codebook cb;
  cb.M = M;
  cb.d = d;
  cb.n = n;
  cb.p = p;
  cb.bits.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
  Xoshiro256 rng(seed);
  Bit* data = cb.bits.data();
  const std::uint64_t cells = rows * cols;
  for (std::uint64_t i = 0; i < cells; ++i) data[i] = rng.uniform() < p ? 1 : 0;
  cb.per_time_fraction = column_fractions(cb.bits);
  return cb;
}

Codebook make_codebook(const BitMatrix& bits, std::uint64_t M, int d, double p) {
  if (static_cast<std::uint64_t>(bits.rows()) != hypothesis_count(M, d)) {
    throw std::domain_error("codebook must have M^d rows");
  }
  if ((bits.array() > 1).any()) throw std::domain_error("codebook entries must be 0 or 1");
  Codebook cb;
  cb.M = M;
  cb.d = d;
  cb.n = bits.cols();
  cb.p = p;
  cb.bits = bits;
  cb.per_time_fraction = column_fractions(bits);
  return cb;
}

std::size_t tolerant_argmax(std::span<const double> scores) {
  double best = kNegInf;
  for (const double s : scores) best = std::max(best, s);
  if (best == kNegInf) return 0;
  const double floor = best - kScoreTieTolerance * (1.0 + std::abs(best));
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= floor) return i;
  }
  return 0;
}

std::vector<double> decoder_scores(const Codebook& cb, std::span<const Symbol> y,
                                   const ChannelSpec& spec) {
  if (static_cast<std::int64_t>(y.size()) != cb.n) {
    throw std::domain_error("output sequence length must equal the codeword length");
  }
  const InfoDensityTable table = info_density_table(spec, cb.p, cb.p);
  const std::size_t n = y.size();
  // score(row) = base + sum_t bit_t * delta_t, where a time with a -inf
  // entry instead forces the bit (`forbidden` holds the losing value).
  double base = 0.0;
  bool all_dead = false;
  std::vector<double> delta(n, 0.0);
  std::vector<int> forbidden(n, -1);
  for (std::size_t t = 0; t < n; ++t) {
    if (y[t] >= spec.alphabet_size()) throw std::domain_error("output symbol outside the alphabet");
    const auto col = static_cast<Eigen::Index>(y[t]);
    if (!table.reachable(col)) {
      all_dead = true;
      continue;
    }
    const double a = table.values(0, col);
    const double b = table.values(1, col);
    if (a == kNegInf) {
      forbidden[t] = 0;
      base += b;
    } else if (b == kNegInf) {
      forbidden[t] = 1;
      base += a;
    } else {
      base += a;
      delta[t] = b - a;
    }
  }
  std::vector<double> scores(cb.rows(), kNegInf);
  if (all_dead) return scores;
  for (std::size_t r = 0; r < cb.rows(); ++r) {
    const Bit* row = cb.bits.data() + r * n;
    double s = base;
    bool alive = true;
    for (std::size_t t = 0; t < n; ++t) {
      if (row[t] == forbidden[t]) {
        alive = false;
        break;
      }
      if (row[t]) s += delta[t];
    }
    if (alive) scores[r] = s;
  }
  return scores;
}

std::uint64_t decode(const Codebook& cb, std::span<const Symbol> y, const ChannelSpec& spec) {
  const std::vector<double> scores = decoder_scores(cb, y, spec);
  return tolerant_argmax(scores) + 1;
}

std::vector<double> draw_target(const TargetModel& target, int d, std::uint64_t seed) {
  require_dimension(d);
  if (target.kind == TargetModel::Kind::kFixedPoint) {
    if (target.point.size() != static_cast<std::size_t>(d)) {
      throw std::domain_error("fixed target must have d coordinates");
    }
    for (const double s : target.point) {
      if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("target coordinates must lie in [0,1]");
    }
    return target.point;
  }
  Xoshiro256 rng(derive_seed(seed, static_cast<std::uint64_t>(TrialStream::kTarget)));
  std::vector<double> s(static_cast<std::size_t>(d));
  for (double& v : s) v = rng.uniform();
  return s;
}

TrialOutcome run_trial(const ChannelSpec& spec, const Codebook& cb, const TargetModel& target,
                       std::uint64_t seed) {
  TrialOutcome out;
  out.true_target = draw_target(target, cb.d, seed);
  std::vector<std::uint64_t> w(out.true_target.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = bin_index(out.true_target[j], cb.M);
  out.true_bin = flatten_index(w, cb.M);

  Xoshiro256 channel_rng(derive_seed(seed, static_cast<std::uint64_t>(TrialStream::kChannel)));
  const auto n = static_cast<std::size_t>(cb.n);
  const Bit* truth = cb.bits.data() + (out.true_bin - 1) * n;
  std::vector<Symbol> y(n);
  for (std::size_t t = 0; t < n; ++t) {
    y[t] = sample_output(spec, cb.per_time_fraction(static_cast<Eigen::Index>(t)), truth[t],
                         channel_rng);
  }

  out.decoded_bin = decode(cb, y, spec);
  const std::vector<std::uint64_t> w_hat = unflatten_index(out.decoded_bin, cb.M, cb.d);
  out.estimate.resize(w_hat.size());
  for (std::size_t j = 0; j < w_hat.size(); ++j) {
    out.estimate[j] = bin_center(w_hat[j], cb.M);
    out.max_abs_error = std::max(out.max_abs_error, std::abs(out.estimate[j] - out.true_target[j]));
  }
  out.excess = out.max_abs_error > 1.0 / static_cast<double>(cb.M);
  return out;
}

TrialOutcome run_trial(const ChannelSpec& spec, std::uint64_t M, int d, std::int64_t n, double p,
                       const TargetModel& target, std::uint64_t seed, std::uint64_t cell_budget) {
  const Codebook cb = generate_codebook(
      M, d, n, p, derive_seed(seed, static_cast<std::uint64_t>(TrialStream::kCodebook)),
      cell_budget);
  return run_trial(spec, cb, target, seed);
}

}  // namespace qsearch
