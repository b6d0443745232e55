#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qsearch/channels.hpp"

namespace qsearch {

/// Upper limit on M^d * n codebook cells unless a caller passes its own.
inline constexpr std::uint64_t kDefaultCellBudget = std::uint64_t{1} << 28;

/// M^d; ResourceError if it overflows 64 bits.
std::uint64_t hypothesis_count(std::uint64_t M, int d);

/// ceil(s M), with s = 0 mapped to bin 1. Bins are 1-based.
std::uint64_t bin_index(double s, std::uint64_t M);

/// (2w - 1) / (2M).
double bin_center(std::uint64_t w, std::uint64_t M);

/// Gamma(w_1..w_d) = 1 + sum_j (w_j - 1) M^{d-j}; 1-based in and out.
std::uint64_t flatten_index(std::span<const std::uint64_t> w, std::uint64_t M);

std::vector<std::uint64_t> unflatten_index(std::uint64_t m, std::uint64_t M, int d);

using BitMatrix = Eigen::Matrix<Bit, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Random codebook of the nonadaptive search. Row r (0-based) is the codeword of the
/// flattened bin r + 1; column t is the query posed at time t + 1.
struct Codebook {
  std::uint64_t M = 0;
  int d = 0;
  std::int64_t n = 0;
  double p = 0.0;
  BitMatrix bits;
  Eigen::VectorXd per_time_fraction;  // ones in column t / M^d

  std::size_t rows() const noexcept { return static_cast<std::size_t>(bits.rows()); }
};

/// Builds per_time_fraction from `bits` (exact count / rows).
Eigen::VectorXd column_fractions(const BitMatrix& bits);

/// Draws bit (r, t) = [u < p] in row-major order from Xoshiro256(seed).
/// ResourceError when M^d * n exceeds `cell_budget`.
Codebook generate_codebook(std::uint64_t M, int d, std::int64_t n, double p, std::uint64_t seed,
                           std::uint64_t cell_budget = kDefaultCellBudget);

/// Wraps explicit rows; M^d must equal bits.rows().
Codebook make_codebook(const BitMatrix& bits, std::uint64_t M, int d, double p);

/// Relative-absolute slack inside which two decoder scores count as tied.
inline constexpr double kScoreTieTolerance = 1e-9;

/// Index of the first score within kScoreTieTolerance * (1 + |max|) of the
/// maximum; 0 when every score is -inf.
std::size_t tolerant_argmax(std::span<const double> scores);

/// Maximum information density decoder over the rows of `cb` with the
/// i_{p,p} table. Returns the 1-based flattened index. A row whose bits meet
/// a structural zero of the channel scores -inf; ties go to the smallest
/// index.
std::uint64_t decode(const Codebook& cb, std::span<const Symbol> y, const ChannelSpec& spec);

/// Per-row scores used by decode (exposed for tests).
std::vector<double> decoder_scores(const Codebook& cb, std::span<const Symbol> y,
                                   const ChannelSpec& spec);

/// Where the target sits: uniform on the unit cube, or a fixed point.
struct TargetModel {
  enum class Kind { kUniformCube, kFixedPoint };
  Kind kind = Kind::kUniformCube;
  std::vector<double> point;

  static TargetModel uniform() { return {}; }
  static TargetModel fixed(std::vector<double> coords) {
    return {Kind::kFixedPoint, std::move(coords)};
  }
};

struct TrialOutcome {
  std::vector<double> true_target;
  std::vector<double> estimate;
  double max_abs_error = 0.0;
  bool excess = false;  // max_abs_error > 1/M
  std::uint64_t decoded_bin = 0;
  std::uint64_t true_bin = 0;
};

/// Substream ids under a trial seed; derive_seed(seed, id) seeds each.
enum class TrialStream : std::uint64_t { kCodebook = 0, kTarget = 1, kChannel = 2 };

/// `d` coordinates drawn from the target model with the kTarget substream.
std::vector<double> draw_target(const TargetModel& target, int d, std::uint64_t seed);

/// One nonadaptive search with a fresh codebook.
TrialOutcome run_trial(const ChannelSpec& spec, std::uint64_t M, int d, std::int64_t n, double p,
                       const TargetModel& target, std::uint64_t seed,
                       std::uint64_t cell_budget = kDefaultCellBudget);

/// One nonadaptive search against a caller-supplied codebook.
TrialOutcome run_trial(const ChannelSpec& spec, const Codebook& cb, const TargetModel& target,
                       std::uint64_t seed);

}  // namespace qsearch
