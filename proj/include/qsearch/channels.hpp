#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qsearch/rng.hpp"

namespace qsearch {

using Bit = std::uint8_t;
using Symbol = std::size_t;

/// Row x holds P(. | x) over the output alphabet.
using TransitionMatrix = Eigen::Matrix<double, 2, Eigen::Dynamic>;

enum class ChannelKind { kBsc, kBec, kZ, kFixed };

/// A family {P^q_{Y|X}} of binary-input channels indexed by the query size
/// q in [0, 1]. BSC flips with probability param*q, BEC erases with
/// probability param*q, Z flips 1 -> 0 with probability param*q. The fixed
/// kind ignores q (measurement-independent noise).
///
/// Output alphabets are ordered: BSC and Z use (0, 1); BEC uses (0, 1, e).
class ChannelSpec {
 public:
  static ChannelSpec bsc(double nu);
  static ChannelSpec bec(double tau);
  static ChannelSpec z(double zeta);
  /// `matrix` must be 2 x |Y| and row-stochastic within 1e-12.
  static ChannelSpec fixed(const TransitionMatrix& matrix,
                           std::vector<std::string> alphabet = {});

  ChannelKind kind() const noexcept { return kind_; }
  double param() const noexcept { return param_; }
  const std::vector<std::string>& alphabet() const noexcept { return alphabet_; }
  std::size_t alphabet_size() const noexcept { return alphabet_.size(); }
  const TransitionMatrix& fixed_matrix() const noexcept { return matrix_; }
  bool measurement_dependent() const noexcept { return kind_ != ChannelKind::kFixed; }

  /// Short name used in CLI flags and CSV output ("bsc", "bec", "z", "fixed").
  std::string name() const;

 private:
  ChannelSpec(ChannelKind kind, double param, std::vector<std::string> alphabet,
              TransitionMatrix matrix);

  ChannelKind kind_;
  double param_;
  std::vector<std::string> alphabet_;
  TransitionMatrix matrix_;
};

/// Builds a channel from its CLI description (`bsc`, `bec`, `z`).
ChannelSpec make_channel(std::string_view kind, double param);

/// Index of `name` in the output alphabet; std::domain_error if absent.
Symbol symbol_index(const ChannelSpec& spec, std::string_view name);

/// P^q(y | x).
double transition_prob(const ChannelSpec& spec, double q, Bit x, Symbol y);

TransitionMatrix transition_matrix(const ChannelSpec& spec, double q);

/// Draws y ~ P^q(. | x) with exactly one uniform variate, inverted against
/// the cumulative row in alphabet order.
Symbol sample_output(const ChannelSpec& spec, double q, Bit x, Xoshiro256& rng);

/// Smallest c with |log P^{q +- xi} / P^q|_inf <= c * xi for all
/// xi in (0, min(q, 1 - q) / 2]. Entries that vanish for every q are
/// skipped. Returns +infinity at q in {0, 1} for measurement-dependent
/// kinds, and 0 for the fixed kind.
double continuity_constant(const ChannelSpec& spec, double q);

}  // namespace qsearch
