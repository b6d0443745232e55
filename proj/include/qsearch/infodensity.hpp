#pragma once

#include <limits>
#include <span>

#include <Eigen/Dense>

#include "qsearch/channels.hpp"

namespace qsearch {

/// Sentinel for log 0. IEEE -inf orders below every finite value and
/// absorbs finite addends; no +inf ever enters a score, so sums stay NaN-free.
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// P_Y^{p,q}(y) = sum_x Bern(p)(x) P^q(y|x).
double output_marginal(const ChannelSpec& spec, double p, double q, Symbol y);

Eigen::RowVectorXd output_marginals(const ChannelSpec& spec, double p, double q);

/// i_{p,q}(x;y) = log(P^q(y|x) / P_Y^{p,q}(y)) in nats; kNegInf when the
/// transition probability is zero. Throws std::domain_error when y has zero
/// marginal probability.
double info_density(const ChannelSpec& spec, double p, double q, Bit x, Symbol y);

/// Single-letter densities for one (p, q) pair. Columns for symbols that are
/// unreachable under P_Y^{p,q} hold NaN and are flagged in `reachable`.
struct InfoDensityTable {
  TransitionMatrix values;
  Eigen::Array<bool, 1, Eigen::Dynamic> reachable;
  double p = 0.0;
  double q = 0.0;

  double operator()(Bit x, Symbol y) const { return values(x, static_cast<Eigen::Index>(y)); }
};

InfoDensityTable info_density_table(const ChannelSpec& spec, double p, double q);

/// sum_i i_{p,p}(x_i; y_i); kNegInf if any term is; 0 for empty input.
double sequence_info_density(const ChannelSpec& spec, double p, std::span<const Bit> x,
                             std::span<const Symbol> y);

}  // namespace qsearch
