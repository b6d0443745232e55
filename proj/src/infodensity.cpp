#include "qsearch/infodensity.hpp"

#include <cmath>
#include <stdexcept>

namespace qsearch {

double output_marginal(const ChannelSpec& spec, double p, double q, Symbol y) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("input parameter must lie in the range [0,1]");
  return (1.0 - p) * transition_prob(spec, q, 0, y) + p * transition_prob(spec, q, 1, y);
}

Eigen::RowVectorXd output_marginals(const ChannelSpec& spec, double p, double q) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("input parameter must lie in the range [0,1]");
  const TransitionMatrix w = transition_matrix(spec, q);
  return (1.0 - p) * w.row(0) + p * w.row(1);
}

double info_density(const ChannelSpec& spec, double p, double q, Bit x, Symbol y) {
  const double marginal = output_marginal(spec, p, q, y);
  if (marginal <= 0.0) throw std::domain_error("symbol is unreachable under the output marginal");
  const double conditional = transition_prob(spec, q, x, y);
  return conditional > 0.0 ? std::log(conditional / marginal) : kNegInf;
}

InfoDensityTable info_density_table(const ChannelSpec& spec, double p, double q) {
  const TransitionMatrix w = transition_matrix(spec, q);
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("input parameter must lie in the range [0,1]");
  const Eigen::RowVectorXd marginal = (1.0 - p) * w.row(0) + p * w.row(1);

  InfoDensityTable table;
  table.p = p;
  table.q = q;
  table.values.resize(2, w.cols());
  table.reachable = marginal.array() > 0.0;
  for (Eigen::Index y = 0; y < w.cols(); ++y) {
    for (Eigen::Index x = 0; x < 2; ++x) {
      if (!table.reachable(y)) {
        table.values(x, y) = std::numeric_limits<double>::quiet_NaN();
      } else {
        table.values(x, y) = w(x, y) > 0.0 ? std::log(w(x, y) / marginal(y)) : kNegInf;
      }
    }
  }
  return table;
}

double sequence_info_density(const ChannelSpec& spec, double p, std::span<const Bit> x,
                             std::span<const Symbol> y) {
  if (x.size() != y.size()) throw std::domain_error("input and output sequences differ in length");
  if (x.empty()) return 0.0;
  const InfoDensityTable table = info_density_table(spec, p, p);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 1) throw std::domain_error("channel input must be 0 or 1");
    if (y[i] >= spec.alphabet_size() || !table.reachable(static_cast<Eigen::Index>(y[i]))) {
      throw std::domain_error("symbol is unreachable under the output marginal");
    }
    total += table(x[i], y[i]);
  }
  return total;
}

}  // namespace qsearch
