#include "qsearch/channels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qsearch {
namespace {

void require_unit(double value, const char* what) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::domain_error(std::string(what) + " must lie in the range [0,1]");
  }
}

void require_bit(Bit x) {
  if (x > 1) throw std::domain_error("channel input must be 0 or 1");
}

// Entry (x, y) of the measurement-dependent families is affine in q:
// P^q(y|x) = offset + slope * q.
struct Affine {
  double offset;
  double slope;
  double at(double q) const { return offset + slope * q; }
};

Affine entry(const ChannelSpec& spec, Bit x, Symbol y) {
  const double a = spec.param();
  switch (spec.kind()) {
    case ChannelKind::kBsc:
      return y == x ? Affine{1.0, -a} : Affine{0.0, a};
    case ChannelKind::kBec:
      if (y == 2) return {0.0, a};
      return y == x ? Affine{1.0, -a} : Affine{0.0, 0.0};
    case ChannelKind::kZ:
      if (x == 0) return y == 0 ? Affine{1.0, 0.0} : Affine{0.0, 0.0};
      return y == 0 ? Affine{0.0, a} : Affine{1.0, -a};
    case ChannelKind::kFixed:
      return {spec.fixed_matrix()(x, static_cast<Eigen::Index>(y)), 0.0};
  }
  return {0.0, 0.0};
}

}  // namespace

ChannelSpec::ChannelSpec(ChannelKind kind, double param, std::vector<std::string> alphabet,
                         TransitionMatrix matrix)
    : kind_(kind), param_(param), alphabet_(std::move(alphabet)), matrix_(std::move(matrix)) {}

ChannelSpec ChannelSpec::bsc(double nu) {
  require_unit(nu, "BSC parameter");
  return ChannelSpec(ChannelKind::kBsc, nu, {"0", "1"}, TransitionMatrix());
}

ChannelSpec ChannelSpec::bec(double tau) {
  require_unit(tau, "BEC parameter");
  return ChannelSpec(ChannelKind::kBec, tau, {"0", "1", "e"}, TransitionMatrix());
}

ChannelSpec ChannelSpec::z(double zeta) {
  require_unit(zeta, "Z-channel parameter");
  return ChannelSpec(ChannelKind::kZ, zeta, {"0", "1"}, TransitionMatrix());
}

ChannelSpec ChannelSpec::fixed(const TransitionMatrix& matrix, std::vector<std::string> alphabet) {
  if (matrix.cols() < 1) throw std::domain_error("fixed channel needs at least one output");
  if ((matrix.array() < 0.0).any() || (matrix.array() > 1.0).any()) {
    throw std::domain_error("fixed channel probabilities must lie in the range [0,1]");
  }
  for (Eigen::Index x = 0; x < 2; ++x) {
    if (std::abs(matrix.row(x).sum() - 1.0) > 1e-12) {
      throw std::domain_error("fixed channel rows must sum to 1");
    }
  }
  if (alphabet.empty()) {
    for (Eigen::Index y = 0; y < matrix.cols(); ++y) alphabet.push_back(std::to_string(y));
  }
  if (alphabet.size() != static_cast<std::size_t>(matrix.cols())) {
    throw std::domain_error("alphabet size must match the matrix column count");
  }
  return ChannelSpec(ChannelKind::kFixed, 0.0, std::move(alphabet), matrix);
}

std::string ChannelSpec::name() const {
  switch (kind_) {
    case ChannelKind::kBsc: return "bsc";
    case ChannelKind::kBec: return "bec";
    case ChannelKind::kZ: return "z";
    case ChannelKind::kFixed: return "fixed";
  }
  return "unknown";
}

ChannelSpec make_channel(std::string_view kind, double param) {
  if (kind == "bsc") return ChannelSpec::bsc(param);
  if (kind == "bec") return ChannelSpec::bec(param);
  if (kind == "z") return ChannelSpec::z(param);
  throw std::domain_error("unknown channel kind '" + std::string(kind) +
                          "' (expected bsc, bec or z)");
}

Symbol symbol_index(const ChannelSpec& spec, std::string_view name) {
  const auto& alphabet = spec.alphabet();
  const auto it = std::find(alphabet.begin(), alphabet.end(), name);
  if (it == alphabet.end()) {
    throw std::domain_error("symbol '" + std::string(name) + "' is not in the output alphabet");
  }
  return static_cast<Symbol>(it - alphabet.begin());
}

double transition_prob(const ChannelSpec& spec, double q, Bit x, Symbol y) {
  require_unit(q, "query size");
  require_bit(x);
  if (y >= spec.alphabet_size()) throw std::domain_error("symbol is not in the output alphabet");
  return entry(spec, x, y).at(q);
}

TransitionMatrix transition_matrix(const ChannelSpec& spec, double q) {
  require_unit(q, "query size");
  const auto cols = static_cast<Eigen::Index>(spec.alphabet_size());
  TransitionMatrix m(2, cols);
  for (Bit x = 0; x < 2; ++x) {
    for (Eigen::Index y = 0; y < cols; ++y) m(x, y) = entry(spec, x, static_cast<Symbol>(y)).at(q);
  }
  return m;
}

Symbol sample_output(const ChannelSpec& spec, double q, Bit x, Xoshiro256& rng) {
  const double u = rng.uniform();
  const double a = spec.param() * q;
  switch (spec.kind()) {
    case ChannelKind::kBsc:
      if (x == 0) return u < 1.0 - a ? Symbol{0} : Symbol{1};
      return u < a ? Symbol{0} : Symbol{1};
    case ChannelKind::kBec:
      return u < 1.0 - a ? x : Symbol{2};
    case ChannelKind::kZ:
      if (x == 0) return 0;
      return u < a ? Symbol{0} : Symbol{1};
    case ChannelKind::kFixed: {
      const auto& m = spec.fixed_matrix();
      double cumulative = 0.0;
      const Eigen::Index last = m.cols() - 1;
      for (Eigen::Index y = 0; y < last; ++y) {
        cumulative += m(x, y);
        if (u < cumulative) return static_cast<Symbol>(y);
      }
      return static_cast<Symbol>(last);
    }
  }
  return 0;
}

double continuity_constant(const ChannelSpec& spec, double q) {
  require_unit(q, "query size");
  if (!spec.measurement_dependent()) return 0.0;
  if (q <= 0.0 || q >= 1.0) return std::numeric_limits<double>::infinity();
  const double xi = 0.5 * std::min(q, 1.0 - q);
  double c = 0.0;
  for (Bit x = 0; x < 2; ++x) {
    for (Symbol y = 0; y < spec.alphabet_size(); ++y) {
      const Affine f = entry(spec, x, y);
      if (f.offset == 0.0 && f.slope == 0.0) continue;
      const double here = f.at(q);
      if (here <= 0.0) return std::numeric_limits<double>::infinity();
      // log(1 + s*xi)/xi is monotone in xi, so the supremum over the window
      // sits at xi -> 0 (|f'|/f) or at the window edge.
      c = std::max(c, std::abs(f.slope) / here);
      for (const double side : {q + xi, q - xi}) {
        const double there = f.at(side);
        if (there <= 0.0) return std::numeric_limits<double>::infinity();
        c = std::max(c, std::abs(std::log(there / here)) / xi);
      }
    }
  }
  return c;
}

}  // namespace qsearch
