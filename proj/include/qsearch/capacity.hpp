#pragma once

#include <vector>

#include "qsearch/channels.hpp"

namespace qsearch {

/// Binary entropy in nats, with h(0) = h(1) = 0.
template <typename Scalar>
Scalar binary_entropy(Scalar p) {
  using std::log;
  if (p <= Scalar(0) || p >= Scalar(1)) return Scalar(0);
  return -p * log(p) - (Scalar(1) - p) * log(Scalar(1) - p);
}

/// Mean, variance and third absolute central moment of i_{q,q}(X;Y) under
/// (X, Y) ~ Bern(q) x P^q, by exact summation over the joint support.
struct InfoMoments {
  double mean = 0.0;
  double variance = 0.0;
  double third_abs = 0.0;
};

InfoMoments info_moments(const ChannelSpec& spec, double q);

double mean_info_density(const ChannelSpec& spec, double q);
double variance_info_density(const ChannelSpec& spec, double q);
double third_abs_moment(const ChannelSpec& spec, double q);

struct CapacityOptions {
  int grid_size = 20001;
  double q_tolerance = 1e-12;      // golden-section stopping width
  double value_tolerance = 1e-10;  // nats, for membership in the achiever set
  double merge_distance = 1e-6;    // refined maxima closer than this are one achiever
};

struct CapacityReport {
  double capacity = 0.0;
  std::vector<double> achievers;  // ascending in q
  double v_low = 0.0;             // min variance over achievers (eps < 0.5)
  double v_high = 0.0;            // max variance over achievers (eps >= 0.5)
  double third_moment = 0.0;      // at `reporting_achiever`
  double reporting_achiever = 0.0;  // achiever attaining v_low
  double high_variance_achiever = 0.0;
  int grid_size = 0;
  double tolerance = 0.0;

  /// V_eps: v_low for eps < 0.5, v_high otherwise.
  double dispersion(double eps) const;
  /// The achiever whose variance realises dispersion(eps).
  double achiever_for(double eps) const;
};

/// max_q E[i_{q,q}(X;Y)] by dense grid plus golden-section refinement of
/// every grid-local maximum.
CapacityReport capacity(const ChannelSpec& spec, const CapacityOptions& options = {});

/// V_eps for eps in (0, 1).
double dispersion(const ChannelSpec& spec, double eps);

}  // namespace qsearch
