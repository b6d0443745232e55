#pragma once

#include <cstdint>
#include <optional>

#include "qsearch/capacity.hpp"
#include "qsearch/channels.hpp"

namespace qsearch {

/// Standard normal CDF via erfc.
double gaussian_cdf(double x);

/// Phi^{-1}(eps): AS241 (PPND16) followed by one Newton step against
/// gaussian_cdf. Throws std::domain_error outside (0, 1).
double gaussian_quantile(double eps);

/// How the O(log n) remainder enters a reported value.
enum class LogTerm { kNone, kMinusHalfLog, kPlusLog };

/// A second-order prediction of -log(delta) in nats. `value` has the log
/// term applied per LogTerm; the window brackets the remainder between
/// -(1/2)log n and +log n (divided by d like the rest of the expression).
struct SecondOrderValue {
  double value = 0.0;
  double window_low = 0.0;
  double window_high = 0.0;
};

/// (1/d)(nC + sqrt(n V_eps) Phi^{-1}(eps)).
SecondOrderValue joint_resolution(const CapacityReport& report, std::int64_t n, int d, double eps,
                                  LogTerm log_term = LogTerm::kNone);

/// Dimension-by-dimension search with n/d queries and eps/d per dimension:
/// nC/d + sqrt(n V_{eps/d} / d) Phi^{-1}(eps/d).
SecondOrderValue separate_resolution(const CapacityReport& report, std::int64_t n, int d,
                                     double eps, LogTerm log_term = LogTerm::kNone);

/// Leading term l C / (d (1 - eps)) of the adaptive achievability bound.
/// The O(log l) constant is unknown, so no window is reported.
double adaptive_resolution_lb(const CapacityReport& report, double mean_queries, int d,
                              double eps);

/// (1/d)(n C eps / (1 - eps) - sqrt(n V_eps) Phi^{-1}(eps)).
double adaptivity_gain_lb(const CapacityReport& report, std::int64_t n, int d, double eps);

/// C / d, the threshold resolution decay rate.
double phase_transition_rate(const CapacityReport& report, int d);

/// Measurement-independent channel closed forms.
enum class MiFlavor { kBsc, kBec, kZ, kGeneric };

struct MiChannel {
  MiFlavor flavor = MiFlavor::kGeneric;
  double param = 0.0;                 // nu, tau or zeta
  TransitionMatrix matrix;            // used by kGeneric only
};

/// Capacity, dispersion and optimiser of a measurement-independent channel.
struct MiCoefficients {
  double capacity = 0.0;
  double dispersion = 0.0;
  double optimizer = 0.5;
};

MiCoefficients mi_coefficients(const MiChannel& channel, double eps);

/// (1/d)(n C_mi + sqrt(n V_mi) Phi^{-1}(eps)).
SecondOrderValue mi_resolution(const MiChannel& channel, std::int64_t n, int d, double eps,
                               LogTerm log_term = LogTerm::kNone);

/// Smallest n whose joint_resolution (no log term) reaches -log(delta).
/// Returns nullopt when C = 0 (no finite n suffices).
std::optional<std::int64_t> invert_queries(const CapacityReport& report, int d, double delta,
                                           double eps);

}  // namespace qsearch
