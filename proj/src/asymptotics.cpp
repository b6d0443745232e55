#include "qsearch/asymptotics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qsearch {
namespace {

void require_open_unit(double eps, const char* what) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::domain_error(std::string(what) + " must lie in the open interval (0,1)");
  }
}

void require_shape(std::int64_t n, int d) {
  if (n < 1) throw std::domain_error("number of queries must be at least 1");
  if (d < 1) throw std::domain_error("dimension must be at least 1");
}

SecondOrderValue with_window(double closed_form, std::int64_t n, int d, LogTerm log_term) {
  const double log_n = std::log(static_cast<double>(n));
  SecondOrderValue out;
  out.window_low = closed_form - 0.5 * log_n / d;
  out.window_high = closed_form + log_n / d;
  switch (log_term) {
    case LogTerm::kNone: out.value = closed_form; break;
    case LogTerm::kMinusHalfLog: out.value = out.window_low; break;
    case LogTerm::kPlusLog: out.value = out.window_high; break;
  }
  return out;
}

double ppnd16(double p) {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

}  // namespace

double gaussian_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double gaussian_quantile(double eps) {
  require_open_unit(eps, "probability");
  const double x = ppnd16(eps);
  // One Newton step; in the far tails compare upper-tail masses so the
  // correction does not lose the digits of 1 - eps.
  const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  if (density <= 0.0) return x;
  const double residual = x > 0.0 ? (1.0 - eps) - 0.5 * std::erfc(x / std::numbers::sqrt2)
                                  : gaussian_cdf(x) - eps;
  return x > 0.0 ? x + residual / density : x - residual / density;
}

SecondOrderValue joint_resolution(const CapacityReport& report, std::int64_t n, int d, double eps,
                                  LogTerm log_term) {
  require_shape(n, d);
  require_open_unit(eps, "eps");
  const double nn = static_cast<double>(n);
  const double closed =
      (nn * report.capacity + std::sqrt(nn * report.dispersion(eps)) * gaussian_quantile(eps)) / d;
  return with_window(closed, n, d, log_term);
}

SecondOrderValue separate_resolution(const CapacityReport& report, std::int64_t n, int d,
                                     double eps, LogTerm log_term) {
  require_shape(n, d);
  require_open_unit(eps, "eps");
  const double nn = static_cast<double>(n);
  const double per_dim = eps / d;
  const double closed = nn * report.capacity / d +
                        std::sqrt(nn * report.dispersion(per_dim) / d) * gaussian_quantile(per_dim);
  return with_window(closed, n, d, log_term);
}

double adaptive_resolution_lb(const CapacityReport& report, double mean_queries, int d,
                              double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::domain_error("eps must lie in the range [0,1)");
  if (!(mean_queries > 0.0)) throw std::domain_error("mean query budget must be positive");
  if (d < 1) throw std::domain_error("dimension must be at least 1");
  return mean_queries * report.capacity / (d * (1.0 - eps));
}

double adaptivity_gain_lb(const CapacityReport& report, std::int64_t n, int d, double eps) {
  require_shape(n, d);
  require_open_unit(eps, "eps");
  const double nn = static_cast<double>(n);
  return (nn * report.capacity * eps / (1.0 - eps) -
          std::sqrt(nn * report.dispersion(eps)) * gaussian_quantile(eps)) /
         d;
}

double phase_transition_rate(const CapacityReport& report, int d) {
  if (d < 1) throw std::domain_error("dimension must be at least 1");
  return report.capacity / d;
}

MiCoefficients mi_coefficients(const MiChannel& channel, double eps) {
  MiCoefficients out;
  const double a = channel.param;
  switch (channel.flavor) {
    case MiFlavor::kBsc: {
      if (!(a >= 0.0 && a <= 1.0)) throw std::domain_error("BSC parameter must lie in the range [0,1]");
      out.capacity = std::numbers::ln2 - binary_entropy(a);
      const double llr = (a > 0.0 && a < 1.0) ? std::log((1.0 - a) / a) : 0.0;
      out.dispersion = a * (1.0 - a) * llr * llr;
      return out;
    }
    case MiFlavor::kBec: {
      if (!(a >= 0.0 && a <= 1.0)) throw std::domain_error("BEC parameter must lie in the range [0,1]");
      out.capacity = (1.0 - a) * std::numbers::ln2;
      out.dispersion = a * (1.0 - a) * std::numbers::ln2 * std::numbers::ln2;
      return out;
    }
    case MiFlavor::kZ: {
      if (!(a >= 0.0 && a < 1.0)) throw std::domain_error("Z-channel parameter must lie in [0,1)");
      // Stationarity of h(q(1-zeta)) - q h(zeta) gives q(1-zeta) = 1/(1+e^s).
      const double s = binary_entropy(a) / (1.0 - a);
      const double q = 1.0 / ((1.0 - a) * (1.0 + std::exp(s)));
      out.optimizer = q;
      out.capacity = binary_entropy(q * (1.0 - a)) - q * binary_entropy(a);
      // Three positive-probability cells: (0,0), (1,0), (1,1).
      const double p0 = 1.0 - q + a * q;  // P_Y(0)
      const double cells[3][2] = {{1.0 - q, -std::log(p0)},
                                  {a * q, a > 0.0 ? std::log(a / p0) : 0.0},
                                  {q * (1.0 - a), -std::log(q)}};
      for (const auto& cell : cells) {
        const double dev = cell[1] - out.capacity;
        out.dispersion += cell[0] * dev * dev;
      }
      return out;
    }
    case MiFlavor::kGeneric: {
      const CapacityReport report = capacity(ChannelSpec::fixed(channel.matrix));
      out.capacity = report.capacity;
      out.dispersion = report.dispersion(eps);
      out.optimizer = report.achiever_for(eps);
      return out;
    }
  }
  return out;
}

SecondOrderValue mi_resolution(const MiChannel& channel, std::int64_t n, int d, double eps,
                               LogTerm log_term) {
  require_shape(n, d);
  require_open_unit(eps, "eps");
  const MiCoefficients c = mi_coefficients(channel, eps);
  const double nn = static_cast<double>(n);
  const double closed = (nn * c.capacity + std::sqrt(nn * c.dispersion) * gaussian_quantile(eps)) / d;
  return with_window(closed, n, d, log_term);
}

std::optional<std::int64_t> invert_queries(const CapacityReport& report, int d, double delta,
                                           double eps) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("delta must lie in the open interval (0,1)");
  if (d < 1) throw std::domain_error("dimension must be at least 1");
  require_open_unit(eps, "eps");
  const double c = report.capacity;
  // Capacity within the achiever tolerance of zero is numerically zero.
  if (!(c > report.tolerance)) return std::nullopt;
  const double target = -d * std::log(delta);
  const double b = std::sqrt(report.dispersion(eps)) * gaussian_quantile(eps);
  // d * f(n) = nC + b sqrt(n) is eventually increasing; the positive root of
  // C x^2 + b x - target in x = sqrt(n) locates the crossing.
  const double slack = 1e-12 * std::max(1.0, target);
  auto reaches = [&](std::int64_t n) {
    const double nn = static_cast<double>(n);
    return nn * c + b * std::sqrt(nn) >= target - slack;
  };
  const double root = (-b + std::sqrt(b * b + 4.0 * c * target)) / (2.0 * c);
  auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(root * root)));
  while (n > 1 && reaches(n - 1)) --n;
  while (!reaches(n)) ++n;
  return n;
}

}  // namespace qsearch
