#include "qsearch/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qsearch/infodensity.hpp"

namespace qsearch {

InfoMoments info_moments(const ChannelSpec& spec, double q) {
  InfoMoments moments;
  // Deterministic input: Y carries no information about X.
  if (q <= 0.0 || q >= 1.0) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("query size must lie in the range [0,1]");
    return moments;
  }
  const TransitionMatrix w = transition_matrix(spec, q);
  const Eigen::RowVectorXd marginal = (1.0 - q) * w.row(0) + q * w.row(1);
  const double input[2] = {1.0 - q, q};

  struct Cell {
    double prob;
    double value;
  };
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(2 * w.cols()));
  for (Eigen::Index x = 0; x < 2; ++x) {
    for (Eigen::Index y = 0; y < w.cols(); ++y) {
      const double prob = input[x] * w(x, y);
      if (prob > 0.0) cells.push_back({prob, std::log(w(x, y) / marginal(y))});
    }
  }
  for (const Cell& c : cells) moments.mean += c.prob * c.value;
  for (const Cell& c : cells) {
    const double dev = c.value - moments.mean;
    moments.variance += c.prob * dev * dev;
    moments.third_abs += c.prob * std::abs(dev) * dev * dev;
  }
  return moments;
}

double mean_info_density(const ChannelSpec& spec, double q) { return info_moments(spec, q).mean; }

double variance_info_density(const ChannelSpec& spec, double q) {
  return info_moments(spec, q).variance;
}

double third_abs_moment(const ChannelSpec& spec, double q) {
  return info_moments(spec, q).third_abs;
}

double CapacityReport::dispersion(double eps) const {
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("eps must lie in the open interval (0,1)");
  return eps < 0.5 ? v_low : v_high;
}

double CapacityReport::achiever_for(double eps) const {
  return eps < 0.5 ? reporting_achiever : high_variance_achiever;
}

namespace {

struct Peak {
  double q;
  double value;
  std::size_t grid_index;
};

// Golden-section search for the maximum of f on [lo, hi].
template <typename F>
Peak golden_max(F&& f, double lo, double hi, double tolerance, std::size_t grid_index) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  Peak best{c, fc, grid_index};
  if (fd > best.value) best = {d, fd, grid_index};
  for (const double edge : {lo, hi}) {
    const double fe = f(edge);
    if (fe > best.value) best = {edge, fe, grid_index};
  }
  return best;
}

// d/dq E[i_{q,q}]. Every channel entry is affine in q, so the entry slopes
// are W(1) - W(0); structural zeros contribute nothing.
double mean_slope(const ChannelSpec& spec, double q) {
  const TransitionMatrix w = transition_matrix(spec, q);
  const TransitionMatrix dw = transition_matrix(spec, 1.0) - transition_matrix(spec, 0.0);
  const double input[2] = {1.0 - q, q};
  const double d_input[2] = {-1.0, 1.0};
  double slope = 0.0;
  for (Eigen::Index y = 0; y < w.cols(); ++y) {
    double py = 0.0;
    double d_py = 0.0;
    for (Eigen::Index x = 0; x < 2; ++x) {
      const double d_cell = d_input[x] * w(x, y) + input[x] * dw(x, y);
      py += input[x] * w(x, y);
      d_py += d_cell;
      if (w(x, y) > 0.0) slope += d_cell * std::log(w(x, y));
    }
    if (py > 0.0) slope -= d_py * std::log(py);
  }
  return slope;
}

// Golden-section leaves q uncertain to about sqrt(machine eps) on a flat
// top; bisecting the slope inside the grid cell pins the stationary point.
void refine_by_slope(const ChannelSpec& spec, Peak& peak, double lo, double hi) {
  if (!(peak.q > 0.0 && peak.q < 1.0)) return;
  lo = std::max(lo, std::nextafter(0.0, 1.0));
  hi = std::min(hi, std::nextafter(1.0, 0.0));
  if (!(mean_slope(spec, lo) > 0.0 && mean_slope(spec, hi) < 0.0)) return;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double s = mean_slope(spec, mid);
    if (s == 0.0) {
      lo = hi = mid;
      break;
    }
    (s > 0.0 ? lo : hi) = mid;
  }
  const double q = 0.5 * (lo + hi);
  const double value = mean_info_density(spec, q);
  if (value >= peak.value - 1e-15 * (1.0 + std::abs(peak.value))) {
    peak.q = q;
    peak.value = value;
  }
}

}  // namespace

CapacityReport capacity(const ChannelSpec& spec, const CapacityOptions& options) {
  if (options.grid_size < 3) throw std::domain_error("capacity grid needs at least 3 points");
  const auto n = static_cast<std::size_t>(options.grid_size);
  const double step = 1.0 / static_cast<double>(n - 1);
  auto f = [&spec](double q) { return mean_info_density(spec, std::clamp(q, 0.0, 1.0)); };

  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = f(static_cast<double>(i) * step);

  std::vector<Peak> peaks;
  for (std::size_t i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || grid[i] >= grid[i - 1];
    const bool right_ok = i + 1 == n || grid[i] >= grid[i + 1];
    if (!left_ok || !right_ok) continue;
    const double lo = i == 0 ? 0.0 : static_cast<double>(i - 1) * step;
    const double hi = i + 1 == n ? 1.0 : static_cast<double>(i + 1) * step;
    Peak peak = golden_max(f, lo, hi, options.q_tolerance, i);
    refine_by_slope(spec, peak, lo, hi);
    peaks.push_back(peak);
  }

  double best = peaks.front().value;
  for (const Peak& p : peaks) best = std::max(best, p.value);

  // Keep near-optimal peaks; neighbours on the grid or in q collapse into
  // one achiever (flat tops produce runs of grid-local maxima).
  std::vector<Peak> kept;
  for (const Peak& p : peaks) {
    if (p.value < best - options.value_tolerance) continue;
    if (!kept.empty() && (p.grid_index == kept.back().grid_index + 1 ||
                          std::abs(p.q - kept.back().q) < options.merge_distance)) {
      const std::size_t index = p.grid_index;
      if (p.value > kept.back().value) kept.back() = p;
      kept.back().grid_index = index;
      continue;
    }
    kept.push_back(p);
  }

  CapacityReport report;
  report.capacity = best;
  report.grid_size = options.grid_size;
  report.tolerance = options.value_tolerance;
  std::sort(kept.begin(), kept.end(), [](const Peak& a, const Peak& b) { return a.q < b.q; });
  report.v_low = std::numeric_limits<double>::infinity();
  report.v_high = -std::numeric_limits<double>::infinity();
  for (const Peak& p : kept) {
    report.achievers.push_back(p.q);
    const InfoMoments m = info_moments(spec, p.q);
    if (m.variance < report.v_low) {
      report.v_low = m.variance;
      report.reporting_achiever = p.q;
      report.third_moment = m.third_abs;
    }
    if (m.variance > report.v_high) {
      report.v_high = m.variance;
      report.high_variance_achiever = p.q;
    }
  }
  return report;
}

double dispersion(const ChannelSpec& spec, double eps) { return capacity(spec).dispersion(eps); }

}  // namespace qsearch
