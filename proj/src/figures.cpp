#include "qsearch/figures.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "qsearch/asymptotics.hpp"
#include "qsearch/bounds.hpp"
#include "qsearch/capacity.hpp"
#include "qsearch/harness.hpp"

namespace qsearch {
namespace {

struct Entry {
  FigureId id;
  std::string_view name;
  std::vector<std::string> columns;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {FigureId::kPhase, "f1_phase",
       {"series", "rate_ratio", "rate", "n", "threshold_rate", "eps_normal", "eps_achievability"}},
      {FigureId::kBscMean, "f2_bscC", {"series", "param", "q", "mean_nats"}},
      {FigureId::kBecMean, "f3_becC", {"series", "param", "q", "mean_nats"}},
      {FigureId::kGain, "f4_gain", {"series", "channel", "param", "n", "gain_nats", "gain_bits"}},
      {FigureId::kZGain, "f4z_gain", {"series", "channel", "param", "n", "gain_nats", "gain_bits"}},
      {FigureId::kDimensions, "f5_ddim",
       {"d", "n", "theory_bits", "sim_rate", "wilson_low", "wilson_high", "M", "resolution_bits",
        "excess_count", "trials"}},
      {FigureId::kSeparate, "f6_separate",
       {"series", "n", "theory_bits", "sim_rate", "wilson_low", "wilson_high", "M",
        "resolution_bits", "excess_count", "trials"}},
  };
  return entries;
}

const Entry& lookup(FigureId id) {
  for (const auto& e : registry()) {
    if (e.id == id) return e;
  }
  throw std::domain_error("unknown figure id");
}

std::string label(std::string_view key, double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", value);
  return std::string(key) + "=" + buf;
}

constexpr std::array<double, 3> kParams = {0.2, 0.5, 1.0};
constexpr double kEps = 0.1;
constexpr double kNu = 0.4;

void mean_curves(FigureTable& t, ChannelKind kind, std::string_view key) {
  for (const double a : kParams) {
    const ChannelSpec spec = kind == ChannelKind::kBsc ? ChannelSpec::bsc(a) : ChannelSpec::bec(a);
    for (int i = 0; i <= 1000; ++i) {
      const double q = i / 1000.0;
      t.rows.push_back({label(key, a), format_real(a), format_real(q),
                        format_real(mean_info_density(spec, q))});
    }
  }
}

void gain_curves(FigureTable& t, std::string_view channel) {
  constexpr int kDim = 2;
  constexpr double kGainEps = 0.001;
  const std::array<std::int64_t, 10> ns = {10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000};
  for (const double a : kParams) {
    const ChannelSpec spec = make_channel(channel, a);
    const CapacityReport report = capacity(spec);
    for (const auto n : ns) {
      const double g = adaptivity_gain_lb(report, n, kDim, kGainEps);
      t.rows.push_back({std::string(channel) + " " + label("param", a), std::string(channel),
                        format_real(a), std::to_string(n), format_real(g),
                        format_real(g / std::numbers::ln2)});
    }
  }
}

void phase_curves(FigureTable& t, const FigureParams& params) {
  constexpr int kDim = 2;
  const ChannelSpec spec = ChannelSpec::bsc(0.2);
  const CapacityReport report = capacity(spec);
  const double threshold = phase_transition_rate(report, kDim);
  const double v = report.dispersion(0.5);
  const double p = report.reporting_achiever;
  std::vector<std::int64_t> ns = params.n_values;
  if (ns.empty()) ns = {25, 50, 75, 100, 125, 150, 175, 200};
  for (const double ratio : {0.8, 0.9, 1.1, 1.2}) {
    const double rate = ratio * threshold;
    for (const auto n : ns) {
      const double nn = static_cast<double>(n);
      const double log_m = nn * rate;  // per dimension
      const double z = (kDim * log_m - nn * report.capacity) / std::sqrt(nn * v);
      const double M = std::exp(log_m);
      const AchievabilityTerms ach = achievability_bound(
          spec, n, kDim, M, p, default_eta(M, kDim), BoundMode::kMeasurementDependent);
      t.rows.push_back({label("ratio", ratio), format_real(ratio), format_real(rate),
                        std::to_string(n), format_real(threshold), format_real(gaussian_cdf(z)),
                        format_real(ach.value)});
    }
  }
}

std::vector<std::string> sim_cells(const ExperimentSummary& s) {
  return {format_real(s.excess_rate), format_real(s.wilson_low), format_real(s.wilson_high),
          std::to_string(s.M), format_real(std::log2(static_cast<double>(s.M))),
          std::to_string(s.excess_count), std::to_string(s.trials)};
}

void dimension_sweep(FigureTable& t, const FigureParams& params) {
  const ChannelSpec spec = ChannelSpec::bsc(kNu);
  const CapacityReport report = capacity(spec);
  std::vector<int> ds = params.d_values;
  if (ds.empty()) ds = {1, 2, 3};
  std::vector<std::int64_t> ns = params.n_values;
  if (ns.empty()) ns = {20, 30, 40};
  for (const int d : ds) {
    for (const auto n : ns) {
      ExperimentSpec e(spec);
      e.n = n;
      e.d = d;
      e.eps = kEps;
      e.trials = params.trials;
      e.master_seed = params.seed;
      e.threads = params.threads;
      const ExperimentSummary s = run_experiment(e);
      std::vector<std::string> row = {
          std::to_string(d), std::to_string(n),
          format_real(joint_resolution(report, n, d, kEps).value / std::numbers::ln2)};
      for (auto& c : sim_cells(s)) row.push_back(std::move(c));
      t.rows.push_back(std::move(row));
    }
  }
}

void separate_sweep(FigureTable& t, const FigureParams& params) {
  const ChannelSpec spec = ChannelSpec::bsc(kNu);
  const CapacityReport report = capacity(spec);
  const int d = params.d_values.empty() ? 2 : params.d_values.front();
  std::vector<std::int64_t> ns = params.n_values;
  if (ns.empty()) ns = {40, 60};
  for (const auto n : ns) {
    const ResolutionChoice matched = choose_separate_M(report, n, d, kEps, MarginRule::kNone);
    for (const SearchMode mode : {SearchMode::kJoint, SearchMode::kSeparate}) {
      ExperimentSpec e(spec);
      e.n = n;
      e.d = d;
      e.eps = kEps;
      e.trials = params.trials;
      e.master_seed = params.seed;
      e.threads = params.threads;
      e.mode = mode;
      e.forced_M = matched.M;
      const ExperimentSummary s = run_experiment(e);
      const double theory = mode == SearchMode::kJoint
                                ? joint_resolution(report, n, d, kEps).value
                                : separate_resolution(report, n, d, kEps).value;
      std::vector<std::string> row = {to_string(mode), std::to_string(n),
                                      format_real(theory / std::numbers::ln2)};
      for (auto& c : sim_cells(s)) row.push_back(std::move(c));
      t.rows.push_back(std::move(row));
    }
  }
}

}  // namespace

std::string_view figure_name(FigureId id) { return lookup(id).name; }

FigureId parse_figure_id(std::string_view name) {
  for (const auto& e : registry()) {
    if (e.name == name) return e.id;
  }
  throw std::domain_error("unknown figure id '" + std::string(name) + "'");
}

const std::vector<FigureId>& all_figures() {
  static const std::vector<FigureId> ids = [] {
    std::vector<FigureId> out;
    for (const auto& e : registry()) out.push_back(e.id);
    return out;
  }();
  return ids;
}

const std::vector<std::string>& figure_columns(FigureId id) { return lookup(id).columns; }

FigureTable figure_series(FigureId id, const FigureParams& params) {
  FigureTable t;
  t.id = id;
  t.columns = figure_columns(id);
  switch (id) {
    case FigureId::kPhase: phase_curves(t, params); break;
    case FigureId::kBscMean: mean_curves(t, ChannelKind::kBsc, "nu"); break;
    case FigureId::kBecMean: mean_curves(t, ChannelKind::kBec, "tau"); break;
    case FigureId::kGain:
      gain_curves(t, "bsc");
      gain_curves(t, "bec");
      break;
    case FigureId::kZGain: gain_curves(t, "z"); break;
    case FigureId::kDimensions: dimension_sweep(t, params); break;
    case FigureId::kSeparate: separate_sweep(t, params); break;
  }
  return t;
}

void write_figure_csv(std::ostream& os, const FigureTable& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << table.columns[i];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
}

}  // namespace qsearch
