#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace qsearch {

enum class FigureId { kPhase, kBscMean, kBecMean, kGain, kZGain, kDimensions, kSeparate };

/// "f1_phase", "f2_bscC", "f3_becC", "f4_gain", "f4z_gain", "f5_ddim", "f6_separate".
std::string_view figure_name(FigureId id);
/// std::domain_error for unknown names.
FigureId parse_figure_id(std::string_view name);
const std::vector<FigureId>& all_figures();

/// Column schema of each figure CSV.
const std::vector<std::string>& figure_columns(FigureId id);

/// Knobs for the simulated figures; empty lists select the defaults
/// (f5: d in {1,2,3}, n in {20,30,40}; f6: d = 2, n in {40,60}).
struct FigureParams {
  std::int64_t trials = 2000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::vector<std::int64_t> n_values;
  std::vector<int> d_values;
};

struct FigureTable {
  FigureId id = FigureId::kPhase;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // cells already formatted
};

FigureTable figure_series(FigureId id, const FigureParams& params = {});

void write_figure_csv(std::ostream& os, const FigureTable& table);

}  // namespace qsearch
