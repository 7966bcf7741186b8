#pragma once

#include "asmcvar/types.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace asmcvar {

// Where a panel came from. French library files stack several tables
// (value- and equal-weighted, annual, ...) in one CSV; only the first
// monthly block is read and its title is kept here for run metadata.
struct Provenance {
  std::string source;
  std::string block_title;
  std::size_t first_line = 0;
  std::size_t last_line = 0;
};

// Dated panel of simple monthly returns (0.0123 == +1.23%).
// Rows are months, columns are assets. Immutable after load.
struct ReturnPanel {
  std::vector<int> dates;  // YYYYMM, strictly increasing
  std::vector<std::string> assets;
  Matrix returns;
  Provenance provenance;

  Index periods() const { return returns.rows(); }
  Index num_assets() const { return returns.cols(); }

  // Throws DataError / ShapeError when an invariant does not hold.
  void validate() const;
};

// T consecutive panel rows. Positions are zero-based and half-open:
// R.row(i) == panel.returns.row(start_index + i), end_index - start_index == T.
struct Window {
  Matrix R;
  std::size_t start_index = 0;
  std::size_t end_index = 0;
};

// Parses a French-style CSV. A data line is one whose first token is a
// six-digit YYYYMM stamp; the first contiguous run of data lines is read.
// The nearest preceding line with matching column count names the assets.
// Cells equal to -99.99 or -999 are missing-value sentinels and raise a
// DataError listing every offending (date, asset). With percent_scale the
// cells are divided by 100.
ReturnPanel parse_panel(std::istream& in, bool percent_scale,
                        const std::string& source = "<stream>");
ReturnPanel load_panel(const std::filesystem::path& path, bool percent_scale = true);

// Canonical export: "date,<assets...>" header, decimal returns written in
// shortest round-trip form so parse_panel(percent_scale=false) restores the
// panel bit for bit.
void write_panel(const ReturnPanel& panel, std::ostream& out);
void write_panel(const ReturnPanel& panel, const std::filesystem::path& path);

// Window for trade index t (1-based): panel rows t-T .. t-1 (1-based).
// Returns nullopt when t <= T, i.e. not enough history; callers fall back
// to the uniform portfolio.
std::optional<Window> slice_window(const ReturnPanel& panel, std::size_t t,
                                   std::size_t T);

}  // namespace asmcvar
