#include "asmcvar/data.hpp"

#include "asmcvar/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <utility>
#include <string_view>

namespace asmcvar {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t pos = line.find(',', begin);
    out.push_back(trim(line.substr(begin, pos - begin)));
    if (pos == std::string_view::npos) break;
    begin = pos + 1;
  }
  return out;
}

bool is_date_token(std::string_view token) {
  if (token.size() != 6) return false;
  for (char ch : token)
    if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
  return true;
}

bool has_letters(std::string_view s) {
  for (char ch : s)
    if (std::isalpha(static_cast<unsigned char>(ch))) return true;
  return false;
}

bool is_sentinel(double x) { return x == -99.99 || x == -999.0; }

}  // namespace

void ReturnPanel::validate() const {
  if (returns.cols() < 2)
    throw ShapeError("return panel needs at least 2 assets, got " +
                     std::to_string(returns.cols()));
  if (returns.rows() < 1) throw ShapeError("return panel has no rows");
  if (static_cast<Index>(dates.size()) != returns.rows())
    throw ShapeError("return panel has " + std::to_string(dates.size()) + " dates for " +
                     std::to_string(returns.rows()) + " rows");
  if (static_cast<Index>(assets.size()) != returns.cols())
    throw ShapeError("return panel has " + std::to_string(assets.size()) +
                     " asset labels for " + std::to_string(returns.cols()) + " columns");
  for (std::size_t i = 1; i < dates.size(); ++i)
    if (dates[i] <= dates[i - 1])
      throw DataError("dates not strictly increasing at " + std::to_string(dates[i]));
  if (!returns.allFinite()) throw DataError("return panel contains non-finite entries");
}

ReturnPanel parse_panel(std::istream& in, bool percent_scale, const std::string& source) {
  ReturnPanel panel;
  panel.provenance.source = source;

  std::vector<std::string> preamble;  // non-data lines before the block
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<int, std::size_t>> sentinels;  // (date, asset column)
  std::size_t width = 0;
  std::size_t line_no = 0;
  std::string line;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tokens = split_commas(line);
    if (!is_date_token(tokens.front())) {
      if (!rows.empty()) break;  // end of the first block
      if (!trim(line).empty()) preamble.push_back(line);
      continue;
    }
    if (rows.empty()) {
      width = tokens.size();
      panel.provenance.first_line = line_no;
    } else if (tokens.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " columns, found " +
                           std::to_string(tokens.size()),
                       line_no);
    }
    const int date = std::stoi(std::string(tokens.front()));
    const int month = date % 100;
    if (month < 1 || month > 12)
      throw ParseError("invalid month in date " + std::string(tokens.front()), line_no);

    std::vector<double> row;
    row.reserve(width - 1);
    for (std::size_t j = 1; j < tokens.size(); ++j) {
      const std::string_view cell = tokens[j];
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() ||
          !std::isfinite(value))
        throw ParseError("non-numeric cell '" + std::string(cell) + "' in column " +
                             std::to_string(j + 1),
                         line_no);
      if (is_sentinel(value)) sentinels.emplace_back(date, j - 1);
      row.push_back(percent_scale ? value / 100.0 : value);
    }
    panel.dates.push_back(date);
    rows.push_back(std::move(row));
    panel.provenance.last_line = line_no;
  }

  if (rows.empty()) throw ShapeError("no data lines (YYYYMM,...) found in " + source);
  if (width < 3)
    throw ShapeError("return panel needs at least 2 assets, got " +
                     std::to_string(width - 1));

  // Asset labels from the closest preceding line of the same width.
  const std::size_t n_assets = width - 1;
  for (auto it = preamble.rbegin(); it != preamble.rend(); ++it) {
    const auto tokens = split_commas(*it);
    if (tokens.size() == width && panel.assets.empty()) {
      for (std::size_t j = 1; j < tokens.size(); ++j) panel.assets.emplace_back(tokens[j]);
      continue;
    }
    if (!panel.assets.empty() && has_letters(*it)) {
      panel.provenance.block_title = std::string(trim(*it));
      break;
    }
  }
  if (panel.assets.empty())
    for (std::size_t j = 0; j < n_assets; ++j)
      panel.assets.push_back("asset_" + std::to_string(j + 1));

  if (!sentinels.empty()) {
    std::string listing;
    for (const auto& [date, col] : sentinels)
      listing += (listing.empty() ? "" : ", ") + std::to_string(date) + " " + panel.assets[col];
    throw DataError("missing-value sentinel in " + source + " at: " + listing);
  }

  panel.returns.resize(static_cast<Index>(rows.size()), static_cast<Index>(n_assets));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < n_assets; ++j)
      panel.returns(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];

  panel.validate();
  return panel;
}

ReturnPanel load_panel(const std::filesystem::path& path, bool percent_scale) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_panel(in, percent_scale, path.string());
}

void write_panel(const ReturnPanel& panel, std::ostream& out) {
  out << "date";
  for (const auto& name : panel.assets) out << ',' << name;
  out << '\n';
  char buf[64];
  for (Index i = 0; i < panel.periods(); ++i) {
    out << panel.dates[static_cast<std::size_t>(i)];
    for (Index j = 0; j < panel.num_assets(); ++j) {
      const auto res = std::to_chars(buf, buf + sizeof buf, panel.returns(i, j));
      out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

void write_panel(const ReturnPanel& panel, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_panel(panel, out);
}

std::optional<Window> slice_window(const ReturnPanel& panel, std::size_t t, std::size_t T) {
  const auto total = static_cast<std::size_t>(panel.periods());
  if (t < 1 || t > total)
    throw ParameterError("trade index " + std::to_string(t) + " outside 1.." +
                         std::to_string(total));
  if (T < 1) throw ParameterError("window length must be positive");
  if (t <= T) return std::nullopt;
  Window w;
  w.start_index = t - T - 1;
  w.end_index = t - 1;
  w.R = panel.returns.middleRows(static_cast<Index>(w.start_index), static_cast<Index>(T));
  return w;
}

}  // namespace asmcvar
