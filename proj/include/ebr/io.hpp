#pragma once

// Delimited-text residual matrices.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ebr/errors.hpp"
#include "ebr/residual.hpp"

namespace ebr {

enum class Orientation { units_rows, periods_rows };

inline Orientation parse_orientation(const std::string& text) {
  if (text == "units_rows" || text == "units-rows") return Orientation::units_rows;
  if (text == "periods_rows" || text == "periods-rows") return Orientation::periods_rows;
  throw ConfigError("orientation must be units_rows or periods_rows, got '" + text + "'");
}

struct IngestSpec {
  std::filesystem::path path;
  char delimiter = ',';
  bool has_header = false;
  bool has_row_labels = false;
  Orientation orientation = Orientation::units_rows;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delimiter, start);
    cells.push_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

}  // namespace detail

// Parses a delimited matrix. Line and column numbers in errors are 1-based
// and refer to the raw text (header and label columns included).
inline ResidualMatrix ingest(std::istream& in, const IngestSpec& spec) {
  std::vector<double> values;
  std::size_t width = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::string line;
  bool header_pending = spec.has_header;
  const std::size_t first_col = spec.has_row_labels ? 1 : 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto cells = detail::split(line, spec.delimiter);
    if (cells.size() <= first_col) {
      throw ParseError("line " + std::to_string(line_no) + ": no numeric cells", line_no);
    }
    const std::size_t count = cells.size() - first_col;
    if (rows == 0) {
      width = count;
    } else if (count != width) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                           " values, found " + std::to_string(count),
                       line_no);
    }
    for (std::size_t c = first_col; c < cells.size(); ++c) {
      const std::string_view token = detail::trim(cells[c]);
      double v = 0.0;
      const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
      const std::string where =
          "line " + std::to_string(line_no) + ", column " + std::to_string(c + 1);
      if (token.empty() || res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw ParseError(where + ": not a number: '" + std::string(token) + "'", line_no, c + 1);
      }
      if (!std::isfinite(v)) {
        throw ParseError(where + ": non-finite value '" + std::string(token) +
                             "' (missing residuals are not supported)",
                         line_no, c + 1);
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError("input contains no data rows", line_no);

  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < width; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * width + c];
  if (spec.orientation == Orientation::periods_rows) m.transposeInPlace();
  return ResidualMatrix(std::move(m), spec.path.filename().string());
}

inline ResidualMatrix ingest(const IngestSpec& spec) {
  std::ifstream in(spec.path);
  if (!in) throw ParseError("cannot open " + spec.path.string(), 0);
  return ingest(in, spec);
}

// Writes units as rows in shortest round-trip decimal form, so that ingest()
// recovers the exact bits.
inline void write_matrix(std::ostream& out, const ResidualMatrix& e, char delimiter = ',') {
  char buf[64];
  for (Eigen::Index i = 0; i < e.n_units(); ++i) {
    for (Eigen::Index t = 0; t < e.m_periods(); ++t) {
      if (t > 0) out << delimiter;
      const auto res = std::to_chars(buf, buf + sizeof buf, e(i, t));
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

inline void write_matrix(const std::filesystem::path& path, const ResidualMatrix& e,
                         char delimiter = ',') {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_matrix(out, e, delimiter);
}

}  // namespace ebr
