#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vscc/data.hpp"
#include "vscc/error.hpp"

namespace vscc {

struct IngestResult {
  Dataset dataset;
  std::optional<PartialPartition> labels;
  std::vector<std::string> label_names;  // group id -> original cell value
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

inline std::optional<double> parse_double(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

}  // namespace detail

// Delimited text with a header row. Every column except the optional label
// column must be numeric. Blank label cells mean unknown membership; label
// ids are assigned in order of first appearance.
inline IngestResult ingest_csv(const std::string& path,
                               const std::optional<std::string>& label_col) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot open " + path);

  std::string line;
  if (!std::getline(in, line) || detail::trim(line).empty())
    throw Error(ErrorCode::ParseError, path + ": missing header row");
  const auto header = detail::split_csv_line(line);

  long label_index = -1;
  if (label_col) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == *label_col) label_index = static_cast<long>(j);
    if (label_index < 0)
      throw Error(ErrorCode::UnknownColumn,
                  "label column '" + *label_col + "' not in header");
  }

  std::vector<std::string> var_names;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (static_cast<long>(j) != label_index)
      var_names.push_back(detail::trim(header[j]));

  std::vector<std::vector<double>> rows;
  std::vector<std::string> label_cells;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;  // tolerate trailing blank lines
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::ParseError,
                  path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(var_names.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (static_cast<long>(j) == label_index) {
        label_cells.push_back(detail::trim(cells[j]));
        continue;
      }
      const auto value = detail::parse_double(cells[j]);
      if (!value)
        throw Error(ErrorCode::NonNumericColumn,
                    "column '" + detail::trim(header[j]) + "' has non-numeric "
                    "value '" + detail::trim(cells[j]) + "' at line " +
                        std::to_string(line_no));
      row.push_back(*value);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw Error(ErrorCode::ParseError, path + ": no data rows");

  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(var_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < var_names.size(); ++j)
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];

  IngestResult out;
  out.dataset = validate_dataset(values, var_names);
  if (label_index >= 0) {
    PartialPartition labels;
    labels.labels.reserve(label_cells.size());
    for (const auto& cell : label_cells) {
      if (cell.empty()) {
        labels.labels.push_back(0);
        continue;
      }
      long id = -1;
      for (std::size_t k = 0; k < out.label_names.size(); ++k)
        if (out.label_names[k] == cell) id = static_cast<long>(k);
      if (id < 0) {
        out.label_names.push_back(cell);
        id = static_cast<long>(out.label_names.size()) - 1;
      }
      labels.labels.push_back(static_cast<int>(id) + 1);
    }
    labels.group_count = static_cast<int>(out.label_names.size());
    out.labels = std::move(labels);
  }
  return out;
}

}  // namespace vscc
