#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "naeq/errors.hpp"

namespace naeq::cli {

// Plain CSV with a mandatory header row, '.' decimal point and 12 significant
// digits. Bodies are byte-stable across reruns for identical inputs.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  static std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
  }
  static std::string fmt(long long v) { return std::to_string(v); }
  static std::string fmt(int v) { return std::to_string(v); }
  static std::string fmt(bool v) { return v ? "true" : "false"; }

  void add_row(std::vector<std::string> row) {
    require(row.size() == header_.size(), ErrorCode::invalid_argument,
            "csv row width mismatch");
    rows_.push_back(std::move(row));
  }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorCode::config_error, "cannot open output file " + path);
    write_line(out, header_);
    for (const auto& row : rows_) write_line(out, row);
  }

  // Column-subset projection, used by sweep output splitting.
  CsvWriter select(const std::vector<std::string>& columns) const {
    std::vector<size_t> idx;
    for (const auto& name : columns) {
      size_t k = 0;
      for (; k < header_.size(); ++k)
        if (header_[k] == name) break;
      require(k < header_.size(), ErrorCode::config_error, "unknown output column " + name);
      idx.push_back(k);
    }
    CsvWriter out(columns);
    for (const auto& row : rows_) {
      std::vector<std::string> sel;
      sel.reserve(idx.size());
      for (size_t k : idx) sel.push_back(row[k]);
      out.rows_.push_back(std::move(sel));
    }
    return out;
  }

 private:
  static void write_line(std::ofstream& out, const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace naeq::cli
