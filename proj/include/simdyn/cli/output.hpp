// Text artifacts produced by the runner: CSV tables with round-trip number
// formatting and a config-hash header line, and JSON documents.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "simdyn/error.hpp"

namespace simdyn::cli {

// 17 significant digits, '.' separator; NaN and infinities spelled out.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_number(std::uint64_t v) { return std::to_string(v); }

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw DomainError("CsvTable: row width differs from header");
    rows_.push_back(std::move(cells));
  }

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

  std::string render(const std::string& config_hash) const {
    std::string out = "# config_hash=" + config_hash + "\n";
    append_line(out, header_);
    for (const auto& r : rows_) append_line(out, r);
    return out;
  }

  // Long format (series, x, y): one row per non-key cell, keyed by column 0.
  CsvTable tidy() const {
    CsvTable t({"series", header_.empty() ? "x" : header_[0], "value"});
    for (const auto& r : rows_) {
      for (std::size_t c = 1; c < r.size(); ++c) t.add_row({header_[c], r[0], r[c]});
    }
    return t;
  }

 private:
  static void append_line(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace simdyn::cli
