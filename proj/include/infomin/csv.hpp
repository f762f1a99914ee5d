// Copyright 2026 The InfoMin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace infomin {

using CsvRow = std::vector<std::string>;

/// RFC 4180 field quoting: fields containing comma, quote, CR or LF are
/// wrapped in quotes with embedded quotes doubled.
std::string csv_field(std::string_view value);
std::string csv_line(const CsvRow& row);

/// Parses RFC 4180 text (CRLF or LF line endings) into rows.
std::vector<CsvRow> parse_csv(std::string_view text);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const CsvRow& header);
  void write(const CsvRow& row);

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::filesystem::path path_;
};

}  // namespace infomin
