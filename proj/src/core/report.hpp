#pragma once

// Tabular experiment output: CSV rendering with a provenance comment line,
// and a key-value summary block.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "core/spectral.hpp"

namespace csopt {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

struct Attachment {
  std::string suffix;  ///< appended to the output path, e.g. ".spectrum.csv"
  Table table;
};

struct Report {
  std::string command;
  std::uint64_t config_hash = 0;
  Table table;
  std::vector<std::pair<std::string, std::string>> summary;
  std::vector<Attachment> attachments;
};

std::uint64_t fnv1a64(std::string_view text);

/// %.12g; integers and flags render without decoration.
std::string format_number(double value);
std::string format_complex(Complex value);

/// Semicolon-separated complex values, usable inside one CSV field.
std::string format_complex_list(std::span<const Complex> values);

/// "# config_hash=<16 hex> command=<name>\n" then the header and rows.
std::string render_csv(const Table& table, std::uint64_t config_hash, std::string_view command);

/// "key = value" lines.
std::string render_summary(const Report& report);

}  // namespace csopt
