#include "core/report.hpp"

#include <cinttypes>
#include <cstdio>

#include "core/error.hpp"

namespace csopt {

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw NumericalError("table row width does not match its header");
  rows.push_back(std::move(row));
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string format_complex(Complex value) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.12g%+.12gj", value.real(), value.imag());
  return buf;
}

std::string format_complex_list(std::span<const Complex> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += format_complex(values[i]);
  }
  return out;
}

std::string render_csv(const Table& table, std::uint64_t config_hash, std::string_view command) {
  char head[96];
  std::snprintf(head, sizeof head, "# config_hash=%016" PRIx64 " command=", config_hash);
  std::string out = head;
  out.append(command);
  out += '\n';
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(table.columns);
  for (const auto& r : table.rows) line(r);
  return out;
}

std::string render_summary(const Report& report) {
  char head[64];
  std::snprintf(head, sizeof head, "%016" PRIx64, report.config_hash);
  std::string out = "command = " + report.command + "\nconfig_hash = " + head + "\n";
  for (const auto& [k, v] : report.summary) out += k + " = " + v + "\n";
  return out;
}

}  // namespace csopt
