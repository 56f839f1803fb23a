// csv.hpp — minimal CSV table used by the sweep runner and the CLI: header
// plus string cells, numeric cells rendered with 17 significant digits so
// that emit/parse round-trips reproduce every double bit-for-bit.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dicke::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Appends a row; throws std::invalid_argument on column-count mismatch.
  void add_row(std::vector<std::string> cells);
};

// Shortest-round-trip rendering of a double (printf %.17g).
std::string format_double(double v);

// Writes the table; cells containing a comma, quote, CR or LF are quoted,
// with embedded quotes doubled.
void emit(const Table& table, std::ostream& os);

// Convenience: emit to a file; throws std::runtime_error on I/O failure.
void write_file(const Table& table, const std::string& path);

// Parses what emit produces (quoted fields, doubled quotes, embedded
// newlines inside quotes); rows must all match the header width.
Table parse(std::istream& is);

}  // namespace dicke::csv
