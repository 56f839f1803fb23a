// csv.cpp — CSV emission and parsing with exact numeric round-trips.
#include "dicke/csv.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace dicke::csv {

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != header.size())
    throw std::invalid_argument("csv: row width does not match header");
  rows.push_back(std::move(cells));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

bool needs_quoting(const std::string& cell) {
  return cell.find_first_of(",\"\r\n") != std::string::npos;
}

void put_cell(const std::string& cell, std::ostream& os) {
  if (!needs_quoting(cell)) {
    os << cell;
    return;
  }
  os << '"';
  for (char c : cell) {
    if (c == '"') os << '"';
    os << c;
  }
  os << '"';
}

void put_line(const std::vector<std::string>& cells, std::ostream& os) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    put_cell(cells[i], os);
  }
  os << '\n';
}

}  // namespace

void emit(const Table& table, std::ostream& os) {
  put_line(table.header, os);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw std::invalid_argument("csv: row width does not match header");
    put_line(row, os);
  }
}

void write_file(const Table& table, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("csv: cannot open " + path);
  emit(table, os);
  os.flush();
  if (!os) throw std::runtime_error("csv: write failed for " + path);
}

Table parse(std::istream& is) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string cell;
  bool quoted = false;
  bool cell_started = false;  // current record has at least one cell begun

  auto end_cell = [&] {
    record.push_back(std::move(cell));
    cell.clear();
    cell_started = true;
  };
  auto end_record = [&] {
    end_cell();
    records.push_back(std::move(record));
    record.clear();
    cell_started = false;
  };

  int c;
  while ((c = is.get()) != EOF) {
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (is.peek() == '"') {
          cell.push_back('"');
          is.get();
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        quoted = true;
        break;
      case ',':
        end_cell();
        break;
      case '\r':
        break;  // tolerate CRLF line endings
      case '\n':
        end_record();
        break;
      default:
        cell.push_back(ch);
    }
  }
  if (quoted) throw std::runtime_error("csv: unterminated quoted cell");
  if (cell_started || !cell.empty()) end_record();  // final line without '\n'

  Table table;
  if (records.empty()) throw std::runtime_error("csv: empty input");
  table.header = std::move(records.front());
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != table.header.size())
      throw std::runtime_error("csv: row width does not match header");
    table.rows.push_back(std::move(records[i]));
  }
  return table;
}

}  // namespace dicke::csv
