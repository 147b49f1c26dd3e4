#include "rmfgp/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rmfgp/errors.hpp"

namespace rmfgp {

namespace {

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

CsvWriter::CsvWriter(std::string path) : path_(std::move(path)) {}

std::string CsvWriter::format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

CsvWriter& CsvWriter::cell(const std::string& text) {
  if (row_open_) current_ += ',';
  current_ += needs_quoting(text) ? quote(text) : text;
  row_open_ = true;
  return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(format_double(value)); }

CsvWriter& CsvWriter::cell(long long value) { return cell(std::to_string(value)); }

void CsvWriter::end_row() {
  rows_.push_back(current_);
  current_.clear();
  row_open_ = false;
}

void CsvWriter::flush() {
  if (row_open_) end_row();
  std::ofstream out(path_, std::ios::binary);
  if (!out) throw IoError("cannot open " + path_ + " for writing");
  for (const auto& row : rows_) {
    out << row << "\r\n";
  }
  if (!out.flush()) throw IoError("write to " + path_ + " failed");
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  const auto push_field = [&] {
    row.push_back(field);
    field.clear();
  };
  const auto push_row = [&] {
    push_field();
    rows.push_back(row);
    row.clear();
  };
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      push_field();
    } else if (c == '\r') {
      // swallow; newline handling below
    } else if (c == '\n') {
      push_row();
    } else {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) push_row();
  return rows;
}

}  // namespace rmfgp
