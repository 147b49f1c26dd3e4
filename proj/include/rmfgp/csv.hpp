#pragma once

#include <string>
#include <vector>

namespace rmfgp {

// Minimal RFC-4180 writer/reader: UTF-8, CRLF records, '.' decimal separator,
// doubles at full round-trip precision (%.17g).
class CsvWriter {
 public:
  explicit CsvWriter(std::string path);

  CsvWriter& cell(const std::string& text);
  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  void end_row();
  void flush();  // writes the file; throws IoError on failure

  static std::string format_double(double value);

 private:
  std::string path_;
  std::vector<std::string> rows_;
  std::string current_;
  bool row_open_ = false;
};

std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace rmfgp
