#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fmopto::harness {

/// Formats with 17 significant digits (lossless for binary64).
std::string format_number(double v);

/// Quotes a field when it holds a comma, quote or newline.
std::string escape_field(const std::string& field);

/// Minimal CSV writer. Comment lines start with '#' and precede the header.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);

  void comment(const std::string& text);
  void header(const std::vector<std::string>& columns);

  CsvWriter& cell(double v);
  CsvWriter& cell(long v);
  CsvWriter& cell(int v) { return cell(static_cast<long>(v)); }
  CsvWriter& cell(bool v);
  CsvWriter& cell(const std::string& v);
  CsvWriter& cell(const char* v) { return cell(std::string(v)); }
  void end_row();

 private:
  void separator();

  std::ofstream out_;
  std::filesystem::path path_;
  bool row_started_ = false;
};

}  // namespace fmopto::harness
