#include "fmopto/harness/csv.hpp"

#include <cmath>
#include <cstdio>

#include "fmopto/errors.hpp"

namespace fmopto::harness {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string escape_field(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path), path_(path) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
}

void CsvWriter::comment(const std::string& text) {
  std::string line = text;
  for (auto& c : line)
    if (c == '\n') c = ' ';
  out_ << "# " << line << '\n';
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << escape_field(columns[i]);
  out_ << '\n';
}

void CsvWriter::separator() {
  if (row_started_) out_ << ',';
  row_started_ = true;
}

CsvWriter& CsvWriter::cell(double v) {
  separator();
  out_ << format_number(v);
  return *this;
}

CsvWriter& CsvWriter::cell(long v) {
  separator();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::cell(bool v) {
  separator();
  out_ << (v ? 1 : 0);
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& v) {
  separator();
  out_ << escape_field(v);
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  row_started_ = false;
  if (!out_) throw Error("write failed on " + path_.string());
}

}  // namespace fmopto::harness
