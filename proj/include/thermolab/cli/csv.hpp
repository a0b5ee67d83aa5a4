#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace thermolab::cli {

std::string csv_escape(const std::string& field);
std::string format_number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(std::vector<std::string> fields);
  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }
  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::string cell(double v) { return format_number(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(std::uint64_t v) { return std::to_string(v); }
inline std::string cell(const std::string& v) { return v; }
inline std::string cell(const char* v) { return v; }

// Reads an RFC 4180 document back into rows (header included).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace thermolab::cli
