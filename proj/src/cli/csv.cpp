#include "thermolab/cli/csv.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "thermolab/errors.hpp"

namespace thermolab::cli {

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  return fmt::format("{:.15g}", v);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw InputError("csv header must not be empty");
}

CsvTable& CsvTable::row(std::vector<std::string> fields) {
  if (fields.size() != header_.size())
    throw InputError(fmt::format("csv row has {} fields, header has {}", fields.size(), header_.size()));
  rows_.push_back(std::move(fields));
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(r[i]);
    }
    out += "\r\n";
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  return out;
}

void CsvTable::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path));
  out << str();
  if (!out) throw ConfigError(fmt::format("write failed for '{}'", path));
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> cur;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cur.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      cur.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(cur));
      cur.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw InputError("unterminated quoted csv field");
  if (any) {
    cur.push_back(std::move(field));
    rows.push_back(std::move(cur));
  }
  return rows;
}

}  // namespace thermolab::cli
