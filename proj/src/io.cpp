#include "slowcv/csv.hpp"

#include "slowcv/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <sstream>

namespace slowcv {

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), path_(path), columns_(header.size()) {
  if (!out_) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
  row(std::span<const double>(values.begin(), values.size()));
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != columns_) {
    throw Error(Errc::dimension_mismatch,
                fmt::format("{}: row has {} values, header has {}", path_.string(), values.size(), columns_));
  }
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += fmt::format("{}", values[i]);
  }
  line += '\n';
  out_ << line;
  if (!out_) throw Error(Errc::io, "write failed: " + path_.string());
}

std::vector<std::vector<double>> read_csv(const std::filesystem::path& path,
                                          const std::vector<std::string>& expected_header) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::io, path.string() + ": empty file");
  if (!expected_header.empty()) {
    std::string want;
    for (std::size_t i = 0; i < expected_header.size(); ++i) want += (i ? "," : "") + expected_header[i];
    if (line != want) throw Error(Errc::io, fmt::format("{}: expected header '{}', got '{}'", path.string(), want, line));
  }
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(Errc::io, fmt::format("{}:{}: bad number '{}'", path.string(), lineno, cell));
      }
      r.push_back(v);
    }
    if (!expected_header.empty() && r.size() != expected_header.size()) {
      throw Error(Errc::io, fmt::format("{}:{}: expected {} columns", path.string(), lineno, expected_header.size()));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
  out << value.dump(2) << '\n';
  if (!out) throw Error(Errc::io, "write failed: " + path.string());
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::io, fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace slowcv
