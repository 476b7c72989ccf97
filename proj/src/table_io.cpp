#include "vqa/table_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "vqa/error.hpp"

namespace vqa {

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
    cells.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \r\t") != std::string::npos) return true;
  }
  return false;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ParseError(0, std::string(text));
  }
  return value;
}

void write_feature_csv(std::ostream& out, const std::vector<FeatureRow>& rows) {
  out << "clip_id";
  for (auto name : kFeatureNames) out << ',' << name;
  out << '\n';
  for (const auto& row : rows) {
    out << row.clip_id;
    for (double v : row.features.values) out << ',' << format_double(v);
    out << '\n';
  }
}

std::vector<FeatureRow> read_feature_csv(std::istream& in) {
  std::string line;
  if (!next_data_line(in, line)) throw EmptyInput("feature CSV has no header");
  const auto header = split_csv_line(line);
  if (header.size() != kFeatureCount + 1 || header[0] != "clip_id") throw ParseError(0, line);
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (header[i + 1] != kFeatureNames[i]) throw ParseError(0, header[i + 1]);
  }
  std::vector<FeatureRow> rows;
  std::size_t line_no = 1;
  while (next_data_line(in, line)) {
    ++line_no;
    const auto cells = split_csv_line(line);
    if (cells.size() != kFeatureCount + 1) throw ParseError(line_no, line);
    FeatureRow row;
    row.clip_id = cells[0];
    for (std::size_t i = 0; i < kFeatureCount; ++i) row.features.values[i] = parse_double(cells[i + 1]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<FeatureRow> read_feature_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_feature_csv(in);
}

void write_score_csv(std::ostream& out, const ScoreTable& table, std::string_view value_name) {
  out << "clip_id," << value_name << '\n';
  for (const auto& [id, v] : table) out << id << ',' << format_double(v) << '\n';
}

ScoreTable read_score_csv(std::istream& in) {
  std::string line;
  if (!next_data_line(in, line)) throw EmptyInput("score CSV has no header");
  const auto header = split_csv_line(line);
  if (header.size() != 2 || header[0] != "clip_id") throw ParseError(0, line);
  ScoreTable table;
  std::size_t line_no = 1;
  while (next_data_line(in, line)) {
    ++line_no;
    const auto cells = split_csv_line(line);
    if (cells.size() != 2) throw ParseError(line_no, line);
    table.emplace_back(cells[0], parse_double(cells[1]));
  }
  return table;
}

ScoreTable read_score_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_score_csv(in);
}

}  // namespace vqa
