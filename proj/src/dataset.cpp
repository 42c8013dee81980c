#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "rmtl/error.hpp"
#include "rmtl/report.hpp"

namespace rmtl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::string where(std::size_t row, std::string_view column) {
  return " (row " + std::to_string(row) + ", column " + std::string(column) + ")";
}

double parse_real(std::string_view field, std::size_t row, std::string_view column) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw InputError("could not parse '" + std::string(field) + "' as a number" +
                     where(row, column));
  }
  return value;
}

int parse_int(std::string_view field, std::size_t row, std::string_view column) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw InputError("could not parse '" + std::string(field) + "' as an integer" +
                     where(row, column));
  }
  return value;
}

}  // namespace

Sample parse_dataset_text(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    lines.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw InputError("empty input");

  const auto header = split_commas(lines[first]);
  int time_col = -1, status_col = -1, group_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = lower(header[i]);
    if (name == "time") time_col = static_cast<int>(i);
    if (name == "status") status_col = static_cast<int>(i);
    if (name == "group") group_col = static_cast<int>(i);
  }
  if (time_col < 0 || status_col < 0 || group_col < 0) {
    throw InputError("header must name the columns time, status and group (row " +
                     std::to_string(first + 1) + ")");
  }
  const std::size_t needed =
      static_cast<std::size_t>(std::max({time_col, status_col, group_col})) + 1;

  std::vector<SurvRecord> records;
  for (std::size_t li = first + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const std::size_t row = li + 1;
    const auto fields = split_commas(lines[li]);
    if (fields.size() < needed) {
      throw InputError("expected at least " + std::to_string(needed) + " columns, found " +
                       std::to_string(fields.size()) + " (row " + std::to_string(row) + ")");
    }
    SurvRecord r;
    r.time = parse_real(fields[time_col], row, "time");
    if (!std::isfinite(r.time) || r.time <= 0.0) {
      throw InputError("time must be positive (row " + std::to_string(row) + ")");
    }
    const int status = parse_int(fields[status_col], row, "status");
    if (status < 0 || status > 2) {
      throw InputError("unknown status " + std::to_string(status) + " (row " +
                       std::to_string(row) + ")");
    }
    r.status = static_cast<Status>(status);
    r.group = parse_int(fields[group_col], row, "group");
    if (r.group != 1 && r.group != 2) {
      throw InputError("unknown group " + std::to_string(r.group) + " (row " +
                       std::to_string(row) + ")");
    }
    records.push_back(r);
  }
  if (records.empty()) throw InputError("empty input: no data rows");
  return Sample(std::move(records));
}

Sample parse_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset_text(buffer.str());
}

}  // namespace rmtl
