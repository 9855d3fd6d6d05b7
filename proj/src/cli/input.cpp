#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "pitdep/cli.hpp"
#include "pitdep/error.hpp"

namespace pitdep::cli {
namespace {

[[noreturn]] void parse_error(int line, const std::string& detail) {
  throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": " + detail);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

bool try_number(const std::string& s, double& x) {
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, x);
  return ec == std::errc{} && ptr == end && !s.empty();
}

double number_or_throw(const std::string& field, int line) {
  double x = 0.0;
  if (!try_number(field, x)) parse_error(line, "'" + field + "' is not a number");
  return x;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      current += c;
    } else if (c == ',' && !quoted) {
      fields.push_back(unquote(trim(current)));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(unquote(trim(current)));
  return fields;
}

std::vector<double> parse_lines(const std::string& text) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty()) continue;
    values.push_back(number_or_throw(body, line_no));
  }
  return values;
}

std::vector<double> parse_csv(const std::string& text, const std::string& column) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::optional<std::size_t> index;
  if (!column.empty()) {
    std::size_t k = 0;
    const auto [ptr, ec] = std::from_chars(column.data(), column.data() + column.size(), k);
    if (ec == std::errc{} && ptr == column.data() + column.size()) index = k;
  }
  bool first_row = true;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (first_row) {
      first_row = false;
      if (!index) {
        if (column.empty()) {
          index = 0;
        } else {
          // A named column requires a header row.
          for (std::size_t k = 0; k < fields.size(); ++k) {
            if (fields[k] == column) index = k;
          }
          if (!index) parse_error(line_no, "no column named '" + column + "' in header");
          continue;
        }
      }
      double x = 0.0;
      if (*index < fields.size() && !try_number(fields[*index], x)) continue;  // header row
    }
    if (*index >= fields.size()) {
      parse_error(line_no, "row has no column " + std::to_string(*index));
    }
    values.push_back(number_or_throw(fields[*index], line_no));
  }
  return values;
}

std::vector<double> parse_json(const std::string& text, std::int64_t& ranks) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t offset = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
    parse_error(line, "invalid JSON");
  }
  const nlohmann::json* array = &j;
  if (j.is_object()) {
    if (!j.contains("values")) parse_error(1, "JSON object needs a \"values\" array");
    array = &j.at("values");
    if (j.contains("draws")) {
      if (!j.at("draws").is_number_integer()) parse_error(1, "\"draws\" must be an integer");
      if (ranks == 0) ranks = j.at("draws").get<std::int64_t>();
    }
  }
  if (!array->is_array()) parse_error(1, "expected a JSON array of numbers");
  std::vector<double> values;
  values.reserve(array->size());
  for (std::size_t k = 0; k < array->size(); ++k) {
    const auto& v = (*array)[k];
    if (!v.is_number()) parse_error(1, "element " + std::to_string(k) + " is not a number");
    values.push_back(v.get<double>());
  }
  return values;
}

}  // namespace

InputFormat detect_format(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".csv") return InputFormat::Csv;
  if (ext == ".json") return InputFormat::Json;
  return InputFormat::Text;
}

PitSample parse_pit_text(const std::string& text, InputFormat format, const std::string& column,
                         std::int64_t ranks) {
  std::vector<double> values;
  switch (format) {
    case InputFormat::Auto:
    case InputFormat::Text: values = parse_lines(text); break;
    case InputFormat::Csv: values = parse_csv(text, column); break;
    case InputFormat::Json: values = parse_json(text, ranks); break;
  }
  PitSample sample = ranks > 0 ? PitSample::rank_based(std::move(values), ranks)
                               : PitSample::continuous(std::move(values));
  validate(sample);
  return sample;
}

PitSample read_pit_file(const std::filesystem::path& path, InputFormat format,
                        const std::string& column, std::int64_t ranks) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Config, "cannot open input file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (format == InputFormat::Auto) format = detect_format(path);
  return parse_pit_text(buffer.str(), format, column, ranks);
}

}  // namespace pitdep::cli
