#include "pat/csv.hpp"

#include <charconv>
#include <sstream>

#include "pat/error.hpp"

namespace pat {

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), header_(std::move(header)), out_(path) {
  if (!out_) throw Error(fmt::format("{}: cannot open for writing", path.string()));
  row(header_);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != header_.size()) {
    throw Error(fmt::format("{}: row has {} fields, header has {}", path_.string(), fields.size(), header_.size()));
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << quote(fields[i]);
  }
  out_ << '\n';
  out_.flush();
  if (!out_) throw Error(fmt::format("{}: write failed", path_.string()));
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(fmt::format("csv: no column '{}'", name));
}

const std::string& CsvTable::text(std::size_t row, std::string_view name) const {
  return rows.at(row).at(column(name));
}

double CsvTable::number(std::size_t row, std::string_view name) const {
  const std::string& s = text(row, name);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(fmt::format("csv: column '{}' row {} is not a number: '{}'", name, row, s));
  }
  return v;
}

CsvTable parse_csv(std::string_view text, std::string_view origin) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string cur;
  bool in_quotes = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(cur));
      cur.clear();
      any = true;
    } else if (c == '\n') {
      rec.push_back(std::move(cur));
      cur.clear();
      records.push_back(std::move(rec));
      rec.clear();
      any = false;
    } else if (c != '\r') {
      cur += c;
      any = true;
    }
  }
  if (in_quotes) throw Error(fmt::format("{}: unterminated quoted field", origin));
  if (any) {
    rec.push_back(std::move(cur));
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw Error(fmt::format("{}: empty csv", origin));

  CsvTable t;
  t.header = std::move(records.front());
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != t.header.size()) {
      throw Error(fmt::format("{}: line {} has {} fields, header has {}", origin, i + 1, records[i].size(),
                              t.header.size()));
    }
    t.rows.push_back(std::move(records[i]));
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("{}: cannot open csv", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path.string());
}

}  // namespace pat
