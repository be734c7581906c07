#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

namespace pat {

// RFC 4180 style: fields containing a comma, quote or newline are quoted.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  void row(const std::vector<std::string>& fields);

  template <typename... Ts>
  void write(const Ts&... values) {
    row({field(values)...});
  }

  const std::vector<std::string>& header() const { return header_; }

 private:
  template <typename T>
  static std::string field(const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
      return fmt::format("{:.17g}", v);
    } else {
      return fmt::format("{}", v);
    }
  }

  std::filesystem::path path_;
  std::vector<std::string> header_;
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws Error when absent.
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
  const std::string& text(std::size_t row, std::string_view name) const;
};

// Throws Error when a row's width differs from the header's.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text, std::string_view origin = "<string>");

}  // namespace pat
