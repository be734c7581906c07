#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pat::cli {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal standalone SVG line chart with axes, ticks and a legend.
void write_svg_chart(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<Series>& series);

}  // namespace pat::cli
