#include "svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "pat/error.hpp"

namespace pat::cli {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_svg_chart(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<Series>& series) {
  constexpr double W = 720, H = 420, L = 70, R = 170, T = 40, B = 55;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ofstream out(path);
  if (!out) throw Error(fmt::format("{}: cannot write chart", path.string()));
  out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">)",
                     W, H)
      << "\n";
  out << fmt::format(R"(<rect width="{}" height="{}" fill="white"/>)", W, H) << "\n";
  out << fmt::format(R"(<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>)", (W - R + L) / 2,
                     escape(title))
      << "\n";
  out << fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>)", L, T, W - L - R,
                     H - T - B)
      << "\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = x0 + (x1 - x0) * k / 5.0, yv = y0 + (y1 - y0) * k / 5.0;
    out << fmt::format(R"(<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#ddd"/>)", px(xv), T, H - B) << "\n";
    out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">{:.4g}</text>)", px(xv), H - B + 16, xv) << "\n";
    out << fmt::format(R"(<line x1="{1}" y1="{0}" x2="{2}" y2="{0}" stroke="#ddd"/>)", py(yv), L, W - R) << "\n";
    out << fmt::format(R"(<text x="{}" y="{}" text-anchor="end">{:.3g}</text>)", L - 6, py(yv) + 4, yv) << "\n";
  }
  out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">{}</text>)", (W - R + L) / 2, H - 12,
                     escape(x_label))
      << "\n";
  out << fmt::format(R"svg(<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>)svg",
                     (H - B + T) / 2, escape(y_label))
      << "\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    std::string points;
    for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
      if (!std::isfinite(series[s].y[i])) continue;
      points += fmt::format("{:.2f},{:.2f} ", px(series[s].x[i]), py(series[s].y[i]));
    }
    out << fmt::format(R"(<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>)", color, points)
        << "\n";
    const double ly = T + 14 + 18 * static_cast<double>(s);
    out << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"/>)", W - R + 12, ly,
                       W - R + 32, ly, color)
        << "\n";
    out << fmt::format(R"(<text x="{}" y="{}">{}</text>)", W - R + 38, ly + 4, escape(series[s].name)) << "\n";
  }
  out << "</svg>\n";
}

}  // namespace pat::cli
