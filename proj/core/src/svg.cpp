#include "coco/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "coco/errors.hpp"

namespace coco {

namespace {

constexpr double kWidth = 800, kHeight = 560;
constexpr double kLeft = 70, kRight = 640, kTop = 40, kBottom = 510;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct CurvePoint {
  double x, y;
  double se = 0.0;
  bool has_se = false;
};

struct Curve {
  std::string label;
  std::vector<CurvePoint> points;
};

int require_column(const ResultTable& table, const std::string& name, const char* role) {
  const int idx = table.column_index(name);
  if (idx < 0)
    throw std::invalid_argument(std::string("emit_svg: missing ") + role + " column '" + name +
                                "'");
  return idx;
}

std::string escape(const std::string& text) {
  std::string out;
  for (const char c : text) {
    if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else if (c == '&')
      out += "&amp;";
    else
      out += c;
  }
  return out;
}

}  // namespace

std::string emit_svg(const ResultTable& table, const SvgPlotSpec& spec) {
  const int x_col = require_column(table, spec.x, "x");
  std::vector<int> filter_cols;
  for (const auto& [name, value] : spec.filter)
    filter_cols.push_back(require_column(table, name, "filter"));
  const int group_col = spec.group_by.empty() ? -1 : require_column(table, spec.group_by, "group");

  std::vector<Curve> curves;
  for (const auto& series : spec.series) {
    const int y_col = require_column(table, series.y, "y");
    const int se_col = series.se.empty() ? -1 : require_column(table, series.se, "error");
    const std::string base_label = series.label.empty() ? series.y : series.label;

    std::vector<std::pair<std::string, std::size_t>> groups;  // value -> curve index
    if (group_col < 0) {
      curves.push_back({base_label, {}});
      groups.emplace_back("", curves.size() - 1);
    }
    for (std::size_t r = 0; r < table.rows().size(); ++r) {
      bool keep = true;
      for (std::size_t f = 0; f < filter_cols.size() && keep; ++f)
        keep = table.text(r, filter_cols[f]) == spec.filter[f].second;
      if (!keep) continue;

      std::size_t curve_index;
      if (group_col < 0) {
        curve_index = groups[0].second;
      } else {
        const std::string key = table.text(r, group_col);
        const auto it = std::find_if(groups.begin(), groups.end(),
                                     [&](const auto& g) { return g.first == key; });
        if (it == groups.end()) {
          curves.push_back({base_label + " " + spec.group_by + "=" + key, {}});
          groups.emplace_back(key, curves.size() - 1);
          curve_index = curves.size() - 1;
        } else {
          curve_index = it->second;
        }
      }
      CurvePoint p;
      p.x = table.number(r, x_col);
      p.y = table.number(r, y_col);
      if (se_col >= 0) {
        p.se = table.number(r, se_col);
        p.has_se = true;
      }
      curves[curve_index].points.push_back(p);
    }
  }

  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool first = true;
  for (const auto& curve : curves) {
    for (const auto& p : curve.points) {
      const double lo = p.y - p.se, hi = p.y + p.se;
      if (spec.log_y && hi <= 0) continue;
      if (first) {
        x_min = x_max = p.x;
        y_min = spec.log_y && lo <= 0 ? p.y : lo;
        y_max = hi;
        first = false;
      } else {
        x_min = std::min(x_min, p.x);
        x_max = std::max(x_max, p.x);
        if (!(spec.log_y && lo <= 0)) y_min = std::min(y_min, lo);
        y_max = std::max(y_max, hi);
      }
    }
  }
  if (x_min == x_max) {
    x_min -= 1;
    x_max += 1;
  }
  if (y_min == y_max) {
    y_min = spec.log_y ? y_min / 2 : y_min - 1;
    y_max = spec.log_y ? y_max * 2 : y_max + 1;
  }

  const auto sx = [&](double x) {
    return kLeft + (x - x_min) / (x_max - x_min) * (kRight - kLeft);
  };
  const auto sy = [&](double y) {
    if (spec.log_y) y = std::log10(std::max(y, y_min * 1e-3));
    const double lo = spec.log_y ? std::log10(y_min) : y_min;
    const double hi = spec.log_y ? std::log10(y_max) : y_max;
    return kBottom - (y - lo) / (hi - lo) * (kBottom - kTop);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty())
    svg += "<text x=\"" + num((kLeft + kRight) / 2) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-size=\"16\">" + escape(spec.title) + "</text>\n";

  // axes
  svg += "<line class=\"axis\" x1=\"" + num(kLeft) + "\" y1=\"" + num(kBottom) + "\" x2=\"" +
         num(kRight) + "\" y2=\"" + num(kBottom) + "\" stroke=\"black\"/>\n";
  svg += "<line class=\"axis\" x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" +
         num(kLeft) + "\" y2=\"" + num(kBottom) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double fx = x_min + (x_max - x_min) * t / 5.0;
    svg += "<line x1=\"" + num(sx(fx)) + "\" y1=\"" + num(kBottom) + "\" x2=\"" + num(sx(fx)) +
           "\" y2=\"" + num(kBottom + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(sx(fx)) + "\" y=\"" + num(kBottom + 20) +
           "\" text-anchor=\"middle\" font-size=\"11\">" + tick_label(fx) + "</text>\n";
    double fy;
    if (spec.log_y)
      fy = std::pow(10.0, std::log10(y_min) + (std::log10(y_max) - std::log10(y_min)) * t / 5.0);
    else
      fy = y_min + (y_max - y_min) * t / 5.0;
    svg += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(sy(fy)) + "\" x2=\"" + num(kLeft) +
           "\" y2=\"" + num(sy(fy)) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(sy(fy) + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">" + tick_label(fy) + "</text>\n";
  }
  if (!spec.x_label.empty())
    svg += "<text x=\"" + num((kLeft + kRight) / 2) + "\" y=\"" + num(kHeight - 12) +
           "\" text-anchor=\"middle\" font-size=\"13\">" + escape(spec.x_label) + "</text>\n";
  if (!spec.y_label.empty())
    svg += "<text x=\"18\" y=\"" + num((kTop + kBottom) / 2) + "\" text-anchor=\"middle\" "
           "font-size=\"13\" transform=\"rotate(-90 18 " + num((kTop + kBottom) / 2) + ")\">" +
           escape(spec.y_label) + "</text>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& curve = curves[c];
    const char* color = kPalette[c % (sizeof(kPalette) / sizeof(kPalette[0]))];
    if (curve.points.size() > 1) {
      std::string poly = "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                         "\" stroke-width=\"1.5\" points=\"";
      for (const auto& p : curve.points) poly += num(sx(p.x)) + "," + num(sy(p.y)) + " ";
      poly.pop_back();
      svg += poly + "\"/>\n";
    }
    for (const auto& p : curve.points) {
      if (p.has_se) {
        const double lo = spec.log_y ? std::max(p.y - p.se, y_min) : p.y - p.se;
        svg += "<line class=\"errbar\" x1=\"" + num(sx(p.x)) + "\" y1=\"" + num(sy(lo)) +
               "\" x2=\"" + num(sx(p.x)) + "\" y2=\"" + num(sy(p.y + p.se)) + "\" stroke=\"" +
               color + "\"/>\n";
      }
      svg += "<circle cx=\"" + num(sx(p.x)) + "\" cy=\"" + num(sy(p.y)) + "\" r=\"3\" fill=\"" +
             color + "\"/>\n";
    }
    const double ly = kTop + 18.0 * static_cast<double>(c);
    svg += "<line x1=\"" + num(kRight + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" +
           num(kRight + 36) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(kRight + 42) + "\" y=\"" + num(ly + 4) + "\" font-size=\"11\">" +
           escape(curve.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void write_svg_file(const std::string& path, const ResultTable& table, const SvgPlotSpec& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write SVG file: " + path);
  out << emit_svg(table, spec);
}

}  // namespace coco
