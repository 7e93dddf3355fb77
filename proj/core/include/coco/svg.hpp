#pragma once

#include <string>
#include <utility>
#include <vector>

#include "coco/table.hpp"

namespace coco {

struct SvgSeries {
  std::string y;
  std::string se;     ///< optional error-bar column
  std::string label;  ///< legend label; defaults to the y column name
};

struct SvgPlotSpec {
  std::string x;
  std::vector<SvgSeries> series;
  std::string group_by;  ///< optional: split each series by this column's values
  std::vector<std::pair<std::string, std::string>> filter;  ///< keep rows where column == value
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
};

/// Line/scatter plot with error bars; a pure function of the table. Throws
/// std::invalid_argument when a referenced column is missing.
std::string emit_svg(const ResultTable& table, const SvgPlotSpec& spec);

void write_svg_file(const std::string& path, const ResultTable& table, const SvgPlotSpec& spec);

}  // namespace coco
