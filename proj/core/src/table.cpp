#include "coco/table.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace coco {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void ResultTable::append(std::vector<Cell> row) {
  if (row.size() != columns_.size())
    throw std::invalid_argument("ResultTable: row width does not match schema");
  rows_.push_back(std::move(row));
}

int ResultTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return static_cast<int>(i);
  return -1;
}

double ResultTable::number(std::size_t row, int col) const {
  return std::get<double>(rows_.at(row).at(static_cast<std::size_t>(col)));
}

std::string ResultTable::text(std::size_t row, int col) const {
  const Cell& cell = rows_.at(row).at(static_cast<std::size_t>(col));
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  return format_double(std::get<double>(cell));
}

void ResultTable::write_csv(std::ostream& out) const {
  for (const auto& line : provenance_) out << "# " << line << '\n';
  std::string units = "# units:";
  for (const auto& col : columns_) units += " " + col.name + "=" + col.unit;
  out << units << '\n';
  for (std::size_t i = 0; i < columns_.size(); ++i)
    out << (i == 0 ? "" : ",") << columns_[i].name;
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      if (const auto* s = std::get_if<std::string>(&row[i]))
        out << *s;
      else
        out << format_double(std::get<double>(row[i]));
    }
    out << '\n';
  }
}

std::string ResultTable::csv() const {
  std::ostringstream out;
  write_csv(out);
  return out.str();
}

}  // namespace coco
