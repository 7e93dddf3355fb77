#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace coco {

struct Column {
  std::string name;
  std::string unit;  ///< "1" for dimensionless
};

using Cell = std::variant<double, std::string>;

/// Rectangular result table with '#'-prefixed provenance comments; the CSV
/// serialization is a pure function of the contents.
class ResultTable {
 public:
  explicit ResultTable(std::vector<Column> columns) : columns_(std::move(columns)) {}

  void add_provenance(std::string line) { provenance_.push_back(std::move(line)); }
  void append(std::vector<Cell> row);

  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  const std::vector<std::string>& provenance() const { return provenance_; }
  int column_index(std::string_view name) const;  ///< -1 when missing

  double number(std::size_t row, int col) const;
  std::string text(std::size_t row, int col) const;

  void write_csv(std::ostream& out) const;
  std::string csv() const;

 private:
  std::vector<Column> columns_;
  std::vector<std::vector<Cell>> rows_;
  std::vector<std::string> provenance_;
};

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace coco
