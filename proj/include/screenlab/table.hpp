#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace screenlab {

// Numeric table with a fixed column order; NaN marks a missing entry.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  int index_of(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  double at(std::size_t row, const std::string& name) const;
};

// 12 significant digits, independent of the global locale.
std::string format_number(double v);
std::string to_csv(const Table& t);
void write_text(const std::filesystem::path& path, const std::string& text);

nlohmann::json number_json(double v);

}  // namespace screenlab
