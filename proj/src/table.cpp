#include "screenlab/table.hpp"

#include <cmath>
#include <fstream>
#include <locale>
#include <sstream>

#include "screenlab/errors.hpp"

namespace screenlab {

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw InternalError("Table: row width does not match header");
  rows.push_back(std::move(row));
}

int Table::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  throw DomainError("Table: no column named " + name);
}

std::vector<double> Table::column(const std::string& name) const {
  const int j = index_of(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

double Table::at(std::size_t row, const std::string& name) const { return rows.at(row)[index_of(name)]; }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(12);
  os << (v == 0 ? 0.0 : v);  // no "-0"
  return os.str();
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += t.columns[i];
  }
  out += '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += format_number(r[i]);
    }
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

nlohmann::json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

}  // namespace screenlab
