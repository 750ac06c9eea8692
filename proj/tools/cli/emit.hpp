#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace pbftrel::cli {

using Value = std::variant<double, long long, bool, std::string, std::vector<double>>;

// 17 significant digits, '.' as decimal point regardless of locale. Infinities and NaN
// print as inf, -inf and nan.
std::string format_number(double v);

// Ordered key/value pairs; keys stay in insertion order in every format.
struct Record {
  std::vector<std::pair<std::string, Value>> fields;

  void add(std::string key, Value v) { fields.emplace_back(std::move(key), std::move(v)); }
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
};

// Flat JSON object. Non-finite numbers become null.
void write_json(std::ostream& os, const Record& record);
// `record` fields first, then "columns" and "rows" (array of arrays).
void write_json(std::ostream& os, const Record& record, const Table& table);

// Header of `record` as "# key=value" lines, then a header row and one data row.
void write_csv(std::ostream& os, const Record& header, const Record& record);
// Header comment lines, the table, then `trailer` as "# key=value" lines.
void write_csv(std::ostream& os, const Record& header, const Table& table,
               const Record& trailer = {});

}  // namespace pbftrel::cli
