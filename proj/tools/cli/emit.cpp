#include "cli/emit.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace pbftrel::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + '"';
}

std::string json_number(double v) { return std::isfinite(v) ? format_number(v) : "null"; }

std::string json_value(const Value& v) {
  struct Visitor {
    std::string operator()(double d) const { return json_number(d); }
    std::string operator()(long long i) const { return std::to_string(i); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return json_string(s); }
    std::string operator()(const std::vector<double>& xs) const {
      std::string out = "[";
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += json_number(xs[i]);
      }
      return out + ']';
    }
  };
  return std::visit(Visitor{}, v);
}

std::string csv_value(const Value& v) {
  struct Visitor {
    std::string operator()(double d) const { return format_number(d); }
    std::string operator()(long long i) const { return std::to_string(i); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(const std::vector<double>& xs) const {
      std::string out;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ';';
        out += format_number(xs[i]);
      }
      return out;
    }
  };
  return std::visit(Visitor{}, v);
}

void write_fields(std::ostream& os, const Record& record, bool& first) {
  for (const auto& [k, v] : record.fields) {
    os << (first ? "\n  " : ",\n  ") << json_string(k) << ": " << json_value(v);
    first = false;
  }
}

void write_comments(std::ostream& os, const Record& record) {
  for (const auto& [k, v] : record.fields) os << "# " << k << '=' << csv_value(v) << '\n';
}

void write_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
  os << '\n';
}

}  // namespace

void write_json(std::ostream& os, const Record& record) {
  os << '{';
  bool first = true;
  write_fields(os, record, first);
  os << "\n}\n";
}

void write_json(std::ostream& os, const Record& record, const Table& table) {
  os << '{';
  bool first = true;
  write_fields(os, record, first);
  os << (first ? "\n  " : ",\n  ") << "\"columns\": [";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << json_string(table.columns[i]);
  }
  os << "],\n  \"rows\": [";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    os << (r ? ",\n    [" : "\n    [");
    for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
      os << (c ? "," : "") << json_value(table.rows[r][c]);
    }
    os << ']';
  }
  os << (table.rows.empty() ? "]" : "\n  ]") << "\n}\n";
}

void write_csv(std::ostream& os, const Record& header, const Record& record) {
  write_comments(os, header);
  std::vector<std::string> keys, values;
  for (const auto& [k, v] : record.fields) {
    keys.push_back(k);
    values.push_back(csv_value(v));
  }
  write_row(os, keys);
  write_row(os, values);
}

void write_csv(std::ostream& os, const Record& header, const Table& table, const Record& trailer) {
  write_comments(os, header);
  write_row(os, table.columns);
  for (const auto& row : table.rows) {
    std::vector<std::string> cells;
    for (const auto& v : row) cells.push_back(csv_value(v));
    write_row(os, cells);
  }
  write_comments(os, trailer);
}

}  // namespace pbftrel::cli
