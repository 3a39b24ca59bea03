#include "shiftshare/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "shiftshare/errors.hpp"

namespace shiftshare::csv {

long Table::column(std::string_view name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return static_cast<long>(c);
  }
  return -1;
}

namespace {

std::vector<std::string> split_record(std::istream& in, bool& ok) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  char ch;
  while (in.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      break;
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  ok = any;
  if (any) fields.push_back(std::move(field));
  return fields;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace

Table read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  Table table;
  bool ok = false;
  table.header = split_record(in, ok);
  if (!ok) throw Error(Errc::EmptyPanel, path.string() + " has no header row");
  // strip UTF-8 BOM
  if (!table.header.empty() && table.header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    table.header[0] = table.header[0].substr(3);
  }
  while (true) {
    auto rec = split_record(in, ok);
    if (!ok) break;
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != table.header.size()) {
      throw Error(Errc::InvalidPanel, path.string() + ": row " + std::to_string(table.rows.size() + 1) +
                                          " has " + std::to_string(rec.size()) + " fields, expected " +
                                          std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(rec));
  }
  return table;
}

void write(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  auto emit = [&](const std::vector<std::string>& rec) {
    for (std::size_t c = 0; c < rec.size(); ++c) {
      if (c) out << ',';
      out << quote_if_needed(rec[c]);
    }
    out << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "NaN";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view field, double& out) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
  if (field.empty() || field == "NA" || field == "NaN" || field == "nan" || field == ".") {
    out = std::numeric_limits<double>::quiet_NaN();
    return true;
  }
  if (field.front() == '+') field.remove_prefix(1);
  auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  return res.ec == std::errc() && res.ptr == field.data() + field.size();
}

}  // namespace shiftshare::csv
