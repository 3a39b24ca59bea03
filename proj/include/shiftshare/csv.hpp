#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace shiftshare::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or -1.
  long column(std::string_view name) const;
};

// RFC-4180 style reader: comma separated, double-quoted fields, header row.
Table read(const std::filesystem::path& path);
void write(const std::filesystem::path& path, const Table& table);

// Shortest round-trip decimal representation.
std::string format_double(double value);

// Parses a full field as a double; NA/NaN/empty yield NaN. Returns false on garbage.
bool parse_double(std::string_view field, double& out);

}  // namespace shiftshare::csv
