#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emoeeg::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Comma separated, header row required, double-quoted fields may contain
// commas and "" escapes. Blank lines are skipped; a trailing '\r' is dropped.
// Ragged rows are rejected with ErrorCode::RaggedRow.
Table read(const std::filesystem::path& path);

std::vector<std::string> split_line(std::string_view line);

// Strict decimal parse of a whole cell (surrounding blanks allowed).
// Returns nullopt when the cell is not a number. "nan"/"inf" parse as
// non-finite values so callers can tell them apart from garbage.
std::optional<double> parse_number(std::string_view cell);

// Shortest decimal text that reads back to the identical double.
std::string format_number(double value);

std::string quote_if_needed(std::string_view field);

}  // namespace emoeeg::csv
