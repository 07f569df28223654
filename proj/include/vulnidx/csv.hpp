#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vulnidx::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or nullopt.
  std::optional<std::size_t> find(std::string_view name) const;
};

// RFC 4180 subset: quoted fields with "" escapes, CRLF or LF line endings,
// optional UTF-8 BOM. Every row must have the header's field count.
Table parse(std::string_view text, const std::string& source = "<memory>");
Table read(const std::filesystem::path& path);

std::string quote_if_needed(std::string_view field);
void write_row(std::ostream& os, const std::vector<std::string>& fields);
void write(const std::filesystem::path& path, const Table& table);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Parses a finite double; nullopt for empty / "NA" (the missing tokens).
/// Throws Error(malformed_input) on anything else that is not a finite number.
std::optional<double> parse_cell(std::string_view cell, const std::string& context);

bool is_missing_token(std::string_view cell) noexcept;

}  // namespace vulnidx::csv
