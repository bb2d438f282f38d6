#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace staug::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a header column, or -1.
    int column(std::string_view name) const;
};

// RFC 4180 style: comma separated, double-quote escaping, optional UTF-8 BOM.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);
void write(const std::filesystem::path& path, const Table& table);

} // namespace staug::csv
