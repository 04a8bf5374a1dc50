#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace irtime {

// Parsed CSV with a mandatory header row. Quoted fields (RFC 4180 style,
// "" escaping) and CRLF line endings are accepted.
struct CsvTable {
    std::string source;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers; // 1-based source line per row

    // Column index of `name`, or -1.
    int column(const std::string& name) const;

    // As column(), but throws ValidationError naming the file.
    std::size_t require_column(const std::string& name) const;
};

CsvTable parse_csv(std::string_view text, const std::string& source_name);
CsvTable read_csv(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

} // namespace irtime
