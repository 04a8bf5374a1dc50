#include "irtime/csv.hpp"

#include <fstream>
#include <sstream>

#include "irtime/common.hpp"

namespace irtime {

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

std::size_t CsvTable::require_column(const std::string& name) const {
    int i = column(name);
    if (i < 0)
        throw ValidationError(source + ": missing required column '" + name + "'");
    return static_cast<std::size_t>(i);
}

CsvTable parse_csv(std::string_view text, const std::string& source_name) {
    CsvTable table;
    table.source = source_name;

    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool record_has_content = false;
    std::size_t line = 1;
    std::size_t record_start_line = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
    };
    auto end_record = [&] {
        end_field();
        if (table.header.empty()) {
            table.header = std::move(record);
        } else {
            if (record.size() != table.header.size())
                throw ValidationError(source_name + ":" + std::to_string(record_start_line) +
                                      ": expected " + std::to_string(table.header.size()) +
                                      " fields, got " + std::to_string(record.size()));
            table.rows.push_back(std::move(record));
            table.line_numbers.push_back(record_start_line);
        }
        record.clear();
        record_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            record_has_content = true;
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            record_has_content = true;
            break;
        case ',':
            end_field();
            record_has_content = true;
            break;
        case '\r':
            break;
        case '\n':
            if (record_has_content || !record.empty() || !field.empty()) end_record();
            ++line;
            record_start_line = line;
            break;
        default:
            field += c;
            record_has_content = true;
            break;
        }
    }
    if (in_quotes)
        throw ValidationError(source_name + ":" + std::to_string(record_start_line) +
                              ": unterminated quoted field");
    if (record_has_content || !record.empty() || !field.empty()) end_record();

    if (table.header.empty())
        throw ValidationError(source_name + ": empty file, expected a header row");
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    return parse_csv(read_file(path), path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream out;
    out << in.rdbuf();
    if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
    return out.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "'");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failure on '" + path.string() + "'");
}

} // namespace irtime
