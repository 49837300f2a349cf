#include "funcdist/csv.hpp"

#include <fstream>
#include <sstream>

#include "funcdist/error.hpp"

namespace funcdist {

int CsvTable::find(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

int CsvTable::require(const std::string& name, const std::string& context) const {
    int idx = find(name);
    if (idx < 0) fail_validation(context + ": required column '" + name + "' not found");
    return idx;
}

namespace {

// One pass over the whole text; handles quoted fields with embedded
// separators and newlines, and both LF and CRLF row endings.
std::vector<std::vector<std::string>> parse_records(const std::string& text,
                                                    const std::string& context) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        records.push_back(std::move(row));
        row.clear();
        row_started = false;
    };

    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                row_started = true;
                break;
            case ',':
                end_field();
                row_started = true;
                break;
            case '\r':
                break;
            case '\n':
                if (row_started || !field.empty() || !row.empty()) end_row();
                break;
            default:
                field.push_back(c);
                row_started = true;
                break;
        }
    }
    if (in_quotes) fail_validation(context + ": unterminated quoted field");
    if (row_started || !field.empty() || !row.empty()) end_row();
    return records;
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& context) {
    auto records = parse_records(text, context);
    if (records.empty()) fail_validation(context + ": missing header row");
    CsvTable t;
    t.header = std::move(records.front());
    size_t ncols = t.header.size();
    for (size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != ncols)
            fail_validation(context + ": row " + std::to_string(r) + " has " +
                            std::to_string(records[r].size()) + " fields, expected " +
                            std::to_string(ncols));
        t.rows.push_back(std::move(records[r]));
    }
    return t;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), path);
}

std::string csv_escape(const std::string& field) {
    bool needs_quotes = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string csv_join(const std::vector<std::string>& fields) {
    std::string line;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) line.push_back(',');
        line += csv_escape(fields[i]);
    }
    return line;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_io("cannot write '" + path + "'");
    out << csv_join(table.header) << "\n";
    for (const auto& row : table.rows) out << csv_join(row) << "\n";
    if (!out) fail_io("write failed for '" + path + "'");
}

}  // namespace funcdist
