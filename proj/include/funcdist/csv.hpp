#pragma once

#include <string>
#include <vector>

namespace funcdist {

// RFC-4180 CSV with a mandatory header row. Fields containing comma, quote,
// CR or LF are quoted on output; quotes double inside quoted fields.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a header column; -1 when absent.
    int find(const std::string& name) const;
    // Same but throws Error(Validation) when absent.
    int require(const std::string& name, const std::string& context) const;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& context);

std::string csv_escape(const std::string& field);
std::string csv_join(const std::vector<std::string>& fields);
void write_csv(const std::string& path, const CsvTable& table);

}  // namespace funcdist
