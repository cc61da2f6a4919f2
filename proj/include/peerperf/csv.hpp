#pragma once

#include <string>
#include <vector>

namespace peerperf {

// Minimal CSV support: UTF-8, comma-separated, header row, no quoting.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line per row

    // Column index or throws SchemaError naming the column.
    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace peerperf
