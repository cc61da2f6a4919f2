#include "peerperf/csv.hpp"

#include <fstream>

#include "peerperf/errors.hpp"

namespace peerperf {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.emplace_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw SchemaError("missing column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);

    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (line_no == 1) {
            t.header = std::move(fields);
        } else {
            if (fields.size() != t.header.size()) {
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": expected " + std::to_string(t.header.size()) +
                                 " fields, got " + std::to_string(fields.size()));
            }
            t.rows.push_back(std::move(fields));
            t.line_numbers.push_back(line_no);
        }
    }
    if (t.header.empty()) throw ParseError(path + ": empty file");
    return t;
}

}  // namespace peerperf
