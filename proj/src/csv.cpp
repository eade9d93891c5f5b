#include "grb/csv.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include "grb/errors.hpp"

namespace grb {

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw InvalidInputError("csv: no columns");
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) {
        throw InvalidInputError("csv: row width does not match header");
    }
    rows_.push_back(std::move(cells));
}

std::string CsvTable::to_string() const {
    std::string out;
    for (size_t i = 0; i < columns_.size(); ++i) {
        if (i) out += ',';
        out += columns_[i];
    }
    out += '\n';
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw InvalidInputError("csv: cannot open " + tmp.string());
        out << to_string();
        if (!out) throw InvalidInputError("csv: short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string CsvTable::format(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string CsvTable::format(int value) { return std::to_string(value); }

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace grb
