#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace grb {

// Minimal CSV table with atomic (temp-file-and-rename) writes and
// 17-significant-digit float formatting for lossless round trips.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns);

    void add_row(std::vector<std::string> cells);
    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

    std::string to_string() const;
    void write(const std::filesystem::path& path) const;

    static std::string format(double value);
    static std::string format(int value);

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

// FNV-1a over a byte string, rendered as 16 hex characters.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace grb
