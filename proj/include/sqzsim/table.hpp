// CSV output tables: UTF-8, LF line endings, '.' decimal separator.
#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace sqzsim {

/// Shortest decimal representation that parses back to the same double.
inline std::string format_number(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) {
        throw std::runtime_error("format_number: conversion failed");
    }
    return {buf, res.ptr};
}

inline std::string format_number(std::int64_t v) { return std::to_string(v); }

class OutputTable {
public:
    OutputTable() = default;
    explicit OutputTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> row)
    {
        if (row.size() != header_.size()) {
            throw std::invalid_argument("OutputTable: row has " + std::to_string(row.size()) + " cells, header has " +
                                        std::to_string(header_.size()));
        }
        rows_.push_back(std::move(row));
    }

    void add_row(std::initializer_list<double> values)
    {
        std::vector<std::string> row;
        row.reserve(values.size());
        for (double v : values) {
            row.push_back(format_number(v));
        }
        add_row(std::move(row));
    }

    [[nodiscard]] const std::vector<std::string>& header() const noexcept { return header_; }
    [[nodiscard]] const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

    [[nodiscard]] std::string to_csv() const
    {
        std::ostringstream out;
        write_line(out, header_);
        for (const auto& row : rows_) {
            write_line(out, row);
        }
        return out.str();
    }

    void write(const std::filesystem::path& path) const
    {
        std::ofstream file(path, std::ios::binary | std::ios::trunc);
        if (!file) {
            throw std::runtime_error("cannot open " + path.string() + " for writing");
        }
        file << to_csv();
        file.flush();
        if (!file) {
            throw std::runtime_error("write to " + path.string() + " failed");
        }
    }

private:
    static void write_line(std::ostringstream& out, const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i != 0) {
                out << ',';
            }
            out << cells[i];
        }
        out << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace sqzsim
