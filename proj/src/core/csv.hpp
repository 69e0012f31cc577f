#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace minv {

// Comma-separated output with a header row and '.' decimal separator.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header)
        : f_(path, std::ios::trunc) {
        require(f_.good(), Errc::io, "cannot open '" + path + "' for writing");
        row(header);
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) f_ << ',';
            f_ << cells[i];
        }
        f_ << '\n';
    }

    static std::string num(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return buf;
    }

    static std::string num(long long v) { return std::to_string(v); }
    static std::string num(std::size_t v) { return std::to_string(v); }
    static std::string num(int v) { return std::to_string(v); }

    void close() {
        f_.close();
        require(f_.good(), Errc::io, "csv write failed");
    }

private:
    std::ofstream f_;
};

} // namespace minv
