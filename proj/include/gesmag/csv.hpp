#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gesmag/errors.hpp"

namespace gesmag {

struct Dataset {
    std::vector<std::string> names;
    Eigen::MatrixXd values;  // rows are observations
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t start = cell.find_first_not_of(' ');
        out.push_back(start == std::string::npos ? std::string() : cell.substr(start));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace detail

/// Header row of variable names, then one numeric row per observation. Numbers always use '.'.
inline Dataset parse_csv(std::istream& in) {
    Dataset ds;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty CSV input");
    ds.names = detail::split_csv_line(line);
    const std::size_t cols = ds.names.size();
    std::vector<double> flat;
    long rows = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != cols) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) + " fields");
        }
        for (const auto& c : cells) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
            if (ec != std::errc() || ptr != c.data() + c.size()) {
                throw ParseError("line " + std::to_string(line_no) + ": not a number: '" + c + "'");
            }
            flat.push_back(v);
        }
        ++rows;
    }
    ds.values.resize(rows, static_cast<Eigen::Index>(cols));
    for (long r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) ds.values(r, static_cast<Eigen::Index>(c)) = flat[r * cols + c];
    }
    return ds;
}

inline Dataset read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return parse_csv(in);
}

inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline void write_csv(std::ostream& out, const Dataset& ds) {
    for (std::size_t c = 0; c < ds.names.size(); ++c) out << (c ? "," : "") << ds.names[c];
    out << '\n';
    for (Eigen::Index r = 0; r < ds.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < ds.values.cols(); ++c) out << (c ? "," : "") << format_double(ds.values(r, c));
        out << '\n';
    }
}

inline void write_csv(const std::string& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    write_csv(out, ds);
}

/// Column names X0, X1, ... matching the vertex ids of graph files.
inline std::vector<std::string> default_names(int n) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back("X" + std::to_string(i));
    return v;
}

}  // namespace gesmag
