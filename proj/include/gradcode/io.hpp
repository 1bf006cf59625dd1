#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gradcode/errors.hpp"
#include "gradcode/matrix.hpp"

namespace gradcode {

// Matrix text format: first line "k n", then k lines of n characters in {0,1}.

inline std::string matrix_to_text(const EncodingMatrix& g) {
    std::string out = std::to_string(g.rows()) + " " + std::to_string(g.cols()) + "\n";
    for (int i = 0; i < g.rows(); ++i) {
        for (int j = 0; j < g.cols(); ++j) out.push_back(g.at(i, j) ? '1' : '0');
        out.push_back('\n');
    }
    return out;
}

inline EncodingMatrix matrix_from_text(const std::string& text) {
    std::istringstream in(text);
    int k = 0, n = 0;
    if (!(in >> k >> n) || k < 1 || n < 1) throw ConfigError("matrix file must start with \"k n\"");
    std::vector<std::uint8_t> bits;
    bits.reserve(static_cast<std::size_t>(k) * static_cast<std::size_t>(n));
    std::string line;
    std::getline(in, line);  // rest of the header line
    for (int i = 0; i < k; ++i) {
        if (!std::getline(in, line)) throw ConfigError("matrix file ended early at row " + std::to_string(i));
        if (static_cast<int>(line.size()) < n) throw ConfigError("matrix row " + std::to_string(i) + " is too short");
        for (int j = 0; j < n; ++j) {
            const char c = line[static_cast<std::size_t>(j)];
            if (c != '0' && c != '1') throw ConfigError("matrix entries must be 0 or 1");
            bits.push_back(c == '1' ? 1 : 0);
        }
    }
    return EncodingMatrix(k, n, std::move(bits));
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw ConfigError("failed writing " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Fixed float rendering so repeated runs emit byte-identical files.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string csv_join(const std::vector<std::string>& cells) {
    std::string row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) row.push_back(',');
        row += cells[i];
    }
    row.push_back('\n');
    return row;
}

}  // namespace gradcode
