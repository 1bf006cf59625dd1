#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gradcode/errors.hpp"
#include "gradcode/matrix.hpp"

namespace gradcode {

// Default cap on constructed matrix size (entries), configurable per call.
inline constexpr std::uint64_t kDefaultEntryCap = std::uint64_t{1} << 24;

/// Fractional repetition code: k/l diagonal all-one blocks of size l x r.
/// Worker j in block b computes every piece of block b and nothing else.
inline EncodingMatrix build_frc(int n, int k, int l, int r) {
    if (n < 1 || k < 1 || l < 1 || r < 1) throw DimensionMismatch("frc parameters must be positive");
    if (k % l != 0) throw DimensionMismatch("frc requires l to divide k");
    if (n % r != 0) throw DimensionMismatch("frc requires r to divide n");
    if (k / l != n / r) throw DimensionMismatch("frc requires k/l == n/r (block counts must agree)");
    return EncodingMatrix::build(k, n, [&](int i, int j) { return i / l == j / r; });
}

/// All-one k x n matrix; ones_matrix(k) is the column vector used to extend a
/// code by piece replication.
inline EncodingMatrix ones_matrix(int k, int n = 1) {
    return EncodingMatrix::build(k, n, [](int, int) { return true; });
}

struct CatalogEntry {
    std::string name;
    int modulus;                     // points = blocks = modulus
    std::vector<int> difference_set; // column j has ones at (d + j) mod modulus
    int lambda;
};

/// Symmetric designs generated from cyclic difference sets. Every pair of
/// distinct residues appears as a difference exactly lambda times, so any two
/// blocks (columns) intersect in exactly lambda points.
inline const std::vector<CatalogEntry>& bibd_catalog() {
    static const std::vector<CatalogEntry> catalog = {
        {"fano", 7, {1, 2, 4}, 1},
        {"biplane11", 11, {1, 3, 4, 5, 9}, 2},
        {"pg2_3", 13, {0, 1, 3, 9}, 1},
        {"pg2_4", 21, {3, 6, 7, 12, 14}, 1},
    };
    return catalog;
}

inline std::pair<EncodingMatrix, CodeParams> build_catalog_bibd(const std::string& name) {
    for (const CatalogEntry& e : bibd_catalog()) {
        if (e.name != name) continue;
        const int v = e.modulus;
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(v) * static_cast<std::size_t>(v), 0);
        for (int j = 0; j < v; ++j)
            for (int d : e.difference_set)
                bits[static_cast<std::size_t>((d + j) % v) * static_cast<std::size_t>(v) +
                     static_cast<std::size_t>(j)] = 1;
        EncodingMatrix m(v, v, std::move(bits));
        CodeParams p;
        p.n = v;
        p.k = v;
        p.l = static_cast<int>(e.difference_set.size());
        p.r = p.l;
        p.lambda = e.lambda;
        return {std::move(m), p};
    }
    throw UnknownDesign("unknown design name: " + name);
}

/// Kronecker product: entry ((i1,i2),(j1,j2)) = A(i1,j1) * B(i2,j2), with row
/// index i1*k2+i2 and column index j1*n2+j2.
inline EncodingMatrix kronecker(const EncodingMatrix& a, const EncodingMatrix& b,
                                std::uint64_t entry_cap = kDefaultEntryCap) {
    const std::uint64_t rows = static_cast<std::uint64_t>(a.rows()) * static_cast<std::uint64_t>(b.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(a.cols()) * static_cast<std::uint64_t>(b.cols());
    if (rows * cols > entry_cap)
        throw SizeOverflow("kronecker product would have " + std::to_string(rows) + "x" + std::to_string(cols) +
                           " entries, over the cap of " + std::to_string(entry_cap));
    const int k2 = b.rows();
    const int n2 = b.cols();
    return EncodingMatrix::build(static_cast<int>(rows), static_cast<int>(cols), [&](int i, int j) {
        return a.at(i / k2, j / n2) && b.at(i % k2, j % n2);
    });
}

}  // namespace gradcode
