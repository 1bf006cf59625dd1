#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gradcode/errors.hpp"

namespace gradcode {

/// Dense binary assignment of data pieces (rows) to workers (columns).
/// Immutable after construction. Entries are stored row-major, and each
/// column is additionally packed into 64-bit planes so pairwise column
/// intersections reduce to popcounts; intersection counting dominates both
/// validation and adversary search.
class EncodingMatrix {
public:
    EncodingMatrix(int pieces, int workers, std::vector<std::uint8_t> row_major)
        : k_(pieces), n_(workers), bits_(std::move(row_major)) {
        if (k_ < 1 || n_ < 1) throw DimensionMismatch("encoding matrix needs k >= 1 and n >= 1");
        if (bits_.size() != static_cast<std::size_t>(k_) * static_cast<std::size_t>(n_))
            throw DimensionMismatch("encoding matrix bit buffer has wrong size");
        for (std::uint8_t b : bits_)
            if (b > 1) throw DimensionMismatch("encoding matrix entries must be 0 or 1");
        build_caches();
    }

    template <typename EntryFn>
    static EncodingMatrix build(int pieces, int workers, EntryFn&& entry) {
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(pieces) * static_cast<std::size_t>(workers));
        for (int i = 0; i < pieces; ++i)
            for (int j = 0; j < workers; ++j)
                bits[static_cast<std::size_t>(i) * static_cast<std::size_t>(workers) + static_cast<std::size_t>(j)] =
                    entry(i, j) ? 1 : 0;
        return EncodingMatrix(pieces, workers, std::move(bits));
    }

    int rows() const { return k_; }
    int cols() const { return n_; }

    bool at(int i, int j) const {
        return bits_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)] != 0;
    }

    int column_weight(int j) const { return col_weights_[static_cast<std::size_t>(j)]; }

    int row_weight(int i) const {
        int w = 0;
        for (int j = 0; j < n_; ++j) w += at(i, j) ? 1 : 0;
        return w;
    }

    /// Number of pieces assigned to both workers a and b.
    int column_intersection(int a, int b) const {
        const std::uint64_t* wa = col_plane(a);
        const std::uint64_t* wb = col_plane(b);
        int count = 0;
        for (int w = 0; w < words_per_col_; ++w) count += std::popcount(wa[w] & wb[w]);
        return count;
    }

    bool operator==(const EncodingMatrix& other) const {
        return k_ == other.k_ && n_ == other.n_ && bits_ == other.bits_;
    }

private:
    void build_caches() {
        words_per_col_ = (k_ + 63) / 64;
        col_bits_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(words_per_col_), 0);
        col_weights_.assign(static_cast<std::size_t>(n_), 0);
        for (int i = 0; i < k_; ++i)
            for (int j = 0; j < n_; ++j)
                if (at(i, j)) {
                    col_bits_[static_cast<std::size_t>(j) * words_per_col_ + static_cast<std::size_t>(i / 64)] |=
                        std::uint64_t{1} << (i % 64);
                    ++col_weights_[static_cast<std::size_t>(j)];
                }
    }

    const std::uint64_t* col_plane(int j) const {
        return col_bits_.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(words_per_col_);
    }

    int k_ = 0;
    int n_ = 0;
    int words_per_col_ = 0;
    std::vector<std::uint8_t> bits_;
    std::vector<std::uint64_t> col_bits_;
    std::vector<int> col_weights_;
};

/// (n, k, l, r) gradient-code parameters; lambda present for codes with a
/// uniform pairwise worker intersection count.
struct CodeParams {
    int n = 0;
    int k = 0;
    int l = 0;
    int r = 0;
    std::optional<int> lambda;

    double fractional_redundancy() const { return static_cast<double>(r) / static_cast<double>(n); }
};

struct ValidationReport {
    int n = 0;
    int k = 0;
    std::vector<int> column_weight_set;           // sorted, unique
    std::vector<int> row_weight_set;              // sorted, unique
    std::map<int, long> intersection_counts;      // intersection value -> pair count
    std::optional<int> uniform_column_weight;     // l, when every column agrees
    std::optional<int> uniform_row_weight;        // r
    std::optional<int> uniform_lambda;            // lambda, when every pair agrees

    bool is_uniform_gc() const { return uniform_column_weight && uniform_row_weight; }
    bool is_lambda_uniform_gc() const { return is_uniform_gc() && uniform_lambda.has_value(); }

    CodeParams params() const {
        if (!is_uniform_gc()) throw InvalidParams("code has non-uniform weights; no (n,k,l,r) parameters");
        CodeParams p;
        p.n = n;
        p.k = k;
        p.l = *uniform_column_weight;
        p.r = *uniform_row_weight;
        p.lambda = uniform_lambda;
        return p;
    }
};

inline ValidationReport validate(const EncodingMatrix& g) {
    ValidationReport rep;
    rep.n = g.cols();
    rep.k = g.rows();

    std::vector<int> colw(static_cast<std::size_t>(g.cols()));
    for (int j = 0; j < g.cols(); ++j) colw[static_cast<std::size_t>(j)] = g.column_weight(j);
    std::vector<int> roww(static_cast<std::size_t>(g.rows()));
    for (int i = 0; i < g.rows(); ++i) roww[static_cast<std::size_t>(i)] = g.row_weight(i);

    auto unique_sorted = [](std::vector<int> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    rep.column_weight_set = unique_sorted(colw);
    rep.row_weight_set = unique_sorted(roww);
    if (rep.column_weight_set.size() == 1) rep.uniform_column_weight = rep.column_weight_set.front();
    if (rep.row_weight_set.size() == 1) rep.uniform_row_weight = rep.row_weight_set.front();

    for (int a = 0; a < g.cols(); ++a)
        for (int b = a + 1; b < g.cols(); ++b) ++rep.intersection_counts[g.column_intersection(a, b)];
    if (rep.intersection_counts.size() == 1 && g.cols() > 1)
        rep.uniform_lambda = rep.intersection_counts.begin()->first;
    return rep;
}

}  // namespace gradcode
