// Floating-point oracles that stay off the library's normal-equation path.
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "gradcode/matrix.hpp"

namespace testsupport {

// Squared distance of the all-one target from the span of the surviving
// columns, via modified Gram-Schmidt projection (a QR route, independent of
// the Gram/normal-equation route it cross-checks).
inline double ls_error_gram_schmidt(const gradcode::EncodingMatrix& g, std::span<const int> survivors) {
    const int k = g.rows();
    std::vector<std::vector<double>> basis;
    for (int j : survivors) {
        std::vector<double> col(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) col[static_cast<std::size_t>(i)] = g.at(i, j) ? 1.0 : 0.0;
        for (const auto& q : basis) {
            double dot = 0.0;
            for (int i = 0; i < k; ++i) dot += q[static_cast<std::size_t>(i)] * col[static_cast<std::size_t>(i)];
            for (int i = 0; i < k; ++i) col[static_cast<std::size_t>(i)] -= dot * q[static_cast<std::size_t>(i)];
        }
        double norm = 0.0;
        for (double v : col) norm += v * v;
        norm = std::sqrt(norm);
        if (norm > 1e-9) {
            for (double& v : col) v /= norm;
            basis.push_back(std::move(col));
        }
    }
    std::vector<double> residual(static_cast<std::size_t>(k), 1.0);
    for (const auto& q : basis) {
        double dot = 0.0;
        for (int i = 0; i < k; ++i) dot += q[static_cast<std::size_t>(i)];
        for (int i = 0; i < k; ++i) residual[static_cast<std::size_t>(i)] -= dot * q[static_cast<std::size_t>(i)];
    }
    double err = 0.0;
    for (double v : residual) err += v * v;
    return err;
}

// Direct residual evaluation ||G_U v - 1||^2 by explicit matrix-vector
// multiplication (no Gram shortcut).
inline double residual_error_direct(const gradcode::EncodingMatrix& g, std::span<const int> survivors,
                                    std::span<const double> v) {
    const int k = g.rows();
    double err = 0.0;
    for (int i = 0; i < k; ++i) {
        double row = -1.0;
        for (std::size_t idx = 0; idx < survivors.size(); ++idx)
            if (g.at(i, survivors[idx])) row += v[idx];
        err += row * row;
    }
    return err;
}

// Pairwise column intersection by a plain loop over rows.
inline int brute_intersection(const gradcode::EncodingMatrix& g, int a, int b) {
    int count = 0;
    for (int i = 0; i < g.rows(); ++i)
        if (g.at(i, a) && g.at(i, b)) ++count;
    return count;
}

}  // namespace testsupport
