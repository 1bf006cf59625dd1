#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "gradcode/errors.hpp"
#include "gradcode/matrix.hpp"
#include "gradcode/tolerances.hpp"

namespace gradcode {

/// A set of failed workers together with its complement U of survivors.
struct StragglerScenario {
    int n = 0;
    std::vector<int> stragglers;  // sorted ascending, unique

    static StragglerScenario make(int n, std::vector<int> stragglers) {
        std::sort(stragglers.begin(), stragglers.end());
        stragglers.erase(std::unique(stragglers.begin(), stragglers.end()), stragglers.end());
        for (int w : stragglers)
            if (w < 0 || w >= n) throw InvalidParams("straggler index out of range");
        StragglerScenario sc;
        sc.n = n;
        sc.stragglers = std::move(stragglers);
        return sc;
    }

    int s() const { return static_cast<int>(stragglers.size()); }

    std::vector<int> survivors() const {
        std::vector<int> u;
        u.reserve(static_cast<std::size_t>(n - s()));
        std::size_t next = 0;
        for (int j = 0; j < n; ++j) {
            if (next < stragglers.size() && stragglers[next] == j) {
                ++next;
            } else {
                u.push_back(j);
            }
        }
        return u;
    }
};

namespace detail {

// Solves M x = rhs for a symmetric positive semidefinite m x m matrix via
// LDL^T. On a non-positive pivot, or a residual above residual_tol against
// the unmodified system, the solve restarts with a diagonal jitter (ridge),
// which converges to the minimum-norm least-squares solution as the jitter
// vanishes; the achieved error is unaffected to second order.
inline std::vector<double> solve_psd(const std::vector<double>& m_in, const std::vector<double>& rhs,
                                     double residual_tol) {
    const std::size_t m = rhs.size();
    if (m == 0) return {};
    double max_diag = 0.0;
    for (std::size_t i = 0; i < m; ++i) max_diag = std::max(max_diag, std::fabs(m_in[i * m + i]));
    if (max_diag == 0.0) max_diag = 1.0;

    for (int attempt = 0; attempt < 4; ++attempt) {
        const double jitter = attempt == 0 ? 0.0 : tol().jitter_scale * max_diag * std::pow(10.0, attempt - 1);
        std::vector<double> a = m_in;
        for (std::size_t i = 0; i < m; ++i) a[i * m + i] += jitter;

        // In-place LDL^T, lower triangle holds L, diag holds D.
        bool ok = true;
        for (std::size_t j = 0; j < m && ok; ++j) {
            double d = a[j * m + j];
            for (std::size_t c = 0; c < j; ++c) d -= a[j * m + c] * a[j * m + c] * a[c * m + c];
            if (d <= max_diag * 1e-14) {
                ok = false;
                break;
            }
            a[j * m + j] = d;
            for (std::size_t i = j + 1; i < m; ++i) {
                double v = a[i * m + j];
                for (std::size_t c = 0; c < j; ++c) v -= a[i * m + c] * a[j * m + c] * a[c * m + c];
                a[i * m + j] = v / d;
            }
        }
        if (!ok) continue;

        std::vector<double> x = rhs;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t c = 0; c < i; ++c) x[i] -= a[i * m + c] * x[c];
        for (std::size_t i = 0; i < m; ++i) x[i] /= a[i * m + i];
        for (std::size_t i = m; i-- > 0;)
            for (std::size_t c = i + 1; c < m; ++c) x[i] -= a[c * m + i] * x[c];

        double worst = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double r = -rhs[i];
            for (std::size_t c = 0; c < m; ++c) r += m_in[i * m + c] * x[c];
            worst = std::max(worst, std::fabs(r));
        }
        if (worst <= residual_tol) return x;
    }
    throw NumericalFailure("normal equations unsolved within tolerance, even with diagonal jitter");
}

}  // namespace detail

/// Precomputed Gram machinery for repeated per-subset least-squares solves on
/// a fixed code. Thread-safe for concurrent calls after construction.
class SubsetErrorEvaluator {
public:
    explicit SubsetErrorEvaluator(const EncodingMatrix& g) : n_(g.cols()), k_(g.rows()) {
        gram_.resize(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_));
        weights_.resize(static_cast<std::size_t>(n_));
        for (int a = 0; a < n_; ++a) {
            weights_[static_cast<std::size_t>(a)] = static_cast<double>(g.column_weight(a));
            for (int b = a; b < n_; ++b) {
                const double v = static_cast<double>(g.column_intersection(a, b));
                gram_[static_cast<std::size_t>(a) * n_ + b] = v;
                gram_[static_cast<std::size_t>(b) * n_ + a] = v;
            }
        }
    }

    int workers() const { return n_; }
    int pieces() const { return k_; }

    /// Least-squares optimal decoding weights for the surviving columns.
    std::vector<double> solve(std::span<const int> survivors) const {
        const std::size_t m = survivors.size();
        std::vector<double> sub(m * m);
        std::vector<double> rhs(m);
        gather(survivors, sub, rhs);
        return detail::solve_psd(sub, rhs, tol().normal_eq_residual_per_piece * k_);
    }

    /// Unnormalized squared error of the least-squares optimum:
    /// k - 2 v^T (G_U^T 1) + v^T (G_U^T G_U) v, clamped at zero.
    double ls_error(std::span<const int> survivors) const {
        const std::size_t m = survivors.size();
        if (m == 0) return static_cast<double>(k_);
        std::vector<double> sub(m * m);
        std::vector<double> rhs(m);
        gather(survivors, sub, rhs);
        const std::vector<double> v = detail::solve_psd(sub, rhs, tol().normal_eq_residual_per_piece * k_);
        return quad_error(sub, rhs, v);
    }

    /// Unnormalized squared error of an arbitrary decoding vector.
    double error_with(std::span<const int> survivors, std::span<const double> v) const {
        const std::size_t m = survivors.size();
        if (v.size() != m) throw InvalidParams("decoding vector length must match survivor count");
        if (m == 0) return static_cast<double>(k_);
        std::vector<double> sub(m * m);
        std::vector<double> rhs(m);
        gather(survivors, sub, rhs);
        return quad_error(sub, rhs, v);
    }

    /// 1^T G_U^T G_U 1: total pairwise-intersection mass of the surviving columns.
    double gram_ones_quadratic(std::span<const int> survivors) const {
        double total = 0.0;
        for (int a : survivors)
            for (int b : survivors) total += gram_[static_cast<std::size_t>(a) * n_ + b];
        return total;
    }

private:
    void gather(std::span<const int> survivors, std::vector<double>& sub, std::vector<double>& rhs) const {
        const std::size_t m = survivors.size();
        for (std::size_t i = 0; i < m; ++i) {
            rhs[i] = weights_[static_cast<std::size_t>(survivors[i])];
            const double* grow = gram_.data() + static_cast<std::size_t>(survivors[i]) * n_;
            for (std::size_t j = 0; j < m; ++j) sub[i * m + j] = grow[survivors[j]];
        }
    }

    double quad_error(const std::vector<double>& sub, const std::vector<double>& rhs,
                      std::span<const double> v) const {
        const std::size_t m = rhs.size();
        double err = static_cast<double>(k_);
        for (std::size_t i = 0; i < m; ++i) {
            err -= 2.0 * v[i] * rhs[i];
            double row = 0.0;
            for (std::size_t j = 0; j < m; ++j) row += sub[i * m + j] * v[j];
            err += v[i] * row;
        }
        if (err < 0.0) {
            if (err < tol().error_clamp * k_) throw NumericalFailure("squared error came out negative: " + std::to_string(err));
            err = 0.0;
        }
        return err;
    }

    int n_;
    int k_;
    std::vector<double> gram_;
    std::vector<double> weights_;
};

/// Least-squares optimal decoding vector for the surviving columns of g.
inline std::vector<double> optimal_decoding(const EncodingMatrix& g, std::span<const int> survivors) {
    if (survivors.empty()) throw InvalidParams("optimal_decoding needs a nonempty survivor set");
    return SubsetErrorEvaluator(g).solve(survivors);
}

/// Constant optimal decoding vector of a lambda-uniform code with l > lambda:
/// every survivor is weighted l / (l + lambda (n-s-1)).
inline std::vector<double> closed_form_decoding(int l, int lambda, int n, int s) {
    if (l <= lambda || lambda < 0) throw InvalidParams("closed_form_decoding needs l > lambda >= 0");
    if (s < 0 || s >= n) throw InvalidParams("closed_form_decoding needs 0 <= s < n");
    const int surv = n - s;
    const double value = static_cast<double>(l) / (l + static_cast<double>(lambda) * (surv - 1));
    return std::vector<double>(static_cast<std::size_t>(surv), value);
}

/// Unnormalized squared error k - 2 v^T G_U^T 1 + v^T G_U^T G_U v.
inline double squared_error(const EncodingMatrix& g, std::span<const int> survivors, std::span<const double> v) {
    return SubsetErrorEvaluator(g).error_with(survivors, v);
}

/// Constant decoding vector a* 1 for a product of two lambda-uniform codes,
/// a* = l1 l2 / (d + (n1 n2 - s) lambda1 lambda2).
inline std::vector<double> kron_constant_decoder(const CodeParams& p1, const CodeParams& p2, int s) {
    if (!p1.lambda || !p2.lambda) throw InvalidParams("kron_constant_decoder needs lambda-uniform factors");
    if (p1.l < *p1.lambda || p2.l < *p2.lambda) throw InvalidParams("kron_constant_decoder needs l >= lambda");
    const long long nn = static_cast<long long>(p1.n) * p2.n;
    if (s < 0 || s >= nn) throw InvalidParams("kron_constant_decoder needs 0 <= s < n1*n2");
    const long long surv = nn - s;
    const long long l1 = p1.l, l2 = p2.l, m1 = *p1.lambda, m2 = *p2.lambda;
    const long long d = (l1 - m1) * (l2 - m2) + static_cast<long long>(p2.n) * (l1 * m2 - m1 * m2) +
                        static_cast<long long>(p1.n) * (m1 * l2 - m1 * m2);
    const double a = static_cast<double>(l1 * l2) / (static_cast<double>(d) + static_cast<double>(surv) * m1 * m2);
    return std::vector<double>(static_cast<std::size_t>(surv), a);
}

}  // namespace gradcode
