#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "gradcode/decoding.hpp"
#include "gradcode/errors.hpp"
#include "gradcode/matrix.hpp"
#include "gradcode/rng.hpp"
#include "gradcode/tolerances.hpp"

namespace gradcode {

/// Structured probability law over binary rows of length n: the all-zero row
/// has mass alpha, the all-one row gamma, and each of the 2^n - 2 non-constant
/// rows the common mass beta. Matches a target code with expected column
/// weight l and expected pairwise intersection count lambda on k pieces.
struct RowDistribution {
    int n = 0;
    int k = 0;
    int l = 0;
    int lambda = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

/// Constraint matrix of the row-distribution linear system, rows packed into
/// 64-bit words. Row layout: the total-probability row, then one row per
/// variable (columns t with bit v set), then one row per variable pair (i, j)
/// in lexicographic order (columns t with bits i and j set). Column t
/// corresponds to the binary expansion of t. These rows are exactly the
/// degree <= 2 monomial evaluations, i.e. a generator matrix of the order-2
/// Reed-Muller code of length 2^n.
struct Rm2Matrix {
    int n = 0;
    int rows = 0;
    std::uint64_t cols = 0;
    int words_per_row = 0;
    std::vector<std::uint64_t> words;

    bool at(int row, std::uint64_t col) const {
        return (words[static_cast<std::size_t>(row) * words_per_row + static_cast<std::size_t>(col / 64)] >>
                (col % 64)) & 1u;
    }
};

inline Rm2Matrix rm2_generator(int n, int cap = 20) {
    if (n < 1 || n > cap)
        throw CapExceeded("rm2_generator supports 1 <= n <= " + std::to_string(cap) + ", got n = " + std::to_string(n),
                          static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(cap));
    Rm2Matrix m;
    m.n = n;
    m.cols = std::uint64_t{1} << n;
    m.rows = 1 + n + n * (n - 1) / 2;
    m.words_per_row = static_cast<int>((m.cols + 63) / 64);
    m.words.assign(static_cast<std::size_t>(m.rows) * m.words_per_row, 0);

    auto set_bit = [&](int row, std::uint64_t col) {
        m.words[static_cast<std::size_t>(row) * m.words_per_row + static_cast<std::size_t>(col / 64)] |=
            std::uint64_t{1} << (col % 64);
    };
    for (std::uint64_t t = 0; t < m.cols; ++t) {
        set_bit(0, t);
        int row = 1;
        for (int v = 0; v < n; ++v, ++row)
            if ((t >> v) & 1u) set_bit(row, t);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++row)
                if (((t >> i) & 1u) && ((t >> j) & 1u)) set_bit(row, t);
    }
    return m;
}

/// Right-hand side matching rm2_generator's row order: 1, then n copies of
/// l/k, then C(n,2) copies of lambda/k.
inline std::vector<double> rm2_rhs(int n, double l_over_k, double lambda_over_k) {
    std::vector<double> b;
    b.reserve(static_cast<std::size_t>(1 + n + n * (n - 1) / 2));
    b.push_back(1.0);
    for (int i = 0; i < n; ++i) b.push_back(l_over_k);
    for (int i = 0; i < n * (n - 1) / 2; ++i) b.push_back(lambda_over_k);
    return b;
}

/// Real-arithmetic row rank with partial pivoting. Meant for desk-scale n.
inline int rm2_rank(const Rm2Matrix& m) {
    const std::size_t rows = static_cast<std::size_t>(m.rows);
    const std::size_t cols = static_cast<std::size_t>(m.cols);
    std::vector<std::vector<double>> a(rows, std::vector<double>(cols));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::uint64_t c = 0; c < m.cols; ++c) a[r][static_cast<std::size_t>(c)] = m.at(static_cast<int>(r), c) ? 1.0 : 0.0;

    int rank = 0;
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols && row < rows; ++col) {
        std::size_t pivot = row;
        for (std::size_t r = row + 1; r < rows; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        if (std::fabs(a[pivot][col]) <= tol().rank_pivot) continue;
        std::swap(a[pivot], a[row]);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == row || a[r][col] == 0.0) continue;
            const double f = a[r][col] / a[row][col];
            for (std::size_t c = col; c < cols; ++c) a[r][c] -= f * a[row][c];
        }
        ++row;
        ++rank;
    }
    return rank;
}

/// Closed-form structured solution, no feasibility check. solve_distribution
/// is the guarded entry point.
inline RowDistribution closed_form_row_distribution(int n, int k, int l, int lambda) {
    const double pow_nm2 = std::ldexp(1.0, n - 2);  // 2^(n-2)
    RowDistribution d;
    d.n = n;
    d.k = k;
    d.l = l;
    d.lambda = lambda;
    d.beta = (l - lambda) / (k * pow_nm2);
    d.gamma = (2.0 * lambda - l + (l - lambda) / pow_nm2) / k;
    d.alpha = 1.0 + (2.0 * lambda - 3.0 * l) / k + (l - lambda) / (k * pow_nm2);
    return d;
}

/// Solves for (alpha, beta, gamma) and verifies the non-negativity conditions
/// n >= l >= lambda, 2 lambda >= l, k >= 3l - 2 lambda.
inline RowDistribution solve_distribution(int n, int k, int l, int lambda) {
    if (n < 1 || k < 1) throw InvalidParams("solve_distribution needs n >= 1 and k >= 1");
    if (!(n >= l)) throw Infeasible("n >= l");
    if (!(l >= lambda)) throw Infeasible("l >= lambda");
    if (!(lambda >= 0)) throw Infeasible("lambda >= 0");
    if (!(2 * lambda >= l)) throw Infeasible("2*lambda >= l");
    if (!(k >= 3 * l - 2 * lambda)) throw Infeasible("k >= 3l - 2*lambda");
    RowDistribution d = closed_form_row_distribution(n, k, l, lambda);
    if (d.alpha < 0.0 || d.beta < 0.0 || d.gamma < 0.0)
        throw Infeasible("non-negative closed-form solution");
    return d;
}

struct SystemResidual {
    double max_residual = 0.0;
    double total_row = 0.0;         // residual of the probability-mass row
    double marginal_rows_max = 0.0; // worst residual among the l/k rows
    double pair_rows_max = 0.0;     // worst residual among the lambda/k rows
    bool reduced_only = false;      // true when only the three reduced equations were evaluated
};

/// Residuals of A p - b for the expanded length-2^n vector p (n <= 14), or of
/// the three reduced equations for larger n.
inline SystemResidual verify_system(const RowDistribution& d) {
    SystemResidual res;
    const double lk = static_cast<double>(d.l) / d.k;
    const double mk = static_cast<double>(d.lambda) / d.k;
    if (d.n > 14) {
        res.reduced_only = true;
        const double two_n = std::ldexp(1.0, d.n);
        res.total_row = std::fabs(d.alpha + d.beta * (two_n - 2.0) + d.gamma - 1.0);
        res.marginal_rows_max = std::fabs(d.beta * (std::ldexp(1.0, d.n - 1) - 1.0) + d.gamma - lk);
        res.pair_rows_max = std::fabs(d.beta * (std::ldexp(1.0, d.n - 2) - 1.0) + d.gamma - mk);
        res.max_residual = std::max({res.total_row, res.marginal_rows_max, res.pair_rows_max});
        return res;
    }

    const Rm2Matrix a = rm2_generator(d.n);
    const std::vector<double> b = rm2_rhs(d.n, lk, mk);
    const std::uint64_t last = a.cols - 1;
    for (int row = 0; row < a.rows; ++row) {
        double dot = 0.0;
        for (std::uint64_t t = 0; t < a.cols; ++t) {
            if (!a.at(row, t)) continue;
            dot += t == 0 ? d.alpha : (t == last ? d.gamma : d.beta);
        }
        const double r = std::fabs(dot - b[static_cast<std::size_t>(row)]);
        if (row == 0)
            res.total_row = r;
        else if (row <= d.n)
            res.marginal_rows_max = std::max(res.marginal_rows_max, r);
        else
            res.pair_rows_max = std::max(res.pair_rows_max, r);
        res.max_residual = std::max(res.max_residual, r);
    }
    return res;
}

/// One row drawn from the structured law: all-zero with mass alpha, all-one
/// with mass gamma, otherwise a uniform non-constant row (rejection sampling,
/// expected < 1.1 retries for n >= 3).
inline std::vector<std::uint8_t> sample_row(const RowDistribution& d, Pcg32& rng) {
    std::vector<std::uint8_t> row(static_cast<std::size_t>(d.n), 0);
    const double u = rng.next_double();
    if (u < d.alpha) return row;
    if (u < d.alpha + d.gamma) {
        std::fill(row.begin(), row.end(), std::uint8_t{1});
        return row;
    }
    for (;;) {
        int ones = 0;
        for (int v = 0; v < d.n; ++v) {
            row[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(rng.next() & 1u);
            ones += row[static_cast<std::size_t>(v)];
        }
        if (ones != 0 && ones != d.n) return row;
    }
}

/// k i.i.d. rows from the structured law. Bitwise reproducible per seed.
inline EncodingMatrix sample_code(const RowDistribution& d, int k, std::uint64_t seed) {
    if (k != d.k) throw InvalidParams("sample_code requires k to match the distribution's k");
    std::vector<std::uint8_t> bits;
    bits.reserve(static_cast<std::size_t>(k) * static_cast<std::size_t>(d.n));
    Pcg32 rng(seed, 0);
    for (int i = 0; i < k; ++i) {
        std::vector<std::uint8_t> row = sample_row(d, rng);
        bits.insert(bits.end(), row.begin(), row.end());
    }
    return EncodingMatrix(k, d.n, std::move(bits));
}

enum class McDecoder { optimal, bibd_constant };

struct McEstimate {
    double mean = 0.0;
    double sem = 0.0;  // standard error of the mean
    long trials = 0;
};

/// Monte-Carlo estimate of the expected normalized error with the survivors
/// fixed to the first n-s workers (the law is exchangeable over columns).
/// Trial t samples its matrix from stream t, so both decoders see identical
/// realizations for a common seed and the per-trial errors are independent of
/// how trials are scheduled; the final reduction runs in trial order.
inline McEstimate expected_error_mc(const RowDistribution& d, int k, int s, long trials, std::uint64_t seed,
                                    McDecoder decoder) {
    if (s < 0 || s > d.n) throw InvalidParams("expected_error_mc needs 0 <= s <= n");
    if (trials < 1) throw InvalidParams("expected_error_mc needs trials >= 1");
    if (k != d.k) throw InvalidParams("expected_error_mc requires k to match the distribution's k");

    const int surv_count = d.n - s;
    std::vector<int> survivors(static_cast<std::size_t>(surv_count));
    for (int j = 0; j < surv_count; ++j) survivors[static_cast<std::size_t>(j)] = j;

    std::vector<double> constant;
    if (decoder == McDecoder::bibd_constant && surv_count > 0) {
        const double v = static_cast<double>(d.l) / (d.l + static_cast<double>(d.lambda) * (surv_count - 1));
        constant.assign(static_cast<std::size_t>(surv_count), v);
    }

    std::vector<double> errors(static_cast<std::size_t>(trials));
    auto run_trial = [&](long t) {
        Pcg32 rng(seed, static_cast<std::uint64_t>(t));
        std::vector<std::uint8_t> bits;
        bits.reserve(static_cast<std::size_t>(k) * static_cast<std::size_t>(d.n));
        for (int i = 0; i < k; ++i) {
            std::vector<std::uint8_t> row = sample_row(d, rng);
            bits.insert(bits.end(), row.begin(), row.end());
        }
        EncodingMatrix g(k, d.n, std::move(bits));
        SubsetErrorEvaluator eval(g);
        errors[static_cast<std::size_t>(t)] =
            (surv_count == 0 ? static_cast<double>(k)
             : decoder == McDecoder::optimal ? eval.ls_error(survivors)
                                             : eval.error_with(survivors, constant)) /
            k;
    };

    unsigned threads = std::thread::hardware_concurrency();
    if (threads == 0) threads = 1;
    if (static_cast<long>(threads) > trials / 64) threads = static_cast<unsigned>(std::max<long>(1, trials / 64));
    if (threads <= 1) {
        for (long t = 0; t < trials; ++t) run_trial(t);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) {
            const long begin = trials * static_cast<long>(w) / threads;
            const long end = trials * (static_cast<long>(w) + 1) / threads;
            pool.emplace_back([&, begin, end] {
                for (long t = begin; t < end; ++t) run_trial(t);
            });
        }
        for (auto& th : pool) th.join();
    }

    double sum = 0.0;
    double sumsq = 0.0;
    for (double e : errors) {
        sum += e;
        sumsq += e * e;
    }

    McEstimate est;
    est.trials = trials;
    est.mean = sum / static_cast<double>(trials);
    if (trials > 1) {
        const double var = std::max(0.0, (sumsq - sum * sum / trials) / (static_cast<double>(trials) - 1.0));
        est.sem = std::sqrt(var / static_cast<double>(trials));
    }
    return est;
}

}  // namespace gradcode
