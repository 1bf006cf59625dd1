#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gradcode/decoding.hpp"
#include "gradcode/errors.hpp"
#include "gradcode/matrix.hpp"
#include "gradcode/rng.hpp"

namespace gradcode {

/// C(n, k), saturating at UINT64_MAX.
inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 c = 1;
    for (int i = 1; i <= k; ++i) {
        c = c * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (c > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(c);
}

/// Lexicographic successor of a sorted k-subset of {0..n-1}; false past the last.
inline bool next_k_subset(std::vector<int>& c, int n) {
    const int k = static_cast<int>(c.size());
    for (int i = k - 1; i >= 0; --i) {
        if (c[static_cast<std::size_t>(i)] < n - k + i) {
            ++c[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < k; ++j)
                c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
            return true;
        }
    }
    return false;
}

/// k-subset with the given lexicographic rank (combinatorial number system).
inline std::vector<int> unrank_k_subset(std::uint64_t rank, int n, int k) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    int next = 0;
    for (int slot = 0; slot < k; ++slot) {
        for (int v = next;; ++v) {
            const std::uint64_t block = binomial(n - 1 - v, k - 1 - slot);
            if (rank < block) {
                out.push_back(v);
                next = v + 1;
                break;
            }
            rank -= block;
        }
    }
    return out;
}

enum class SearchMethod { exhaustive, sampled, structured };

inline std::string to_string(SearchMethod m) {
    switch (m) {
        case SearchMethod::exhaustive: return "exhaustive";
        case SearchMethod::sampled: return "sampled";
        case SearchMethod::structured: return "structured";
    }
    return "?";
}

struct WorstCaseResult {
    int s = 0;
    double error = 0.0;  // normalized, in [0, 1]
    StragglerScenario witness;
    SearchMethod method = SearchMethod::exhaustive;
    std::uint64_t subsets_evaluated = 0;
};

using SubsetObserver = std::function<void(const StragglerScenario&, double /*normalized error*/)>;

struct SearchOptions {
    std::uint64_t cap = 1'000'000;  // most straggler subsets an exhaustive run may touch
    int threads = 0;                // 0 = hardware concurrency
    SubsetObserver observer;        // forces a single-threaded scan when set
};

namespace detail {

struct RangeBest {
    double error = -1.0;
    std::vector<int> witness;
};

// Scans straggler subsets with lexicographic ranks [begin, end); keeps the
// first (lexicographically smallest) subset attaining the range maximum.
inline RangeBest scan_range(const SubsetErrorEvaluator& eval, int n, int s, std::uint64_t begin, std::uint64_t end,
                            const SubsetObserver* observer) {
    RangeBest best;
    if (begin >= end) return best;
    std::vector<int> stragglers = unrank_k_subset(begin, n, s);
    std::vector<int> survivors(static_cast<std::size_t>(n - s));
    const double k = static_cast<double>(eval.pieces());
    for (std::uint64_t rank = begin; rank < end; ++rank) {
        std::size_t next = 0, out = 0;
        for (int j = 0; j < n; ++j) {
            if (next < stragglers.size() && stragglers[next] == j)
                ++next;
            else
                survivors[out++] = j;
        }
        const double err = eval.ls_error(survivors) / k;
        if (err > best.error) {
            best.error = err;
            best.witness = stragglers;
        }
        if (observer) {
            StragglerScenario sc;
            sc.n = n;
            sc.stragglers = stragglers;
            (*observer)(sc, err);
        }
        if (rank + 1 < end) next_k_subset(stragglers, n);
    }
    return best;
}

}  // namespace detail

/// Exact maximum of the normalized optimal-decoder error over all straggler
/// sets of size s. Deterministic: ties go to the lexicographically smallest
/// witness regardless of thread count.
inline WorstCaseResult exhaustive_worst_case(const EncodingMatrix& g, int s, const SearchOptions& opts = {}) {
    const int n = g.cols();
    if (s < 0 || s > n) throw InvalidParams("exhaustive_worst_case needs 0 <= s <= n");
    const std::uint64_t total = binomial(n, s);
    if (total > opts.cap)
        throw CapExceeded("C(" + std::to_string(n) + "," + std::to_string(s) + ") = " + std::to_string(total) +
                              " straggler subsets exceed the cap of " + std::to_string(opts.cap),
                          total, opts.cap);

    SubsetErrorEvaluator eval(g);
    unsigned want = opts.threads > 0 ? static_cast<unsigned>(opts.threads) : std::thread::hardware_concurrency();
    if (want == 0) want = 1;
    if (opts.observer) want = 1;
    if (static_cast<std::uint64_t>(want) * 64 > total) want = static_cast<unsigned>(std::max<std::uint64_t>(1, total / 64));

    std::vector<detail::RangeBest> partial(want);
    if (want == 1) {
        partial[0] = detail::scan_range(eval, n, s, 0, total, opts.observer ? &opts.observer : nullptr);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(want);
        for (unsigned t = 0; t < want; ++t) {
            const std::uint64_t begin =
                static_cast<std::uint64_t>(static_cast<unsigned __int128>(total) * t / want);
            const std::uint64_t end =
                static_cast<std::uint64_t>(static_cast<unsigned __int128>(total) * (t + 1) / want);
            workers.emplace_back([&, t, begin, end] { partial[t] = detail::scan_range(eval, n, s, begin, end, nullptr); });
        }
        for (auto& w : workers) w.join();
    }

    // Ranges cover increasing lexicographic ranks, so on a tie the earlier
    // range already holds the smallest witness.
    detail::RangeBest best;
    for (const auto& p : partial)
        if (p.error > best.error) best = p;

    WorstCaseResult result;
    result.s = s;
    result.error = best.error;
    result.witness = StragglerScenario::make(n, best.witness);
    result.method = SearchMethod::exhaustive;
    result.subsets_evaluated = total;
    return result;
}

/// Lower bound on the worst-case error from `trials` uniformly sampled
/// straggler sets plus any structured candidate scenarios. Reproducible for a
/// fixed seed (trial t draws from stream t).
inline WorstCaseResult sampled_worst_case(const EncodingMatrix& g, int s, long trials, std::uint64_t seed,
                                          std::span<const StragglerScenario> candidates = {},
                                          const SubsetObserver& observer = {}) {
    const int n = g.cols();
    if (s < 0 || s > n) throw InvalidParams("sampled_worst_case needs 0 <= s <= n");
    if (trials < 1) throw InvalidParams("sampled_worst_case needs trials >= 1");

    SubsetErrorEvaluator eval(g);
    const double k = static_cast<double>(eval.pieces());

    double best = -1.0;
    std::vector<int> best_witness;
    std::uint64_t evaluated = 0;
    auto consider = [&](const std::vector<int>& stragglers) {
        std::vector<int> survivors;
        survivors.reserve(static_cast<std::size_t>(n - s));
        std::size_t next = 0;
        for (int j = 0; j < n; ++j) {
            if (next < stragglers.size() && stragglers[next] == j)
                ++next;
            else
                survivors.push_back(j);
        }
        const double err = eval.ls_error(survivors) / k;
        ++evaluated;
        if (err > best || (err == best && stragglers < best_witness)) {
            best = err;
            best_witness = stragglers;
        }
        if (observer) {
            StragglerScenario sc;
            sc.n = n;
            sc.stragglers = stragglers;
            observer(sc, err);
        }
    };

    for (const StragglerScenario& cand : candidates) {
        if (cand.n != n || cand.s() != s) throw ShapeMismatch("candidate scenario does not match code/straggler count");
        consider(cand.stragglers);
    }
    for (long t = 0; t < trials; ++t) {
        Pcg32 rng(seed, static_cast<std::uint64_t>(t));
        consider(sample_subset(rng, n, s));
    }

    WorstCaseResult result;
    result.s = s;
    result.error = best;
    result.witness = StragglerScenario::make(n, best_witness);
    result.method = SearchMethod::sampled;
    result.subsets_evaluated = evaluated;
    return result;
}

/// Worst straggler placement for an FRC: kill whole blocks first, then spill
/// into the next block. With blocks of r consecutive workers this is just the
/// first s workers.
inline StragglerScenario frc_adversary(const CodeParams& frc, int s) {
    if (frc.l < 1 || frc.r < 1 || frc.k % frc.l != 0 || frc.n % frc.r != 0 || frc.k / frc.l != frc.n / frc.r)
        throw NotAnFrc("parameters are not a valid FRC shape");
    if (s < 0 || s > frc.n) throw InvalidParams("frc_adversary needs 0 <= s <= n");
    std::vector<int> stragglers(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i) stragglers[static_cast<std::size_t>(i)] = i;
    return StragglerScenario::make(frc.n, std::move(stragglers));
}

/// Structured adversary for FRC (x) BIBD products: straggle c = floor(s / (r1 n2))
/// whole blocks, then spread the remainder evenly over the r1 sub-blocks of the
/// next block (each sub-block is one copy of the BIBD's worker set).
inline StragglerScenario kron_frc_bibd_adversary(const CodeParams& f, const CodeParams& b, int s) {
    if (f.l < 1 || f.r < 1 || f.k % f.l != 0 || f.n % f.r != 0 || f.k / f.l != f.n / f.r)
        throw ShapeMismatch("left factor is not a valid FRC shape");
    if (b.n < 1) throw ShapeMismatch("right factor has no workers");
    const long long total = static_cast<long long>(f.n) * b.n;
    if (s < 0 || s > total) throw InvalidParams("kron_frc_bibd_adversary needs 0 <= s <= n1*n2");

    const long long block = static_cast<long long>(f.r) * b.n;  // workers per FRC block
    const long long full = s / block;
    long long rem = s - full * block;

    std::vector<int> stragglers;
    stragglers.reserve(static_cast<std::size_t>(s));
    for (long long w = 0; w < full * block; ++w) stragglers.push_back(static_cast<int>(w));

    const long long base = rem / f.r;      // stragglers every sub-block receives
    const long long extra = rem % f.r;     // first `extra` sub-blocks get one more
    for (int sub = 0; sub < f.r; ++sub) {
        const long long take = base + (sub < extra ? 1 : 0);
        const long long offset = full * block + static_cast<long long>(sub) * b.n;
        for (long long w = 0; w < take; ++w) stragglers.push_back(static_cast<int>(offset + w));
    }
    return StragglerScenario::make(static_cast<int>(total), std::move(stragglers));
}

}  // namespace gradcode
