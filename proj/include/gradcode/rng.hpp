#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace gradcode {

// PCG32 (O'Neill's pcg32; LCG state with xorshift-rotate output).
// Stream splitting rule used throughout the toolkit: worker task / Monte-Carlo
// trial number t draws from Pcg32(seed, t). Distinct streams select distinct
// (odd) LCG increments, so trials are independent and reproducible.
class Pcg32 {
public:
    explicit Pcg32(std::uint64_t seed = 0x853c49e6748fea9bULL, std::uint64_t stream = 0) {
        state_ = 0U;
        inc_ = (stream << 1u) | 1u;
        next();
        state_ += seed;
        next();
    }

    std::uint32_t next() {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    std::uint64_t next64() {
        std::uint64_t hi = next();
        return (hi << 32) | next();
    }

    // Uniform double in [0, 1), 53 random bits.
    double next_double() { return static_cast<double>(next64() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, bound) by rejection.
    std::uint32_t next_below(std::uint32_t bound) {
        std::uint32_t threshold = (0u - bound) % bound;
        for (;;) {
            std::uint32_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // Standard normal via Box-Muller; second value cached.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = next_double();
        } while (u1 <= 0.0);
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_ = 0;
    std::uint64_t inc_ = 1;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Sorted uniform s-subset of {0, ..., n-1} (partial Fisher-Yates on an index pool).
inline std::vector<int> sample_subset(Pcg32& rng, int n, int s) {
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i) {
        std::uint32_t j = rng.next_below(static_cast<std::uint32_t>(n - i));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(i) + j]);
        out.push_back(pool[static_cast<std::size_t>(i)]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace gradcode
