#include <doctest.h>

#include <cmath>

#include "gradcode/bounds.hpp"
#include "gradcode/codes.hpp"

using namespace gradcode;

namespace {
CodeParams frc_params(int n, int k, int l, int r) {
    CodeParams p;
    p.n = n;
    p.k = k;
    p.l = l;
    p.r = r;
    return p;
}
}  // namespace

TEST_CASE("frc error formula") {
    CHECK(frc_error(2, 6, 2, 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(frc_error(2, 6, 2, 0.0) == 0.0);
    // real-valued straggler counts, used inside product compositions
    CHECK(frc_error(2, 4, 2, 2.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(frc_error(0, 6, 2, 1.0), InvalidParams);
    CHECK_THROWS_AS(frc_error(2, 6, 2, -1.0), InvalidParams);
}

TEST_CASE("frc error is nondecreasing with jumps exactly at multiples of r") {
    const int l = 3, k = 12, r = 4, n = 16;
    double prev = 0.0;
    for (int s = 0; s <= n; ++s) {
        const double e = frc_error(l, k, r, static_cast<double>(s));
        CHECK(e >= prev);
        if (s > 0) {
            if (s % r == 0)
                CHECK(e > prev);
            else
                CHECK(e == prev);
        }
        prev = e;
    }
}

TEST_CASE("bibd error formula") {
    // fano: 1 - 9(7-s)/(21 + 7(6-s))
    CHECK(bibd_error(7, 7, 3, 1, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(bibd_error(7, 7, 3, 1, 2) == doctest::Approx(4.0 / 49.0).epsilon(1e-15));
    CHECK(bibd_error(7, 7, 3, 1, 7) == 1.0);
    CHECK_THROWS_AS(bibd_error(7, 7, 3, 1, 8), InvalidParams);
    CHECK_THROWS_AS(bibd_error(7, 7, 0, 1, 1), InvalidParams);
}

TEST_CASE("bibd error sequence is convex and nondecreasing") {
    const int cases[][4] = {{7, 7, 3, 1}, {11, 11, 5, 2}, {13, 13, 4, 1}, {21, 21, 5, 1}};
    for (const auto& c : cases) {
        std::vector<double> e;
        for (int s = 0; s <= c[0]; ++s) e.push_back(bibd_error(c[0], c[1], c[2], c[3], s));
        for (std::size_t s = 1; s < e.size(); ++s) CHECK(e[s] >= e[s - 1] - 1e-15);
        for (std::size_t s = 1; s + 1 < e.size(); ++s) CHECK(2.0 * e[s] <= e[s - 1] + e[s + 1] + 1e-12);
    }
}

TEST_CASE("product frc error, both symmetric forms") {
    const CodeParams f = frc_params(4, 4, 2, 2);
    CHECK(kron_frc_frc_error(f, f, 5.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(kron_frc_frc_error(f, f, 0.0) == 0.0);
    CHECK(kron_frc_frc_error(f, f, 16.0) == doctest::Approx(1.0).epsilon(1e-15));
    // asymmetric factors
    const CodeParams g = frc_params(6, 6, 3, 3);
    for (int s = 0; s <= 24; ++s) {
        const double e = kron_frc_frc_error(f, g, static_cast<double>(s));
        CHECK(e == doctest::Approx((2.0 / 4.0) * (3.0 / 6.0) * std::floor(s / 6.0)).epsilon(1e-15));
    }
}

TEST_CASE("frc-bibd product bound") {
    const CodeParams f = frc_params(4, 4, 2, 2);
    const CodeParams b = build_catalog_bibd("fano").second;
    CHECK(kron_frc_bibd_bound(f, b, 0) == doctest::Approx(0.0).epsilon(1e-15));
    // s=3: floor(s/14)=0 blocks dead, b = floor(3/2) = 1
    CHECK(kron_frc_bibd_bound(f, b, 3) == doctest::Approx(0.5 * (1.0 - 9.0 * 6 / (21 + 7 * 5))).epsilon(1e-15));
    CHECK(kron_frc_bibd_bound(f, b, 3) == doctest::Approx(1.0 / 56.0).epsilon(1e-15));
    // s = r1*n2 = 14: err_F(2) = 0.5, b = 0
    CHECK(kron_frc_bibd_bound(f, b, 14) == doctest::Approx(0.5).epsilon(1e-15));
    // (l1/k1)(c + bibd_term) <= (l1/k1)(n1/r1) = 1, so the clamp never fires
    bool clamped = false;
    for (int s = 0; s <= 28; ++s) {
        const double v = kron_frc_bibd_bound(f, b, s, &clamped);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK_FALSE(clamped);
    }
    CHECK(kron_frc_bibd_bound(f, b, 28) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("bibd-bibd product bound") {
    const CodeParams fano = build_catalog_bibd("fano").second;
    CHECK(kron_bibd_d(fano, fano) == 32);
    CHECK(kron_bibd_bibd_bound(fano, fano, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(kron_bibd_bibd_bound(fano, fano, 7) == doctest::Approx(1.0 - 81.0 * 42 / (49.0 * 74)).epsilon(1e-15));
    CHECK(kron_bibd_bibd_bound(fano, fano, 49) == 1.0);
    for (int s = 0; s <= 49; ++s) {
        const double v = kron_bibd_bibd_bound(fano, fano, s);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("exact recovery threshold") {
    CHECK(exact_recovery_threshold(7, 7, 0) == 1);
    CHECK(exact_recovery_threshold(7, 7, 6) == 7);
    CHECK(exact_recovery_threshold(6, 6, 1) == 2);
    CHECK(exact_recovery_threshold(12, 8, 2) == 2);
}
