#pragma once

namespace gradcode {

// Single knob set for every numeric gate in the library and its tests.
struct Tolerances {
    double normal_eq_residual_per_piece = 1e-8;  // scaled by k before use
    double error_clamp = -1e-12;                 // squared errors below this are a bug
    double jitter_scale = 1e-10;                 // ridge fallback for singular Grams
    double formula_match = 1e-9;                 // measured-vs-closed-form comparisons
    double rank_pivot = 1e-9;                    // real-rank elimination pivot floor
    double system_residual = 1e-10;              // row-distribution residual gate
    double distribution_sum = 1e-12;             // alpha + (2^n-2) beta + gamma vs 1
};

inline const Tolerances& tol() {
    static const Tolerances t{};
    return t;
}

}  // namespace gradcode
