#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gradcode/errors.hpp"
#include "gradcode/matrix.hpp"

namespace gradcode {

/// One evaluated closed-form error or bound: which formula, at which
/// (possibly real-valued) straggler count, with the parameters it was fed.
struct BoundRecord {
    std::string name = "none";
    double s = 0.0;
    std::optional<double> value;          // in [0, 1] when present
    std::vector<CodeParams> inputs;
};

/// Worst-case error of an (n,k,l,r)-FRC with s stragglers: (l/k) * floor(s/r).
/// s is real-valued; the composed product-code expressions evaluate this at
/// fractional straggler counts.
inline double frc_error(int l, int k, int r, double s) {
    if (l <= 0 || k <= 0 || r <= 0) throw InvalidParams("frc_error needs positive l, k, r");
    if (s < 0) throw InvalidParams("frc_error needs s >= 0");
    return (static_cast<double>(l) / static_cast<double>(k)) * std::floor(s / static_cast<double>(r));
}

/// Worst-case error of an (n,k,l,lambda) code with uniform pairwise
/// intersections: 1 - l^2 (n-s) / (k l + k lambda (n-s-1)). Equals 1 at s = n.
inline double bibd_error(int n, int k, int l, int lambda, int s) {
    if (n <= 0 || k <= 0 || l <= 0 || lambda < 0) throw InvalidParams("bibd_error needs n,k,l > 0 and lambda >= 0");
    if (s < 0 || s > n) throw InvalidParams("bibd_error needs 0 <= s <= n");
    const int surv = n - s;
    if (surv == 0) return 1.0;
    const double num = static_cast<double>(l) * l * surv;
    const double den = static_cast<double>(k) * (l + static_cast<double>(lambda) * (surv - 1));
    return 1.0 - num / den;
}

/// Minimal worker load that guarantees exact recovery of all k gradients under
/// any s stragglers: ceil(k (s+1) / n).
inline int exact_recovery_threshold(int n, int k, int s) {
    return static_cast<int>((static_cast<long long>(k) * (s + 1) + n - 1) / n);
}

/// Exact error of the product of two FRCs. Both symmetric forms are evaluated
/// and must agree.
inline double kron_frc_frc_error(const CodeParams& f1, const CodeParams& f2, double s) {
    if (s < 0 || s > static_cast<double>(f1.n) * f2.n) throw InvalidParams("kron_frc_frc_error needs 0 <= s <= n1*n2");
    const double a = (static_cast<double>(f1.l) / f1.k) * frc_error(f2.l, f2.k, f2.r, s / f1.r);
    const double b = (static_cast<double>(f2.l) / f2.k) * frc_error(f1.l, f1.k, f1.r, s / f2.r);
    if (std::fabs(a - b) > 1e-12)
        throw InternalInconsistency("symmetric product-FRC error forms disagree: " + std::to_string(a) + " vs " +
                                    std::to_string(b));
    return a;
}

/// Upper bound on the error of FRC x BIBD with s stragglers. Values above 1
/// are clamped; *clamped reports when that happened.
inline double kron_frc_bibd_bound(const CodeParams& f, const CodeParams& b, int s, bool* clamped = nullptr) {
    if (!b.lambda) throw InvalidParams("kron_frc_bibd_bound needs a lambda-uniform right factor");
    const long long nn = static_cast<long long>(f.n) * b.n;
    if (s < 0 || s > nn) throw InvalidParams("kron_frc_bibd_bound needs 0 <= s <= n1*n2");
    const long long full_blocks = s / (static_cast<long long>(f.r) * b.n);
    const long long rem = s - full_blocks * f.r * b.n;
    const int bval = static_cast<int>(rem / f.r);
    double value = frc_error(f.l, f.k, f.r, static_cast<double>(s) / b.n) +
                   (static_cast<double>(f.l) / f.k) * bibd_error(b.n, b.k, b.l, *b.lambda, bval);
    if (clamped) *clamped = value > 1.0;
    if (value > 1.0) value = 1.0;
    return value;
}

/// Composite intersection constant d of the product-BIBD error bound.
inline long long kron_bibd_d(const CodeParams& b1, const CodeParams& b2) {
    if (!b1.lambda || !b2.lambda) throw InvalidParams("kron_bibd_d needs lambda-uniform factors");
    const long long l1 = b1.l, l2 = b2.l, m1 = *b1.lambda, m2 = *b2.lambda;
    return (l1 - m1) * (l2 - m2) + static_cast<long long>(b2.n) * (l1 * m2 - m1 * m2) +
           static_cast<long long>(b1.n) * (m1 * l2 - m1 * m2);
}

/// Upper bound on the error of BIBD x BIBD with s stragglers.
inline double kron_bibd_bibd_bound(const CodeParams& b1, const CodeParams& b2, int s) {
    if (!b1.lambda || !b2.lambda) throw InvalidParams("kron_bibd_bibd_bound needs lambda-uniform factors");
    const long long nn = static_cast<long long>(b1.n) * b2.n;
    if (s < 0 || s > nn) throw InvalidParams("kron_bibd_bibd_bound needs 0 <= s <= n1*n2");
    const long long surv = nn - s;
    if (surv == 0) return 1.0;
    const double ll = static_cast<double>(b1.l) * b2.l;
    const double d = static_cast<double>(kron_bibd_d(b1, b2));
    const double lam = static_cast<double>(*b1.lambda) * (*b2.lambda);
    const double kk = static_cast<double>(b1.k) * b2.k;
    return 1.0 - (ll * ll * surv) / (kk * (d + lam * surv));
}

}  // namespace gradcode
