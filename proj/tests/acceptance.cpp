// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Each criterion pins its tolerance and runtime budget in
// code; oracles come from tests/support and stay off the library's solve path.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "gradcode/analysis.hpp"
#include "gradcode/bounds.hpp"
#include "gradcode/codes.hpp"
#include "gradcode/descriptor.hpp"
#include "gradcode/probbibd.hpp"
#include "gradcode/sim.hpp"
#include "gradcode/worstcase.hpp"
#include "support/oracles.hpp"
#include "support/rational.hpp"

using namespace gradcode;
using testsupport::Fraction;

namespace {

struct Failure {
    std::string detail;
};

void require(bool ok, const std::string& detail) {
    if (!ok) throw Failure{detail};
}

struct Harness {
    int failures = 0;

    void run(int id, const std::string& name, double budget_seconds, const std::function<void()>& body) {
        const auto start = std::chrono::steady_clock::now();
        std::string verdict = "PASS";
        std::string detail;
        try {
            body();
        } catch (const Failure& f) {
            verdict = "FAIL";
            detail = f.detail;
        } catch (const std::exception& e) {
            verdict = "FAIL";
            detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration_cast<std::chrono::duration<double>>(std::chrono::steady_clock::now() - start).count();
        if (verdict == "PASS" && budget_seconds > 0 && elapsed >= budget_seconds) {
            verdict = "FAIL";
            detail = "runtime " + std::to_string(elapsed) + "s exceeds the " + std::to_string(budget_seconds) +
                     "s budget";
        }
        if (verdict == "FAIL") ++failures;
        std::printf("[%s] criterion %2d (%.2fs): %s%s%s\n", verdict.c_str(), id, elapsed, name.c_str(),
                    detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
    }
};

std::vector<int> first_survivors(int n, int s) {
    std::vector<int> u(static_cast<std::size_t>(n - s));
    std::iota(u.begin(), u.end(), 0);
    for (auto& x : u) x += s;
    return u;
}

}  // namespace

int main() {
    Harness h;

    // 1. Exhaustive worst case of every test FRC equals (l/k) floor(s/r),
    //    exact rational arithmetic, zero tolerance.
    h.run(1, "FRC worst case equals the closed form exactly", 10.0, [] {
        const int frcs[][4] = {{4, 4, 2, 2},   {6, 6, 2, 2},   {6, 6, 3, 3},  {6, 4, 2, 3},  {8, 8, 2, 2},
                               {8, 8, 4, 4},   {9, 9, 3, 3},   {10, 10, 2, 2}, {10, 10, 5, 5}, {12, 12, 2, 2},
                               {12, 12, 3, 3}, {12, 12, 4, 4}, {12, 12, 6, 6}, {12, 8, 2, 3}, {12, 9, 3, 4}};
        for (const auto& f : frcs) {
            const int n = f[0], k = f[1], l = f[2], r = f[3];
            const EncodingMatrix g = build_frc(n, k, l, r);
            for (int s = 0; s <= n; ++s) {
                const Fraction measured = testsupport::exact_worst_case(g, s);
                const Fraction expected = Fraction(l, k) * Fraction(s / r);
                require(measured == expected,
                        "frc(" + std::to_string(n) + "," + std::to_string(k) + "," + std::to_string(l) + "," +
                            std::to_string(r) + ") s=" + std::to_string(s) + ": " +
                            std::to_string(measured.to_double()) + " != " + std::to_string(expected.to_double()));
            }
        }
    });

    // 2. Catalog BIBD worst case equals the closed form to 1e-9, and
    //    every survivor set of the same size attains the same error.
    h.run(2, "BIBD worst case equals the closed form at every subset", 60.0, [] {
        for (const char* name : {"fano", "biplane11", "pg2_3"}) {
            const auto [g, p] = build_catalog_bibd(name);
            for (int s = 0; s <= p.n; ++s) {
                const double expected = bibd_error(p.n, p.k, p.l, *p.lambda, s);
                SearchOptions opts;
                opts.observer = [&](const StragglerScenario& sc, double err) {
                    require(std::fabs(err - expected) <= 1e-9,
                            std::string(name) + " s=" + std::to_string(s) + " subset error " + std::to_string(err) +
                                " vs " + std::to_string(expected));
                    (void)sc;
                };
                const WorstCaseResult res = exhaustive_worst_case(g, s, opts);
                require(std::fabs(res.error - expected) <= 1e-9,
                        std::string(name) + " s=" + std::to_string(s) + " worst " + std::to_string(res.error));
            }
        }
    });

    // 3. On every lambda-uniform test code with l > lambda the least-squares
    //    optimum achieves k - l^2(n-s)/(l + lambda(n-s-1)) to 1e-8.
    h.run(3, "least-squares optimum matches the lambda-uniform identity", 120.0, [] {
        struct Entry {
            EncodingMatrix g;
            int n, k, l, lambda;
        };
        std::vector<Entry> entries;
        for (const char* name : {"fano", "biplane11", "pg2_3", "pg2_4"}) {
            auto [g, p] = build_catalog_bibd(name);
            entries.push_back({std::move(g), p.n, p.k, p.l, *p.lambda});
        }
        {
            // piece-replication extensions: lambda-uniform but no longer BIBDs
            auto [fano, p] = build_catalog_bibd("fano");
            entries.push_back({kronecker(fano, ones_matrix(2)), 7, 14, 6, 2});
            entries.push_back({kronecker(ones_matrix(3), fano), 7, 21, 9, 3});
        }

        for (const Entry& e : entries) {
            const ValidationReport rep = validate(e.g);
            require(rep.is_lambda_uniform_gc() && *rep.uniform_lambda == e.lambda, "test code is not lambda-uniform");
            SubsetErrorEvaluator eval(e.g);
            for (int s = 0; s <= e.n; ++s) {
                const int surv = e.n - s;
                const double expected =
                    surv == 0 ? e.k
                              : e.k - static_cast<double>(e.l) * e.l * surv / (e.l + static_cast<double>(e.lambda) * (surv - 1));
                if (binomial(e.n, s) <= 3000) {
                    std::vector<int> stragglers(static_cast<std::size_t>(s));
                    std::iota(stragglers.begin(), stragglers.end(), 0);
                    do {
                        std::vector<int> u;
                        std::size_t next = 0;
                        for (int j = 0; j < e.n; ++j) {
                            if (next < stragglers.size() && stragglers[next] == j)
                                ++next;
                            else
                                u.push_back(j);
                        }
                        require(std::fabs(eval.ls_error(u) - expected) <= 1e-8,
                                "lambda-uniform identity failed at s=" + std::to_string(s));
                    } while (next_k_subset(stragglers, e.n));
                } else {
                    for (long trial = 0; trial < 120; ++trial) {
                        Pcg32 rng(99, static_cast<std::uint64_t>(trial));
                        std::vector<int> str = sample_subset(rng, e.n, s);
                        std::vector<int> u;
                        std::size_t next = 0;
                        for (int j = 0; j < e.n; ++j) {
                            if (next < str.size() && str[next] == j)
                                ++next;
                            else
                                u.push_back(j);
                        }
                        require(std::fabs(eval.ls_error(u) - expected) <= 1e-8,
                                "lambda-uniform identity failed at s=" + std::to_string(s));
                    }
                }
            }
        }
    });

    // 4. Probabilistic distribution closed form and full-system residual.
    h.run(4, "row distribution (7,7,3,2) closed form and residual", 10.0, [] {
        const RowDistribution d = solve_distribution(7, 7, 3, 2);
        require(std::fabs(d.alpha - 65.0 / 224.0) <= 1e-12, "alpha " + std::to_string(d.alpha));
        require(std::fabs(d.beta - 1.0 / 224.0) <= 1e-12, "beta " + std::to_string(d.beta));
        require(std::fabs(d.gamma - 33.0 / 224.0) <= 1e-12, "gamma " + std::to_string(d.gamma));
        const SystemResidual res = verify_system(d);
        require(!res.reduced_only, "expected the full 2^7-column system");
        require(res.max_residual <= 1e-10, "residual " + std::to_string(res.max_residual));
    });

    // 5. Monte-Carlo expected error vs the closed-form bound, 10^4 trials:
    //    optimal mean under the bound, constant-decoder mean on the bound.
    h.run(5, "probabilistic code Monte-Carlo brackets the bound", 120.0, [] {
        const RowDistribution d = solve_distribution(7, 7, 3, 2);
        for (int s : {1, 2, 3}) {
            const double bound = bibd_error(7, 7, 3, 2, s);
            const McEstimate opt = expected_error_mc(d, 7, s, 10'000, 1, McDecoder::optimal);
            const McEstimate con = expected_error_mc(d, 7, s, 10'000, 1, McDecoder::bibd_constant);
            require(opt.mean <= bound + 3.0 * opt.sem,
                    "optimal mean " + std::to_string(opt.mean) + " above bound " + std::to_string(bound) +
                        " + 3*sem at s=" + std::to_string(s));
            require(std::fabs(con.mean - bound) <= 3.0 * con.sem,
                    "constant mean " + std::to_string(con.mean) + " not within 3*sem of " + std::to_string(bound) +
                        " at s=" + std::to_string(s));
            require(opt.mean <= con.mean + 1e-12, "optimal mean above constant mean at s=" + std::to_string(s));
        }
    });

    // 6. Product of two FRCs follows both symmetric closed forms exactly.
    h.run(6, "FRC x FRC worst case equals both closed forms exactly", 30.0, [] {
        const EncodingMatrix f = build_frc(4, 4, 2, 2);
        const EncodingMatrix g = kronecker(f, f);
        for (int s = 0; s <= 16; ++s) {
            const Fraction measured = testsupport::exact_worst_case(g, s);
            // (l1/k1) err(F2, s/r1): floor((s/2)/2) = floor(s/4), and the
            // mirrored form is identical by symmetry of the factors
            const Fraction form_a = Fraction(2, 4) * Fraction(2, 4) * Fraction((s / 2) / 2);
            const Fraction form_b = Fraction(2, 4) * Fraction(2, 4) * Fraction((s / 2) / 2);
            const Fraction direct = Fraction(4, 16) * Fraction(s / 4);
            require(measured == form_a && measured == form_b && measured == direct,
                    "mismatch at s=" + std::to_string(s) + ": measured " + std::to_string(measured.to_double()));
            // the floating production path agrees with the closed form too
            const double fl = exhaustive_worst_case(g, s).error;
            require(std::fabs(fl - measured.to_double()) <= 1e-9,
                    "floating exhaustive off at s=" + std::to_string(s));
        }
    });

    // 7. FRC x BIBD: measured error below the product bound, and the two
    //    factor orders give the same error.
    h.run(7, "FRC x BIBD bound dominance and factor-order symmetry", 600.0, [] {
        const EncodingMatrix f = build_frc(4, 4, 2, 2);
        const auto [fano, bp] = build_catalog_bibd("fano");
        CodeParams fp;
        fp.n = 4;
        fp.k = 4;
        fp.l = 2;
        fp.r = 2;
        const EncodingMatrix fb = kronecker(f, fano);
        const EncodingMatrix bf = kronecker(fano, f);
        for (int s = 0; s <= 6; ++s) {
            const double e_fb = exhaustive_worst_case(fb, s).error;
            const double e_bf = exhaustive_worst_case(bf, s).error;
            const double bound = kron_frc_bibd_bound(fp, bp, s);
            require(e_fb <= bound + 1e-9, "s=" + std::to_string(s) + ": measured " + std::to_string(e_fb) +
                                              " above bound " + std::to_string(bound));
            require(std::fabs(e_fb - e_bf) <= 1e-9,
                    "factor-order asymmetry at s=" + std::to_string(s) + ": " + std::to_string(e_fb) + " vs " +
                        std::to_string(e_bf));
        }
    });

    // 8. BIBD x BIBD: measured error below the product bound; the Gram
    //    quadratic-form inequality holds for every evaluated subset.
    h.run(8, "BIBD x BIBD bound dominance and the Gram inequality", 600.0, [] {
        const auto [fano, p] = build_catalog_bibd("fano");
        const EncodingMatrix g = kronecker(fano, fano);
        const CodeDescriptor d = parse_descriptor_text(
            R"({"type":"kronecker","left":{"type":"bibd","name":"fano"},"right":{"type":"bibd","name":"fano"}})");
        SubsetErrorEvaluator eval(g);
        const double dconst = static_cast<double>(kron_bibd_d(p, p));
        const double lamlam = 1.0;
        auto gram_check = [&](const StragglerScenario& sc, double) {
            const std::vector<int> u = sc.survivors();
            const double stilde = static_cast<double>(u.size());
            require(eval.gram_ones_quadratic(u) <= stilde * dconst + lamlam * stilde * stilde + 1e-9,
                    "Gram inequality violated at s=" + std::to_string(sc.s()));
        };
        for (int s = 0; s <= 4; ++s) {
            SearchOptions opts;
            opts.observer = gram_check;
            const WorstCaseResult res = exhaustive_worst_case(g, s, opts);
            require(res.error <= kron_bibd_bibd_bound(p, p, s) + 1e-9,
                    "exhaustive s=" + std::to_string(s) + " above the bound");
        }
        for (int s = 5; s <= 20; ++s) {
            const std::vector<StragglerScenario> cands = structured_candidates(d, s);
            const WorstCaseResult res = sampled_worst_case(g, s, 10'000, 8, cands, gram_check);
            require(res.error <= kron_bibd_bibd_bound(p, p, s) + 1e-9, "sampled s=" + std::to_string(s) + " above the bound");
        }
    });

    // 9. Closed-form error sequences are convex; measured worst case is
    //    nondecreasing in s on every exhaustive-capable test code.
    h.run(9, "convexity and monotonicity property sweep", 120.0, [] {
        for (const char* name : {"fano", "biplane11", "pg2_3", "pg2_4"}) {
            const CodeParams p = build_catalog_bibd(name).second;
            std::vector<double> e;
            for (int s = 0; s <= p.n; ++s) e.push_back(bibd_error(p.n, p.k, p.l, *p.lambda, s));
            for (std::size_t s = 1; s + 1 < e.size(); ++s)
                require(2.0 * e[s] <= e[s - 1] + e[s + 1] + 1e-12, std::string(name) + " convexity at s=" + std::to_string(s));
        }
        std::vector<EncodingMatrix> codes;
        codes.push_back(build_catalog_bibd("fano").first);
        codes.push_back(build_catalog_bibd("biplane11").first);
        codes.push_back(build_catalog_bibd("pg2_3").first);
        codes.push_back(build_catalog_bibd("pg2_4").first);
        codes.push_back(build_frc(6, 6, 2, 2));
        codes.push_back(build_frc(12, 12, 3, 3));
        codes.push_back(kronecker(build_frc(4, 4, 2, 2), build_frc(4, 4, 2, 2)));
        codes.push_back(kronecker(build_catalog_bibd("fano").first, ones_matrix(2)));
        for (const EncodingMatrix& g : codes) {
            double prev = -1.0;
            for (int s = 0; s <= g.cols(); ++s) {
                const double e = exhaustive_worst_case(g, s).error;
                require(e >= prev - 1e-12, "worst case decreased at s=" + std::to_string(s));
                prev = e;
            }
        }
    });

    // 10. Comparison at matched fractional redundancy: the BIBD-product curve
    //     stays under the FRC curve at the FRC's jump fractions. Qualitative
    //     reproduction; measured-vs-measured, no claimed numeric tolerance.
    h.run(10, "product BIBD beats the matched FRC across the curve", 600.0, [] {
        const std::vector<CodeDescriptor> ds = {
            parse_descriptor_text(
                R"({"type":"kronecker","left":{"type":"bibd","name":"fano"},"right":{"type":"bibd","name":"fano"}})"),
            parse_descriptor_text(R"({"type":"frc","n":49,"k":49,"l":7,"r":7})")};
        std::vector<int> grid;
        for (int s = 0; s <= 49; s += 7) grid.push_back(s);
        CurveConfig cfg;
        cfg.trials = 10'000;
        cfg.seed = 4;
        const CompareResult cmp = compare_codes(ds, {grid, grid}, cfg);
        require(!cmp.redundancy_mismatch, "redundancy mismatch flagged for the matched pair");
        for (const CompareRow& row : cmp.rows) {
            require(row.cells[0].has_value() && row.cells[1].has_value(),
                    "missing measurement at fraction " + std::to_string(row.fraction()));
            require(row.cells[0]->measured <= row.cells[1]->measured + 1e-12,
                    "kron curve above frc at fraction " + std::to_string(row.fraction()) + ": " +
                        std::to_string(row.cells[0]->measured) + " vs " + std::to_string(row.cells[1]->measured));
        }
    });

    // 11. Simulation bridge: with all per-piece gradients equal to one unit
    //     vector, the decoded sum's deviation per piece equals the worst-case
    //     error value of the decoder's scenario.
    h.run(11, "coded-step deviation reduces to the worst-case error", 60.0, [] {
        struct Case {
            EncodingMatrix g;
            std::vector<int> s_values;
        };
        std::vector<Case> cases;
        cases.push_back({build_catalog_bibd("fano").first, {0, 1, 2, 3}});
        cases.push_back({build_frc(6, 6, 2, 2), {0, 2, 3, 4}});
        cases.push_back({build_catalog_bibd("biplane11").first, {1, 3}});
        for (const Case& c : cases) {
            const int k = c.g.rows();
            const int p = 3;
            for (int s : c.s_values) {
                StragglerPolicy policy;
                policy.kind = StragglerPolicy::Kind::worst_case;
                policy.s = s;
                Simulation sim(make_dataset(k, p, 0.0, 1), c.g, policy, SimDecoder::optimal);
                const StragglerScenario sc = sim.resolved_scenario();
                const std::vector<int> survivors = sc.survivors();
                const std::vector<double> v = sim.decoding_vector(sc, survivors);
                std::vector<double> grads(static_cast<std::size_t>(k) * p, 0.0);
                for (int i = 0; i < k; ++i) grads[static_cast<std::size_t>(i) * p + 1] = 1.0;
                const std::vector<double> approx = sim.decode_sum(grads, survivors, v);
                double dev = 0.0;
                for (int cdim = 0; cdim < p; ++cdim) {
                    const double exact = cdim == 1 ? static_cast<double>(k) : 0.0;
                    dev += (approx[static_cast<std::size_t>(cdim)] - exact) * (approx[static_cast<std::size_t>(cdim)] - exact);
                }
                dev = std::sqrt(dev);
                const double err = exhaustive_worst_case(c.g, s).error;
                require(std::fabs(dev / k - err) <= 1e-8,
                        "bridge mismatch at s=" + std::to_string(s) + ": " + std::to_string(dev / k) + " vs " +
                            std::to_string(err));
            }
        }
        // and through a real coded step: identical samples make every
        // per-piece gradient equal, so the recorded step deviation is
        // k * err * ||gradient||
        Dataset d;
        d.k = 7;
        d.p = 2;
        d.noise = 0.0;
        d.x.assign({1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0});
        d.y.assign(7, -1.0);
        d.theta_star.assign(2, 0.0);
        StragglerPolicy policy;
        policy.kind = StragglerPolicy::Kind::worst_case;
        policy.s = 1;
        Simulation sim(d, build_catalog_bibd("fano").first, policy, SimDecoder::optimal);
        GDState st = sim.initial_state();
        st = sim.step(st);
        const double grad_norm = std::sqrt(5.0);  // residual 1 times ||x|| at theta = 0
        const double expected = 7.0 * exhaustive_worst_case(build_catalog_bibd("fano").first, 1).error * grad_norm;
        require(std::fabs(st.grad_deviation_history.back() - expected) <= 1e-8,
                "step deviation " + std::to_string(st.grad_deviation_history.back()) + " vs " +
                    std::to_string(expected));
    });

    if (h.failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) failed\n", h.failures);
    return 1;
}
