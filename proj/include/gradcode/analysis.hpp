#pragma once

#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradcode/bounds.hpp"
#include "gradcode/descriptor.hpp"
#include "gradcode/io.hpp"
#include "gradcode/worstcase.hpp"

namespace gradcode {

enum class CurveMethod { automatic, exhaustive, sampled };

struct CurveConfig {
    CurveMethod method = CurveMethod::automatic;
    long trials = 10'000;
    std::uint64_t seed = 0;
    std::uint64_t cap = 1'000'000;
    bool strict = false;  // fail on cap exceedance instead of downgrading
    int threads = 0;
};

/// Closed-form error (exact for FRC-like and catalog-BIBD codes) or the
/// applicable product/expectation bound for this descriptor at s stragglers.
inline BoundRecord reference_for(const CodeDescriptor& d, int s) {
    BoundRecord ref;
    ref.s = static_cast<double>(s);
    if (auto frc = pure_frc_params(d)) {
        ref.value = frc_error(frc->l, frc->k, frc->r, static_cast<double>(s));
        ref.name = std::holds_alternative<KroneckerSpec>(d.value) ? "kron_frc_frc_exact" : "frc_exact";
        ref.inputs = {*frc};
        return ref;
    }
    if (const auto* b = std::get_if<CatalogBibdSpec>(&d.value)) {
        const CodeParams p = build_catalog_bibd(b->name).second;
        ref.value = bibd_error(p.n, p.k, p.l, *p.lambda, s);
        ref.name = "bibd_exact";
        ref.inputs = {p};
        return ref;
    }
    if (const auto* pb = std::get_if<ProbBibdSpec>(&d.value)) {
        ref.value = bibd_error(pb->n, pb->k, pb->l, pb->lambda, s);
        ref.name = "pbibd_expected_bound";
        ref.inputs = {*nominal_params(d)};
        return ref;
    }
    if (const auto* kr = std::get_if<KroneckerSpec>(&d.value)) {
        auto lf = pure_frc_params(*kr->left);
        auto rf = pure_frc_params(*kr->right);
        const auto* lb = std::get_if<CatalogBibdSpec>(&kr->left->value);
        const auto* rb = std::get_if<CatalogBibdSpec>(&kr->right->value);
        if (lf && rb) {
            const CodeParams bp = build_catalog_bibd(rb->name).second;
            ref.value = kron_frc_bibd_bound(*lf, bp, s);
            ref.name = "kron_frc_bibd_bound";
            ref.inputs = {*lf, bp};
            return ref;
        }
        if (lb && rf) {
            const CodeParams bp = build_catalog_bibd(lb->name).second;
            ref.value = kron_frc_bibd_bound(*rf, bp, s);
            ref.name = "kron_frc_bibd_bound";
            ref.inputs = {*rf, bp};
            return ref;
        }
        if (lb && rb) {
            const CodeParams p1 = build_catalog_bibd(lb->name).second;
            const CodeParams p2 = build_catalog_bibd(rb->name).second;
            ref.value = kron_bibd_bibd_bound(p1, p2, s);
            ref.name = "kron_bibd_bibd_bound";
            ref.inputs = {p1, p2};
            return ref;
        }
    }
    return ref;
}

namespace detail {

// Maps a straggler set of the product F (x) B onto the permutation-equivalent
// set for B (x) F: worker jF*n2 + jB <-> worker jB*n1 + jF.
inline StragglerScenario swap_kron_factors(const StragglerScenario& sc, int n_left, int n_right) {
    std::vector<int> mapped;
    mapped.reserve(sc.stragglers.size());
    for (int w : sc.stragglers) {
        const int j_left = w / n_right;
        const int j_right = w % n_right;
        mapped.push_back(j_right * n_left + j_left);
    }
    return StragglerScenario::make(n_left * n_right, std::move(mapped));
}

}  // namespace detail

/// Adversary scenarios suggested by the descriptor's structure; always a
/// valid set of candidates for sampled search, never required to be worst.
inline std::vector<StragglerScenario> structured_candidates(const CodeDescriptor& d, int s) {
    std::vector<StragglerScenario> out;
    const auto params = nominal_params(d);
    if (!params || s < 0 || s > params->n) return out;
    const int n = params->n;

    if (auto frc = pure_frc_params(d)) out.push_back(frc_adversary(*frc, s));

    if (const auto* kr = std::get_if<KroneckerSpec>(&d.value)) {
        auto lf = pure_frc_params(*kr->left);
        auto rf = pure_frc_params(*kr->right);
        const auto* lb = std::get_if<CatalogBibdSpec>(&kr->left->value);
        const auto* rb = std::get_if<CatalogBibdSpec>(&kr->right->value);
        if (lf && rb) out.push_back(kron_frc_bibd_adversary(*lf, build_catalog_bibd(rb->name).second, s));
        if (lb && rf) {
            const CodeParams b = build_catalog_bibd(lb->name).second;
            out.push_back(detail::swap_kron_factors(kron_frc_bibd_adversary(*rf, b, s), rf->n, b.n));
        }
    }

    // Generic fallbacks: fill from the front, and an evenly spread pattern.
    std::vector<int> prefix(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i) prefix[static_cast<std::size_t>(i)] = i;
    out.push_back(StragglerScenario::make(n, std::move(prefix)));
    if (s > 0) {
        std::vector<int> spread;
        spread.reserve(static_cast<std::size_t>(s));
        for (int i = 0; i < s; ++i) spread.push_back(static_cast<int>(static_cast<long long>(i) * n / s));
        std::sort(spread.begin(), spread.end());
        spread.erase(std::unique(spread.begin(), spread.end()), spread.end());
        for (int w = 0; static_cast<int>(spread.size()) < s; ++w)
            if (!std::binary_search(spread.begin(), spread.end(), w)) {
                spread.insert(std::lower_bound(spread.begin(), spread.end(), w), w);
            }
        out.push_back(StragglerScenario::make(n, std::move(spread)));
    }
    return out;
}

struct CurvePoint {
    int s = 0;
    double fraction = 0.0;
    double measured = 0.0;
    SearchMethod method = SearchMethod::exhaustive;
    std::optional<double> reference;
    std::string bound_name = "none";
    StragglerScenario witness;
    bool cap_downgraded = false;
    std::uint64_t subsets_evaluated = 0;
};

/// Worst-case error curve of a built code at the requested straggler counts.
/// Sampled points fold in the descriptor's structured adversaries plus the
/// previous point's witness grown by one worker, which keeps reported lower
/// bounds monotone along the curve.
inline std::vector<CurvePoint> error_curve(const CodeDescriptor& d, const EncodingMatrix& g,
                                           std::vector<int> s_values, const CurveConfig& cfg = {}) {
    std::sort(s_values.begin(), s_values.end());
    s_values.erase(std::unique(s_values.begin(), s_values.end()), s_values.end());
    const int n = g.cols();

    std::vector<CurvePoint> points;
    std::optional<StragglerScenario> previous_witness;
    for (int s : s_values) {
        if (s < 0 || s > n) throw InvalidParams("error_curve straggler count out of [0, n]");
        CurvePoint pt;
        pt.s = s;
        pt.fraction = static_cast<double>(s) / n;

        const std::uint64_t subsets = binomial(n, s);
        bool exhaustive = cfg.method != CurveMethod::sampled && subsets <= cfg.cap;
        if (cfg.method != CurveMethod::sampled && subsets > cfg.cap) {
            if (cfg.strict)
                throw CapExceeded("C(" + std::to_string(n) + "," + std::to_string(s) + ") = " +
                                      std::to_string(subsets) + " exceeds the cap of " + std::to_string(cfg.cap),
                                  subsets, cfg.cap);
            pt.cap_downgraded = true;
        }

        WorstCaseResult res;
        if (exhaustive) {
            SearchOptions opts;
            opts.cap = cfg.cap;
            opts.threads = cfg.threads;
            res = exhaustive_worst_case(g, s, opts);
        } else {
            std::vector<StragglerScenario> candidates = structured_candidates(d, s);
            if (previous_witness && previous_witness->s() == s - 1) {
                std::vector<int> grown = previous_witness->stragglers;
                for (int w = 0; w < n; ++w)
                    if (!std::binary_search(grown.begin(), grown.end(), w)) {
                        grown.insert(std::lower_bound(grown.begin(), grown.end(), w), w);
                        break;
                    }
                candidates.push_back(StragglerScenario::make(n, std::move(grown)));
            }
            res = sampled_worst_case(g, s, cfg.trials, cfg.seed, candidates);
        }

        pt.measured = res.error;
        pt.method = res.method;
        pt.witness = res.witness;
        pt.subsets_evaluated = res.subsets_evaluated;
        const BoundRecord ref = reference_for(d, s);
        pt.reference = ref.value;
        pt.bound_name = ref.name;
        previous_witness = res.witness;
        points.push_back(std::move(pt));
    }
    return points;
}

inline std::string witness_to_string(const StragglerScenario& sc) {
    std::string out;
    for (std::size_t i = 0; i < sc.stragglers.size(); ++i) {
        if (i) out.push_back(';');
        out += std::to_string(sc.stragglers[i]);
    }
    return out;
}

inline std::string curve_to_csv(const std::vector<CurvePoint>& points) {
    std::string out = "s,fraction_straggled,measured_error,method,formula_or_bound,bound_name,witness,warning\n";
    for (const CurvePoint& p : points) {
        out += csv_join({std::to_string(p.s), format_double(p.fraction), format_double(p.measured),
                         to_string(p.method), p.reference ? format_double(*p.reference) : "",
                         p.bound_name, witness_to_string(p.witness), p.cap_downgraded ? "cap_downgraded" : ""});
    }
    return out;
}

inline nlohmann::json curve_to_json(const std::vector<CurvePoint>& points) {
    nlohmann::json rows = nlohmann::json::array();
    for (const CurvePoint& p : points) {
        nlohmann::json row = {{"s", p.s},
                              {"fraction_straggled", p.fraction},
                              {"measured_error", p.measured},
                              {"method", to_string(p.method)},
                              {"bound_name", p.bound_name},
                              {"witness", witness_to_string(p.witness)},
                              {"warning", p.cap_downgraded ? "cap_downgraded" : ""}};
        if (p.reference)
            row["formula_or_bound"] = *p.reference;
        else
            row["formula_or_bound"] = nullptr;
        rows.push_back(std::move(row));
    }
    return rows;
}

struct CompareCell {
    int s = 0;
    double measured = 0.0;
    SearchMethod method = SearchMethod::exhaustive;
};

struct CompareRow {
    long long num = 0;  // fraction_straggled = num/den in lowest terms
    long long den = 1;
    std::vector<std::optional<CompareCell>> cells;

    double fraction() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct CompareResult {
    std::vector<std::string> labels;
    std::vector<double> redundancies;  // r/n per code
    double redundancy_tolerance = 0.05;
    bool redundancy_mismatch = false;
    std::vector<CompareRow> rows;
};

/// Joint worst-case comparison keyed by the fraction of straggling workers.
/// Codes whose fractional redundancies r/n differ by more than the tolerance
/// are flagged; the comparison is still emitted.
inline CompareResult compare_codes(const std::vector<CodeDescriptor>& descriptors,
                                   const std::vector<std::vector<int>>& s_lists, const CurveConfig& cfg = {},
                                   double redundancy_tolerance = 0.05) {
    if (descriptors.size() < 2) throw ConfigError("compare needs at least two descriptors");
    if (s_lists.size() != descriptors.size()) throw ConfigError("compare needs one straggler list per descriptor");

    CompareResult result;
    result.redundancy_tolerance = redundancy_tolerance;
    std::vector<std::vector<CurvePoint>> curves;
    for (std::size_t i = 0; i < descriptors.size(); ++i) {
        result.labels.push_back(descriptor_label(descriptors[i]));
        result.redundancies.push_back(fractional_redundancy(descriptors[i]));
        EncodingMatrix g = build_code(descriptors[i]);
        curves.push_back(error_curve(descriptors[i], g, s_lists[i], cfg));
    }
    for (std::size_t a = 0; a < result.redundancies.size(); ++a)
        for (std::size_t b = a + 1; b < result.redundancies.size(); ++b)
            if (std::fabs(result.redundancies[a] - result.redundancies[b]) > redundancy_tolerance)
                result.redundancy_mismatch = true;

    auto fraction_key = [](int s, int n) {
        const long long g = std::gcd(static_cast<long long>(s), static_cast<long long>(n));
        return std::pair<long long, long long>{g == 0 ? 0 : s / g, g == 0 ? 1 : n / g};
    };

    std::vector<std::pair<long long, long long>> keys;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const int n = nominal_params(descriptors[i]) ? nominal_params(descriptors[i])->n : 0;
        for (const CurvePoint& p : curves[i]) keys.push_back(fraction_key(p.s, n));
    }
    std::sort(keys.begin(), keys.end(), [](const auto& x, const auto& y) {
        return static_cast<double>(x.first) * y.second < static_cast<double>(y.first) * x.second;
    });
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    for (const auto& key : keys) {
        CompareRow row;
        row.num = key.first;
        row.den = key.second;
        row.cells.resize(descriptors.size());
        for (std::size_t i = 0; i < curves.size(); ++i) {
            const int n = nominal_params(descriptors[i])->n;
            for (const CurvePoint& p : curves[i]) {
                if (fraction_key(p.s, n) == key) {
                    row.cells[i] = CompareCell{p.s, p.measured, p.method};
                    break;
                }
            }
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

inline nlohmann::json validation_report_to_json(const ValidationReport& rep) {
    nlohmann::json intersections = nlohmann::json::array();
    for (const auto& [value, count] : rep.intersection_counts)
        intersections.push_back({{"value", value}, {"pairs", count}});
    nlohmann::json j = {{"n", rep.n},
                        {"k", rep.k},
                        {"column_weight_set", rep.column_weight_set},
                        {"row_weight_set", rep.row_weight_set},
                        {"intersection_counts", std::move(intersections)},
                        {"is_uniform_gc", rep.is_uniform_gc()},
                        {"is_lambda_uniform_gc", rep.is_lambda_uniform_gc()}};
    j["l"] = rep.uniform_column_weight ? nlohmann::json(*rep.uniform_column_weight) : nlohmann::json(nullptr);
    j["r"] = rep.uniform_row_weight ? nlohmann::json(*rep.uniform_row_weight) : nlohmann::json(nullptr);
    j["lambda"] = rep.uniform_lambda ? nlohmann::json(*rep.uniform_lambda) : nlohmann::json(nullptr);
    return j;
}

inline std::string compare_to_csv(const CompareResult& cmp) {
    std::string out;
    for (std::size_t i = 0; i < cmp.labels.size(); ++i)
        out += "# code" + std::to_string(i) + " = " + cmp.labels[i] +
               " (fractional_redundancy = " + format_double(cmp.redundancies[i]) + ")\n";
    out += "# redundancy_mismatch = " + std::string(cmp.redundancy_mismatch ? "true" : "false") +
           " (tolerance " + format_double(cmp.redundancy_tolerance) + ")\n";
    std::vector<std::string> header = {"fraction_straggled"};
    for (std::size_t i = 0; i < cmp.labels.size(); ++i) {
        header.push_back("code" + std::to_string(i) + "_s");
        header.push_back("code" + std::to_string(i) + "_error");
        header.push_back("code" + std::to_string(i) + "_method");
    }
    header.push_back("redundancy_mismatch");
    out += csv_join(header);
    for (const CompareRow& row : cmp.rows) {
        std::vector<std::string> cells = {format_double(row.fraction())};
        for (const auto& cell : row.cells) {
            if (cell) {
                cells.push_back(std::to_string(cell->s));
                cells.push_back(format_double(cell->measured));
                cells.push_back(to_string(cell->method));
            } else {
                cells.push_back("");
                cells.push_back("");
                cells.push_back("");
            }
        }
        cells.push_back(cmp.redundancy_mismatch ? "true" : "false");
        out += csv_join(cells);
    }
    return out;
}

inline nlohmann::json compare_to_json(const CompareResult& cmp) {
    nlohmann::json codes = nlohmann::json::array();
    for (std::size_t i = 0; i < cmp.labels.size(); ++i)
        codes.push_back({{"label", cmp.labels[i]}, {"fractional_redundancy", cmp.redundancies[i]}});
    nlohmann::json rows = nlohmann::json::array();
    for (const CompareRow& row : cmp.rows) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& cell : row.cells) {
            if (cell)
                cells.push_back({{"s", cell->s}, {"error", cell->measured}, {"method", to_string(cell->method)}});
            else
                cells.push_back(nullptr);
        }
        rows.push_back({{"fraction_straggled", row.fraction()}, {"cells", std::move(cells)}});
    }
    return {{"codes", std::move(codes)},
            {"redundancy_mismatch", cmp.redundancy_mismatch},
            {"redundancy_tolerance", cmp.redundancy_tolerance},
            {"rows", std::move(rows)}};
}

}  // namespace gradcode
