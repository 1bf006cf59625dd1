// gradcode: construct gradient codes, measure adversarial worst-case errors,
// check them against the closed-form curves and bounds, and run small coded
// gradient-descent experiments. Every subcommand is deterministic for a fixed
// (config, seed) pair.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gradcode/analysis.hpp"
#include "gradcode/bounds.hpp"
#include "gradcode/descriptor.hpp"
#include "gradcode/io.hpp"
#include "gradcode/probbibd.hpp"
#include "gradcode/sim.hpp"

namespace {

using namespace gradcode;

std::uint64_t default_cap() {
    if (const char* env = std::getenv("GRADCODE_CAP")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && v > 0) return v;
    }
    return 1'000'000;
}

// Descriptor arguments accept inline JSON or @path-to-file.
CodeDescriptor load_descriptor(const std::string& arg) {
    if (!arg.empty() && arg.front() == '@') return parse_descriptor_text(read_text_file(arg.substr(1)));
    return parse_descriptor_text(arg);
}

// "0:7", "0,1,5", or a mix ("0:3,7").
std::vector<int> parse_s_range(const std::string& text) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string part = text.substr(pos, comma - pos);
        const std::size_t colon = part.find(':');
        try {
            if (colon == std::string::npos) {
                out.push_back(std::stoi(part));
            } else {
                const int lo = std::stoi(part.substr(0, colon));
                const int hi = std::stoi(part.substr(colon + 1));
                for (int s = lo; s <= hi; ++s) out.push_back(s);
            }
        } catch (const std::exception&) {
            throw ConfigError("cannot parse straggler range \"" + text + "\"");
        }
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("empty straggler range");
    return out;
}

void emit(const std::string& content, const std::string& out_path) {
    if (out_path.empty())
        std::cout << content;
    else
        write_text_file(out_path, content);
}

struct CurveFlags {
    std::string method = "auto";
    long trials = 10'000;
    std::uint64_t seed = 0;
    std::uint64_t cap = default_cap();
    bool strict = false;
    int threads = 0;

    CurveConfig to_config() const {
        CurveConfig cfg;
        if (method == "auto")
            cfg.method = CurveMethod::automatic;
        else if (method == "exhaustive")
            cfg.method = CurveMethod::exhaustive;
        else if (method == "sampled")
            cfg.method = CurveMethod::sampled;
        else
            throw ConfigError("unknown method \"" + method + "\"");
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.cap = cap;
        cfg.strict = strict;
        cfg.threads = threads;
        return cfg;
    }
};

void add_curve_flags(CLI::App* cmd, CurveFlags& flags) {
    cmd->add_option("--method", flags.method, "exhaustive | sampled | auto (default auto)");
    cmd->add_option("--trials", flags.trials, "sampled-search trials per s (default 10000)");
    cmd->add_option("--seed", flags.seed, "PRNG seed (default 0)");
    cmd->add_option("--cap", flags.cap, "max straggler subsets per exhaustive search (env GRADCODE_CAP)");
    cmd->add_flag("--strict", flags.strict, "fail on cap exceedance instead of downgrading to sampled");
    cmd->add_option("--threads", flags.threads, "worker threads for exhaustive search (0 = auto)");
}

int run(int argc, char** argv) {
    CLI::App app{"gradient code construction and worst-case straggler analysis"};
    app.require_subcommand(1);

    // construct
    auto* construct = app.add_subcommand("construct", "build a code and write its matrix file");
    std::string c_descriptor, c_out;
    construct->add_option("--descriptor", c_descriptor, "descriptor JSON (inline or @file)")->required();
    construct->add_option("--out", c_out, "matrix file path")->required();

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "report weights and intersections of a matrix file");
    std::string v_matrix;
    validate_cmd->add_option("--matrix", v_matrix, "matrix file path")->required();

    // error-curve
    auto* curve_cmd = app.add_subcommand("error-curve", "measured worst-case error vs the formula or bound");
    std::string e_descriptor, e_s, e_out, e_format = "csv";
    CurveFlags e_flags;
    curve_cmd->add_option("--descriptor", e_descriptor, "descriptor JSON (inline or @file)")->required();
    curve_cmd->add_option("--s", e_s, "straggler counts, e.g. 0:7 or 0,2,4 (default 0:n)");
    curve_cmd->add_option("--out", e_out, "output path (default stdout)");
    curve_cmd->add_option("--format", e_format, "csv | json (default csv)");
    add_curve_flags(curve_cmd, e_flags);

    // compare
    auto* compare_cmd = app.add_subcommand("compare", "joint error curves keyed by fraction of stragglers");
    std::vector<std::string> m_descriptors;
    std::string m_s, m_fractions, m_out, m_format = "csv";
    double m_tol = 0.05;
    CurveFlags m_flags;
    compare_cmd->add_option("--descriptor", m_descriptors, "descriptor JSON (repeat; at least two)");
    compare_cmd->add_option("--s", m_s, "straggler counts applied to every code");
    compare_cmd->add_option("--fractions", m_fractions, "comma list of fractions, mapped to s = round(f*n) per code");
    compare_cmd->add_option("--redundancy-tol", m_tol, "max allowed spread of r/n before flagging (default 0.05)");
    compare_cmd->add_option("--out", m_out, "output path (default stdout)");
    compare_cmd->add_option("--format", m_format, "csv | json (default csv)");
    add_curve_flags(compare_cmd, m_flags);

    // mc-expected
    auto* mc_cmd = app.add_subcommand("mc-expected", "Monte-Carlo expected error of a probabilistic code");
    int mc_n = 0, mc_k = 0, mc_l = 0, mc_lambda = 0, mc_s = 0;
    long mc_trials = 10'000;
    std::uint64_t mc_seed = 0;
    std::string mc_decoder = "optimal", mc_out;
    mc_cmd->add_option("--n", mc_n, "workers")->required();
    mc_cmd->add_option("--k", mc_k, "data pieces")->required();
    mc_cmd->add_option("--l", mc_l, "expected worker load")->required();
    mc_cmd->add_option("--lambda", mc_lambda, "expected pairwise intersections")->required();
    mc_cmd->add_option("--s", mc_s, "straggler count")->required();
    mc_cmd->add_option("--trials", mc_trials, "Monte-Carlo trials (default 10000)");
    mc_cmd->add_option("--seed", mc_seed, "PRNG seed (default 0)");
    mc_cmd->add_option("--decoder", mc_decoder, "optimal | bibd_constant (default optimal)");
    mc_cmd->add_option("--out", mc_out, "output path (default stdout)");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "coded distributed gradient descent on synthetic data");
    std::string s_config, s_out_csv, s_out_json;
    sim_cmd->add_option("--config", s_config, "config JSON (inline or @file)")->required();
    sim_cmd->add_option("--out-csv", s_out_csv, "time-series CSV path (default stdout)");
    sim_cmd->add_option("--out-json", s_out_json, "summary JSON path (default stdout)");

    app.parse(argc, argv);

    if (*construct) {
        const CodeDescriptor d = load_descriptor(c_descriptor);
        const EncodingMatrix g = build_code(d);
        write_text_file(c_out, matrix_to_text(g));
        nlohmann::json report = validation_report_to_json(validate(g));
        report["descriptor"] = descriptor_to_json(d);
        report["out"] = c_out;
        std::cout << report.dump(2) << "\n";
        return 0;
    }
    if (*validate_cmd) {
        const EncodingMatrix g = matrix_from_text(read_text_file(v_matrix));
        std::cout << validation_report_to_json(validate(g)).dump(2) << "\n";
        return 0;
    }
    if (*curve_cmd) {
        const CodeDescriptor d = load_descriptor(e_descriptor);
        const EncodingMatrix g = build_code(d);
        std::vector<int> s_values;
        if (e_s.empty())
            for (int s = 0; s <= g.cols(); ++s) s_values.push_back(s);
        else
            s_values = parse_s_range(e_s);
        const std::vector<CurvePoint> pts = error_curve(d, g, s_values, e_flags.to_config());
        if (e_format == "csv")
            emit(curve_to_csv(pts), e_out);
        else if (e_format == "json")
            emit(curve_to_json(pts).dump(2) + "\n", e_out);
        else
            throw ConfigError("unknown format \"" + e_format + "\"");
        return 0;
    }
    if (*compare_cmd) {
        if (m_descriptors.size() < 2) throw ConfigError("compare needs at least two --descriptor arguments");
        std::vector<CodeDescriptor> ds;
        for (const std::string& text : m_descriptors) ds.push_back(load_descriptor(text));
        std::vector<std::vector<int>> s_lists;
        for (const CodeDescriptor& d : ds) {
            const auto params = nominal_params(d);
            if (!params) throw ConfigError("cannot derive worker count for a compare descriptor");
            std::vector<int> list;
            if (!m_s.empty()) {
                list = parse_s_range(m_s);
            } else if (!m_fractions.empty()) {
                std::size_t pos = 0;
                while (pos < m_fractions.size()) {
                    std::size_t comma = m_fractions.find(',', pos);
                    if (comma == std::string::npos) comma = m_fractions.size();
                    const double f = std::stod(m_fractions.substr(pos, comma - pos));
                    list.push_back(static_cast<int>(std::llround(f * params->n)));
                    pos = comma + 1;
                }
            } else {
                for (int s = 0; s <= params->n; ++s) list.push_back(s);
            }
            for (int s : list)
                if (s < 0 || s > params->n) throw ConfigError("straggler count out of range for " + descriptor_label(d));
            s_lists.push_back(std::move(list));
        }
        const CompareResult cmp = compare_codes(ds, s_lists, m_flags.to_config(), m_tol);
        if (cmp.redundancy_mismatch)
            std::cerr << "warning: fractional redundancies differ by more than " << m_tol << "\n";
        if (m_format == "csv")
            emit(compare_to_csv(cmp), m_out);
        else if (m_format == "json")
            emit(compare_to_json(cmp).dump(2) + "\n", m_out);
        else
            throw ConfigError("unknown format \"" + m_format + "\"");
        return 0;
    }
    if (*mc_cmd) {
        const RowDistribution dist = solve_distribution(mc_n, mc_k, mc_l, mc_lambda);
        McDecoder dec;
        if (mc_decoder == "optimal")
            dec = McDecoder::optimal;
        else if (mc_decoder == "bibd_constant")
            dec = McDecoder::bibd_constant;
        else
            throw ConfigError("unknown decoder \"" + mc_decoder + "\"");
        const McEstimate est = expected_error_mc(dist, mc_k, mc_s, mc_trials, mc_seed, dec);
        nlohmann::json out = {{"params", {{"n", mc_n}, {"k", mc_k}, {"l", mc_l}, {"lambda", mc_lambda}}},
                              {"s", mc_s},
                              {"trials", est.trials},
                              {"mean", est.mean},
                              {"stderr", est.sem},
                              {"bound", bibd_error(mc_n, mc_k, mc_l, mc_lambda, mc_s)},
                              {"decoder", mc_decoder}};
        emit(out.dump(2) + "\n", mc_out);
        return 0;
    }
    if (*sim_cmd) {
        std::string text = s_config;
        if (!text.empty() && text.front() == '@') text = read_text_file(text.substr(1));
        nlohmann::json config = nlohmann::json::parse(text, nullptr, false);
        if (config.is_discarded()) throw ConfigError("simulation config is not valid JSON");
        const ExperimentReport report = run_experiment(config);
        if (!s_out_csv.empty()) write_text_file(s_out_csv, experiment_csv(report));
        const std::string summary = experiment_json(report).dump(2) + "\n";
        if (!s_out_json.empty())
            write_text_file(s_out_json, summary);
        else
            std::cout << summary;
        if (s_out_csv.empty() && s_out_json.empty()) std::cout << experiment_csv(report);
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;  // --help
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const gradcode::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const gradcode::CapExceeded& e) {
        std::cerr << "cap exceeded: " << e.what() << "\n";
        return 4;
    } catch (const gradcode::SizeOverflow& e) {
        std::cerr << "size overflow: " << e.what() << "\n";
        return 4;
    } catch (const gradcode::Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const gradcode::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
