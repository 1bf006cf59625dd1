#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradcode/analysis.hpp"
#include "gradcode/decoding.hpp"
#include "gradcode/descriptor.hpp"
#include "gradcode/errors.hpp"
#include "gradcode/matrix.hpp"
#include "gradcode/rng.hpp"
#include "gradcode/worstcase.hpp"

namespace gradcode {

/// Synthetic linear-regression data: y = x^T theta* + noise * eps, one sample
/// per data piece.
struct Dataset {
    int k = 0;
    int p = 0;
    std::vector<double> x;           // k x p, row-major
    std::vector<double> y;           // length k
    std::vector<double> theta_star;  // hidden model, length p
    double noise = 0.0;
};

inline Dataset make_dataset(int k, int p, double noise, std::uint64_t seed) {
    if (k < 1 || p < 1) throw InvalidParams("make_dataset needs k >= 1 and p >= 1");
    Dataset d;
    d.k = k;
    d.p = p;
    d.noise = noise;
    d.x.resize(static_cast<std::size_t>(k) * p);
    d.y.resize(static_cast<std::size_t>(k));
    d.theta_star.resize(static_cast<std::size_t>(p));
    Pcg32 model_rng(seed, 0);
    for (double& v : d.theta_star) v = model_rng.next_normal();
    Pcg32 data_rng(seed, 1);
    Pcg32 noise_rng(seed, 2);
    for (int i = 0; i < k; ++i) {
        double dot = 0.0;
        for (int c = 0; c < p; ++c) {
            const double v = data_rng.next_normal();
            d.x[static_cast<std::size_t>(i) * p + c] = v;
            dot += v * d.theta_star[static_cast<std::size_t>(c)];
        }
        d.y[static_cast<std::size_t>(i)] = dot + noise * noise_rng.next_normal();
    }
    return d;
}

/// Mean squared-residual loss (1/k) sum_i (1/2)(x_i^T theta - y_i)^2.
inline double dataset_loss(const Dataset& d, std::span<const double> theta) {
    double total = 0.0;
    for (int i = 0; i < d.k; ++i) {
        double dot = 0.0;
        for (int c = 0; c < d.p; ++c) dot += d.x[static_cast<std::size_t>(i) * d.p + c] * theta[static_cast<std::size_t>(c)];
        const double r = dot - d.y[static_cast<std::size_t>(i)];
        total += 0.5 * r * r;
    }
    return total / d.k;
}

/// Per-piece loss gradients at theta, piece i occupying out[i*p .. i*p+p).
inline void piece_gradients(const Dataset& d, std::span<const double> theta, std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(d.k) * d.p, 0.0);
    for (int i = 0; i < d.k; ++i) {
        double dot = 0.0;
        for (int c = 0; c < d.p; ++c) dot += d.x[static_cast<std::size_t>(i) * d.p + c] * theta[static_cast<std::size_t>(c)];
        const double r = dot - d.y[static_cast<std::size_t>(i)];
        for (int c = 0; c < d.p; ++c) out[static_cast<std::size_t>(i) * d.p + c] = r * d.x[static_cast<std::size_t>(i) * d.p + c];
    }
}

/// Largest-eigenvalue estimate of the loss Hessian (1/k) X^T X by power
/// iteration; the default learning rate is 1 / (2 * estimate).
inline double lipschitz_estimate(const Dataset& d) {
    std::vector<double> v(static_cast<std::size_t>(d.p), 1.0 / std::sqrt(static_cast<double>(d.p)));
    std::vector<double> xv(static_cast<std::size_t>(d.k));
    std::vector<double> hv(static_cast<std::size_t>(d.p));
    double eig = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
        for (int i = 0; i < d.k; ++i) {
            double dot = 0.0;
            for (int c = 0; c < d.p; ++c) dot += d.x[static_cast<std::size_t>(i) * d.p + c] * v[static_cast<std::size_t>(c)];
            xv[static_cast<std::size_t>(i)] = dot;
        }
        std::fill(hv.begin(), hv.end(), 0.0);
        for (int i = 0; i < d.k; ++i)
            for (int c = 0; c < d.p; ++c)
                hv[static_cast<std::size_t>(c)] += d.x[static_cast<std::size_t>(i) * d.p + c] * xv[static_cast<std::size_t>(i)];
        double norm = 0.0;
        for (int c = 0; c < d.p; ++c) {
            hv[static_cast<std::size_t>(c)] /= d.k;
            norm += hv[static_cast<std::size_t>(c)] * hv[static_cast<std::size_t>(c)];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) return 1.0;
        eig = norm;
        for (int c = 0; c < d.p; ++c) v[static_cast<std::size_t>(c)] = hv[static_cast<std::size_t>(c)] / norm;
    }
    return eig;
}

struct StragglerPolicy {
    enum class Kind { worst_case, random_uniform, fixed };
    Kind kind = Kind::worst_case;
    int s = 0;
    std::uint64_t seed = 0;        // random_uniform draws scenario t from stream t
    StragglerScenario scenario;    // fixed
};

enum class SimDecoder { optimal, bibd_constant };

struct GDState {
    std::vector<double> theta;
    int t = 0;
    double learning_rate = 0.0;
    std::vector<double> loss_history;            // length t+1
    std::vector<double> deviation_history;       // ||theta_t - theta_t^exact||, length t+1
    std::vector<double> grad_deviation_history;  // per-step ||decoded - exact gradient sum||, length t
};

/// One code's distributed-GD run. The adversarial scenario is resolved once at
/// construction (the worst case does not depend on the gradients); each step
/// computes worker sums f G, drops straggled columns, decodes, and applies the
/// update theta <- theta - (alpha/k) * decoded_sum.
class Simulation {
public:
    Simulation(Dataset data, EncodingMatrix g, StragglerPolicy policy, SimDecoder decoder,
               double learning_rate = 0.0, std::uint64_t search_seed = 0)
        : data_(std::move(data)), g_(std::move(g)), policy_(std::move(policy)), decoder_(decoder) {
        if (data_.k != g_.rows()) throw InvalidParams("dataset piece count must equal the code's k");
        if (policy_.kind != StragglerPolicy::Kind::fixed && policy_.s >= g_.cols())
            throw PolicyInfeasible("straggler policy needs s < n");
        if (policy_.kind == StragglerPolicy::Kind::fixed && policy_.scenario.s() >= g_.cols())
            throw PolicyInfeasible("fixed scenario straggles every worker");
        alpha_ = learning_rate > 0.0 ? learning_rate : 1.0 / (2.0 * lipschitz_estimate(data_));

        if (decoder_ == SimDecoder::bibd_constant) {
            const ValidationReport rep = validate(g_);
            if (!rep.is_lambda_uniform_gc() || *rep.uniform_column_weight <= *rep.uniform_lambda)
                throw InvalidParams("bibd_constant decoder needs a lambda-uniform code with l > lambda");
            params_ = rep.params();
        }

        switch (policy_.kind) {
            case StragglerPolicy::Kind::worst_case: {
                if (binomial(g_.cols(), policy_.s) <= SearchOptions{}.cap) {
                    fixed_scenario_ = exhaustive_worst_case(g_, policy_.s).witness;
                } else {
                    fixed_scenario_ = sampled_worst_case(g_, policy_.s, 2000, search_seed).witness;
                }
                break;
            }
            case StragglerPolicy::Kind::fixed:
                fixed_scenario_ = policy_.scenario;
                if (fixed_scenario_.n != g_.cols()) throw PolicyInfeasible("fixed scenario has the wrong worker count");
                break;
            case StragglerPolicy::Kind::random_uniform:
                break;
        }
    }

    const Dataset& data() const { return data_; }
    const EncodingMatrix& code() const { return g_; }
    double learning_rate() const { return alpha_; }
    const StragglerScenario& resolved_scenario() const { return fixed_scenario_; }

    GDState initial_state(std::vector<double> theta0 = {}) {
        GDState st;
        st.theta = theta0.empty() ? std::vector<double>(static_cast<std::size_t>(data_.p), 0.0) : std::move(theta0);
        st.t = 0;
        st.learning_rate = alpha_;
        st.loss_history.push_back(dataset_loss(data_, st.theta));
        st.deviation_history.push_back(0.0);
        reference_.assign(1, st.theta);
        return st;
    }

    GDState step(const GDState& state) {
        const int k = data_.k, p = data_.p;
        std::vector<double> grads;
        piece_gradients(data_, state.theta, grads);

        std::vector<double> exact_sum(static_cast<std::size_t>(p), 0.0);
        for (int i = 0; i < k; ++i)
            for (int c = 0; c < p; ++c) exact_sum[static_cast<std::size_t>(c)] += grads[static_cast<std::size_t>(i) * p + c];

        const StragglerScenario scenario = scenario_for_step(state.t);
        const std::vector<int> survivors = scenario.survivors();
        const std::vector<double> v = decoding_vector(scenario, survivors);
        const std::vector<double> approx = decode_sum(grads, survivors, v);

        GDState next;
        next.learning_rate = alpha_;
        next.t = state.t + 1;
        next.theta = state.theta;
        for (int c = 0; c < p; ++c)
            next.theta[static_cast<std::size_t>(c)] -= alpha_ / k * approx[static_cast<std::size_t>(c)];

        double dev = 0.0;
        for (int c = 0; c < p; ++c) {
            const double diff = approx[static_cast<std::size_t>(c)] - exact_sum[static_cast<std::size_t>(c)];
            dev += diff * diff;
        }

        extend_reference(next.t);
        double theta_dev = 0.0;
        for (int c = 0; c < p; ++c) {
            const double diff = next.theta[static_cast<std::size_t>(c)] - reference_[static_cast<std::size_t>(next.t)][static_cast<std::size_t>(c)];
            theta_dev += diff * diff;
        }

        next.loss_history = state.loss_history;
        next.deviation_history = state.deviation_history;
        next.grad_deviation_history = state.grad_deviation_history;
        next.loss_history.push_back(dataset_loss(data_, next.theta));
        next.deviation_history.push_back(std::sqrt(theta_dev));
        next.grad_deviation_history.push_back(std::sqrt(dev));
        if (!std::isfinite(next.loss_history.back())) throw NumericalFailure("loss diverged; lower the learning rate");
        return next;
    }

    /// Decoded approximation of the gradient sum for externally supplied
    /// per-piece gradients (piece i at grads[i*p .. i*p+p)).
    std::vector<double> decode_sum(const std::vector<double>& grads, std::span<const int> survivors,
                                   std::span<const double> v) const {
        const int k = data_.k;
        const int p = static_cast<int>(grads.size()) / k;
        std::vector<double> approx(static_cast<std::size_t>(p), 0.0);
        for (std::size_t idx = 0; idx < survivors.size(); ++idx) {
            const int j = survivors[idx];
            for (int i = 0; i < k; ++i) {
                if (!g_.at(i, j)) continue;
                for (int c = 0; c < p; ++c)
                    approx[static_cast<std::size_t>(c)] += v[idx] * grads[static_cast<std::size_t>(i) * p + c];
            }
        }
        return approx;
    }

    std::vector<double> decoding_vector(const StragglerScenario& scenario, std::span<const int> survivors) {
        if (decoder_ == SimDecoder::bibd_constant)
            return closed_form_decoding(params_.l, *params_.lambda, params_.n, scenario.s());
        auto it = decoder_cache_.find(scenario.stragglers);
        if (it != decoder_cache_.end()) return it->second;
        std::vector<double> v = optimal_decoding(g_, survivors);
        decoder_cache_.emplace(scenario.stragglers, v);
        return v;
    }

private:
    StragglerScenario scenario_for_step(int t) const {
        if (policy_.kind == StragglerPolicy::Kind::random_uniform) {
            Pcg32 rng(policy_.seed, static_cast<std::uint64_t>(t));
            return StragglerScenario::make(g_.cols(), sample_subset(rng, g_.cols(), policy_.s));
        }
        return fixed_scenario_;
    }

    void extend_reference(int t) {
        while (static_cast<int>(reference_.size()) <= t) {
            const std::vector<double>& prev = reference_.back();
            std::vector<double> grads;
            piece_gradients(data_, prev, grads);
            std::vector<double> next = prev;
            for (int i = 0; i < data_.k; ++i)
                for (int c = 0; c < data_.p; ++c)
                    next[static_cast<std::size_t>(c)] -= alpha_ / data_.k * grads[static_cast<std::size_t>(i) * data_.p + c];
            reference_.push_back(std::move(next));
        }
    }

    Dataset data_;
    EncodingMatrix g_;
    StragglerPolicy policy_;
    SimDecoder decoder_;
    double alpha_ = 0.0;
    CodeParams params_;
    StragglerScenario fixed_scenario_;
    std::vector<std::vector<double>> reference_;
    std::map<std::vector<int>, std::vector<double>> decoder_cache_;
};

struct ExperimentRun {
    std::string label;
    double fractional_redundancy = 0.0;
    std::vector<double> loss;
    std::vector<double> deviation;
    std::vector<double> grad_deviation;
};

struct ExperimentReport {
    std::vector<ExperimentRun> runs;
    bool redundancy_mismatch = false;
    double redundancy_tolerance = 0.05;
    int iterations = 0;
};

/// Config document:
///   {"descriptors":[{...}], "iterations":20,
///    "policy":{"type":"worst_case"|"random"|"fixed","s":1,"seed":0,"stragglers":[...]},
///    "decoder":"optimal"|"bibd_constant",
///    "dataset":{"p":5,"noise":0.1,"seed":7},
///    "learning_rate":0.0, "redundancy_tolerance":0.05}
inline ExperimentReport run_experiment(const nlohmann::json& config) {
    if (!config.is_object()) throw ConfigError("simulation config must be a JSON object");
    std::vector<CodeDescriptor> descriptors;
    if (config.contains("descriptors")) {
        for (const auto& j : config["descriptors"]) descriptors.push_back(descriptor_from_json(j));
    } else if (config.contains("descriptor")) {
        descriptors.push_back(descriptor_from_json(config["descriptor"]));
    }
    if (descriptors.empty()) throw ConfigError("simulation config needs \"descriptor\" or \"descriptors\"");

    const int iterations = config.value("iterations", 20);
    if (iterations < 0) throw ConfigError("iterations must be >= 0");

    StragglerPolicy policy;
    if (config.contains("policy")) {
        const auto& pj = config["policy"];
        const std::string type = pj.value("type", "worst_case");
        if (type == "worst_case")
            policy.kind = StragglerPolicy::Kind::worst_case;
        else if (type == "random")
            policy.kind = StragglerPolicy::Kind::random_uniform;
        else if (type == "fixed")
            policy.kind = StragglerPolicy::Kind::fixed;
        else
            throw ConfigError("unknown policy type \"" + type + "\"");
        policy.s = pj.value("s", 0);
        policy.seed = pj.value("seed", std::uint64_t{0});
        if (policy.kind == StragglerPolicy::Kind::fixed) {
            if (!pj.contains("stragglers")) throw ConfigError("fixed policy needs \"stragglers\"");
            policy.scenario.stragglers = pj["stragglers"].get<std::vector<int>>();
        }
    }

    const std::string decoder_name = config.value("decoder", "optimal");
    SimDecoder decoder;
    if (decoder_name == "optimal")
        decoder = SimDecoder::optimal;
    else if (decoder_name == "bibd_constant")
        decoder = SimDecoder::bibd_constant;
    else
        throw ConfigError("unknown decoder \"" + decoder_name + "\"");

    int p = 5;
    double noise = 0.1;
    std::uint64_t data_seed = 7;
    if (config.contains("dataset")) {
        const auto& dj = config["dataset"];
        p = dj.value("p", 5);
        noise = dj.value("noise", 0.1);
        data_seed = dj.value("seed", std::uint64_t{7});
    }
    const double learning_rate = config.value("learning_rate", 0.0);

    ExperimentReport report;
    report.iterations = iterations;
    report.redundancy_tolerance = config.value("redundancy_tolerance", 0.05);

    for (const CodeDescriptor& d : descriptors) {
        EncodingMatrix g = build_code(d);
        StragglerPolicy run_policy = policy;
        if (run_policy.kind == StragglerPolicy::Kind::fixed)
            run_policy.scenario = StragglerScenario::make(g.cols(), run_policy.scenario.stragglers);
        Simulation sim(make_dataset(g.rows(), p, noise, data_seed), g, run_policy, decoder, learning_rate);
        GDState st = sim.initial_state();
        for (int t = 0; t < iterations; ++t) st = sim.step(st);
        ExperimentRun run;
        run.label = descriptor_label(d);
        run.fractional_redundancy = fractional_redundancy(d);
        run.loss = st.loss_history;
        run.deviation = st.deviation_history;
        run.grad_deviation = st.grad_deviation_history;
        report.runs.push_back(std::move(run));
    }
    for (std::size_t a = 0; a < report.runs.size(); ++a)
        for (std::size_t b = a + 1; b < report.runs.size(); ++b)
            if (std::fabs(report.runs[a].fractional_redundancy - report.runs[b].fractional_redundancy) >
                report.redundancy_tolerance)
                report.redundancy_mismatch = true;
    return report;
}

inline std::string experiment_csv(const ExperimentReport& report) {
    std::string out = "code,t,loss,deviation_from_exact_gd,grad_deviation\n";
    for (std::size_t r = 0; r < report.runs.size(); ++r) {
        const ExperimentRun& run = report.runs[r];
        for (std::size_t t = 0; t < run.loss.size(); ++t) {
            out += csv_join({"code" + std::to_string(r), std::to_string(t), format_double(run.loss[t]),
                             format_double(run.deviation[t]),
                             t == 0 ? "" : format_double(run.grad_deviation[t - 1])});
        }
    }
    return out;
}

inline nlohmann::json experiment_json(const ExperimentReport& report) {
    nlohmann::json runs = nlohmann::json::array();
    for (const ExperimentRun& run : report.runs) {
        runs.push_back({{"code", run.label},
                        {"fractional_redundancy", run.fractional_redundancy},
                        {"final_loss", run.loss.back()},
                        {"final_deviation", run.deviation.back()},
                        {"loss", run.loss},
                        {"deviation_from_exact_gd", run.deviation},
                        {"grad_deviation", run.grad_deviation}});
    }
    return {{"iterations", report.iterations},
            {"redundancy_mismatch", report.redundancy_mismatch},
            {"redundancy_tolerance", report.redundancy_tolerance},
            {"runs", std::move(runs)}};
}

}  // namespace gradcode
