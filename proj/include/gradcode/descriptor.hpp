#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gradcode/codes.hpp"
#include "gradcode/errors.hpp"
#include "gradcode/matrix.hpp"
#include "gradcode/probbibd.hpp"

namespace gradcode {

struct CodeDescriptor;
using DescriptorPtr = std::shared_ptr<const CodeDescriptor>;

struct FrcSpec {
    int n = 0, k = 0, l = 0, r = 0;
};
struct CatalogBibdSpec {
    std::string name;
};
struct ProbBibdSpec {
    int n = 0, k = 0, l = 0, lambda = 0;
    std::uint64_t seed = 0;
};
struct KroneckerSpec {
    DescriptorPtr left;
    DescriptorPtr right;
};

/// Declarative recipe for a code. JSON schema (nested for kronecker):
///   {"type":"frc","n":6,"k":6,"l":2,"r":2}
///   {"type":"bibd","name":"fano"}
///   {"type":"pbibd","n":7,"k":7,"l":3,"lambda":2,"seed":1}
///   {"type":"kronecker","left":{...},"right":{...}}
struct CodeDescriptor {
    std::variant<FrcSpec, CatalogBibdSpec, ProbBibdSpec, KroneckerSpec> value;
};

inline CodeDescriptor descriptor_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw ConfigError("descriptor must be a JSON object with a string \"type\"");
    const std::string type = j["type"].get<std::string>();
    auto require_int = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_number_integer())
            throw ConfigError("descriptor of type \"" + type + "\" needs integer field \"" + key + "\"");
        return j[key].get<int>();
    };
    if (type == "frc") {
        FrcSpec f{require_int("n"), require_int("k"), require_int("l"), require_int("r")};
        return CodeDescriptor{f};
    }
    if (type == "bibd") {
        if (!j.contains("name") || !j["name"].is_string())
            throw ConfigError("descriptor of type \"bibd\" needs string field \"name\"");
        return CodeDescriptor{CatalogBibdSpec{j["name"].get<std::string>()}};
    }
    if (type == "pbibd") {
        ProbBibdSpec p;
        p.n = require_int("n");
        p.k = require_int("k");
        p.l = require_int("l");
        p.lambda = require_int("lambda");
        p.seed = j.value("seed", std::uint64_t{0});
        return CodeDescriptor{p};
    }
    if (type == "kronecker") {
        if (!j.contains("left") || !j.contains("right"))
            throw ConfigError("descriptor of type \"kronecker\" needs \"left\" and \"right\"");
        KroneckerSpec k;
        k.left = std::make_shared<const CodeDescriptor>(descriptor_from_json(j["left"]));
        k.right = std::make_shared<const CodeDescriptor>(descriptor_from_json(j["right"]));
        return CodeDescriptor{k};
    }
    throw ConfigError("unknown descriptor type \"" + type + "\"");
}

inline nlohmann::json descriptor_to_json(const CodeDescriptor& d) {
    nlohmann::json j;
    if (const auto* f = std::get_if<FrcSpec>(&d.value)) {
        j = {{"type", "frc"}, {"n", f->n}, {"k", f->k}, {"l", f->l}, {"r", f->r}};
    } else if (const auto* b = std::get_if<CatalogBibdSpec>(&d.value)) {
        j = {{"type", "bibd"}, {"name", b->name}};
    } else if (const auto* p = std::get_if<ProbBibdSpec>(&d.value)) {
        j = {{"type", "pbibd"}, {"n", p->n}, {"k", p->k}, {"l", p->l}, {"lambda", p->lambda}, {"seed", p->seed}};
    } else if (const auto* kr = std::get_if<KroneckerSpec>(&d.value)) {
        j = {{"type", "kronecker"}, {"left", descriptor_to_json(*kr->left)}, {"right", descriptor_to_json(*kr->right)}};
    }
    return j;
}

inline CodeDescriptor parse_descriptor_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("descriptor is not valid JSON");
    return descriptor_from_json(j);
}

inline std::string descriptor_label(const CodeDescriptor& d) {
    if (const auto* f = std::get_if<FrcSpec>(&d.value))
        return "frc(" + std::to_string(f->n) + "," + std::to_string(f->k) + "," + std::to_string(f->l) + "," +
               std::to_string(f->r) + ")";
    if (const auto* b = std::get_if<CatalogBibdSpec>(&d.value)) return "bibd(" + b->name + ")";
    if (const auto* p = std::get_if<ProbBibdSpec>(&d.value))
        return "pbibd(" + std::to_string(p->n) + "," + std::to_string(p->k) + "," + std::to_string(p->l) + "," +
               std::to_string(p->lambda) + ";seed=" + std::to_string(p->seed) + ")";
    const auto& kr = std::get<KroneckerSpec>(d.value);
    return "kron(" + descriptor_label(*kr.left) + "," + descriptor_label(*kr.right) + ")";
}

inline EncodingMatrix build_code(const CodeDescriptor& d, std::uint64_t entry_cap = kDefaultEntryCap) {
    if (const auto* f = std::get_if<FrcSpec>(&d.value)) {
        if (static_cast<std::uint64_t>(f->n) * static_cast<std::uint64_t>(f->k) > entry_cap)
            throw SizeOverflow("frc size exceeds the entry cap");
        return build_frc(f->n, f->k, f->l, f->r);
    }
    if (const auto* b = std::get_if<CatalogBibdSpec>(&d.value)) return build_catalog_bibd(b->name).first;
    if (const auto* p = std::get_if<ProbBibdSpec>(&d.value)) {
        RowDistribution dist = solve_distribution(p->n, p->k, p->l, p->lambda);
        return sample_code(dist, p->k, p->seed);
    }
    const auto& kr = std::get<KroneckerSpec>(d.value);
    return kronecker(build_code(*kr.left, entry_cap), build_code(*kr.right, entry_cap), entry_cap);
}

/// Declared (n,k,l,r[,lambda]) parameters, composed for products. For pbibd
/// the values are expectations and r is left at the integer-rounded n*l/k.
/// Lambda survives composition only when both factors carry it, in which case
/// it is the pairwise intersection of "otherwise" worker pairs (the product is
/// generally not lambda-uniform, so it is dropped).
inline std::optional<CodeParams> nominal_params(const CodeDescriptor& d) {
    if (const auto* f = std::get_if<FrcSpec>(&d.value)) {
        CodeParams p;
        p.n = f->n;
        p.k = f->k;
        p.l = f->l;
        p.r = f->r;
        return p;
    }
    if (const auto* b = std::get_if<CatalogBibdSpec>(&d.value)) return build_catalog_bibd(b->name).second;
    if (const auto* pb = std::get_if<ProbBibdSpec>(&d.value)) {
        CodeParams p;
        p.n = pb->n;
        p.k = pb->k;
        p.l = pb->l;
        p.r = static_cast<int>((static_cast<long long>(pb->n) * pb->l + pb->k / 2) / pb->k);
        p.lambda = pb->lambda;
        return p;
    }
    const auto& kr = std::get<KroneckerSpec>(d.value);
    auto left = nominal_params(*kr.left);
    auto right = nominal_params(*kr.right);
    if (!left || !right) return std::nullopt;
    CodeParams p;
    p.n = left->n * right->n;
    p.k = left->k * right->k;
    p.l = left->l * right->l;
    p.r = left->r * right->r;
    return p;
}

/// FRC parameters of a descriptor whose tree is built purely from FRCs.
inline std::optional<CodeParams> pure_frc_params(const CodeDescriptor& d) {
    if (const auto* f = std::get_if<FrcSpec>(&d.value)) {
        CodeParams p;
        p.n = f->n;
        p.k = f->k;
        p.l = f->l;
        p.r = f->r;
        return p;
    }
    if (const auto* kr = std::get_if<KroneckerSpec>(&d.value)) {
        auto left = pure_frc_params(*kr->left);
        auto right = pure_frc_params(*kr->right);
        if (!left || !right) return std::nullopt;
        CodeParams p;
        p.n = left->n * right->n;
        p.k = left->k * right->k;
        p.l = left->l * right->l;
        p.r = left->r * right->r;
        return p;
    }
    return std::nullopt;
}

inline double fractional_redundancy(const CodeDescriptor& d) {
    if (const auto* pb = std::get_if<ProbBibdSpec>(&d.value))
        return static_cast<double>(pb->n) * pb->l / (static_cast<double>(pb->k) * pb->n);
    auto p = nominal_params(d);
    if (!p) throw InvalidParams("descriptor has no derivable parameters");
    return p->fractional_redundancy();
}

}  // namespace gradcode
