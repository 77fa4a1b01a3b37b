#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "ceh/histories.hpp"

namespace ceh {

// Which weight functional a computation refers to: the product-formula one
// on homogeneous histories, or its linear extension on tensor effects.
enum class WeightKind { first_kind, extended };

struct DecoherenceContext {
    Scenario scenario;
    WeightKind kind = WeightKind::extended;
};

// d(u, v) = tr(C(u) rho C(v)^dagger) on homogeneous histories.
inline Complex decoherence_weight(const Scenario& s, const HomogeneousEffectHistory& u,
                                  const HomogeneousEffectHistory& v) {
    return trace_sandwich(class_operator(s, u), s.initial_state(), class_operator(s, v));
}

// The extended functional on tensor effects, linear in each slot.
inline Complex decoherence_weight(const Scenario& s, const TensorHistory& a, const TensorHistory& b) {
    return trace_sandwich(class_operator(s, a), s.initial_state(), class_operator(s, b));
}

using AnyHistory = std::variant<HomogeneousEffectHistory, TensorHistory>;

struct DecoherenceMatrix {
    WeightKind kind = WeightKind::extended;
    std::vector<std::string> labels;
    std::size_t size = 0;
    std::vector<Complex> entries;  // row-major, entries[i*size+j] = d(h_i, h_j)

    const Complex& at(std::size_t i, std::size_t j) const { return entries[i * size + j]; }
};

// Tabulates d over a family of histories. The first kind only accepts
// homogeneous entries; the extended kind maps homogeneous entries through
// their tensor image first.
inline DecoherenceMatrix decoherence_matrix(const DecoherenceContext& ctx,
                                            const std::vector<AnyHistory>& family,
                                            std::vector<std::string> labels = {}) {
    const std::size_t n = family.size();
    if (n == 0) throw Error("arity mismatch", "empty family");
    if (!labels.empty() && labels.size() != n) throw Error("arity mismatch");
    DecoherenceMatrix out;
    out.kind = ctx.kind;
    out.size = n;
    if (labels.empty())
        for (std::size_t i = 0; i < n; ++i) labels.push_back("h" + std::to_string(i));
    out.labels = std::move(labels);
    std::vector<ComplexMatrix> ops;
    ops.reserve(n);
    for (const AnyHistory& h : family) {
        if (ctx.kind == WeightKind::first_kind) {
            const auto* hom = std::get_if<HomogeneousEffectHistory>(&h);
            if (!hom) throw Error("mixed history kinds", "first kind requires homogeneous histories");
            ops.push_back(class_operator(ctx.scenario, *hom));
        } else if (const auto* hom = std::get_if<HomogeneousEffectHistory>(&h)) {
            ops.push_back(class_operator(ctx.scenario, to_tensor_history(*hom)));
        } else {
            ops.push_back(class_operator(ctx.scenario, std::get<TensorHistory>(h)));
        }
    }
    out.entries.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.entries[i * n + j] = trace_sandwich(ops[i], ctx.scenario.initial_state(), ops[j]);
    return out;
}

}  // namespace ceh
