#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ceh/decoherence.hpp"

namespace ceh {

// Hard limits keeping the exhaustive lattice checks tractable.
inline constexpr std::size_t kMaxLatticeAtoms = 10;
inline constexpr std::size_t kMaxLatticeStorage = std::size_t{1} << 24;

// Distinctness threshold for valuation images (Frobenius distance).
inline constexpr double kInjectivityTol = 1e-9;

struct LatticeOptions {
    std::vector<std::string> labels;          // defaults to a0, a1, ...
    std::optional<TensorHistory> zero_image;  // image of the lattice zero, default 0
    double tol = 1e-9;                        // working consistency tolerance
};

// A finite Boolean lattice of propositions about one scenario, realized by a
// valuation into tensor effects: the canonical map sends a subset of atoms to
// the zero image plus the sum of its atom effects. Elements are atom-index
// bitmasks; 0 is the lattice zero, full() the lattice unit.
class BooleanLattice {
public:
    using Element = std::uint32_t;
    using Options = LatticeOptions;

    BooleanLattice(const std::vector<TensorHistory>& atoms, Options opts = Options())
        : tol_(opts.tol) {
        const std::size_t n = atoms.size();
        if (n == 0) throw Error("arity mismatch", "lattice needs at least one atom");
        if (n > kMaxLatticeAtoms) throw Error("too many atoms");
        slot_dim_ = atoms.front().slot_dim();
        support_ = atoms.front().support();
        for (const TensorHistory& a : atoms) {
            if (a.slot_dim() != slot_dim_) throw Error("dimension mismatch");
            support_ = support_union(support_, a.support());
        }
        if (opts.zero_image) {
            if (opts.zero_image->slot_dim() != slot_dim_) throw Error("dimension mismatch");
            support_ = support_union(support_, opts.zero_image->support());
        }
        if (opts.labels.empty())
            for (std::size_t i = 0; i < n; ++i) labels_.push_back("a" + std::to_string(i));
        else if (opts.labels.size() != n)
            throw Error("arity mismatch", "label count differs from atom count");
        else
            labels_ = std::move(opts.labels);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (labels_[i] == labels_[j]) throw Error("arity mismatch", "duplicate atom label");

        std::vector<ComplexMatrix> atom_ops;
        for (const TensorHistory& a : atoms) atom_ops.push_back(embed_support(a, support_).op());
        const std::size_t dim = atom_ops.front().dim();
        const std::size_t count = std::size_t{1} << n;
        if (count * dim * dim > kMaxLatticeStorage) throw Error("too many atoms");

        values_.resize(count, ComplexMatrix(dim));
        if (opts.zero_image) values_[0] = embed_support(*opts.zero_image, support_).op();
        for (Element e = 1; e < count; ++e) {
            const Element low = e & (~e + 1u);
            values_[e] = values_[e ^ low] + atom_ops[static_cast<std::size_t>(std::countr_zero(low))];
        }

        const ComplexMatrix& total = values_[count - 1];
        const HermitianEigen eig = hermitian_eig(total);
        if (eig.values.back() > 1.0 + 1e-10 * scale_of(total)) throw Error("atoms not summable");

        for (Element a = 0; a < count; ++a)
            for (Element b = a + 1; b < count; ++b)
                if (images_close(a, b, kInjectivityTol)) throw Error("valuation not injective");

        // The valuation condition is an algebraic identity for the additive
        // map; assert the residuals numerically while that stays affordable.
        if (count * count * dim * dim <= (std::size_t{1} << 28)) {
            for (Element a = 0; a < count; ++a)
                for (Element b = 0; b < count; ++b) {
                    const ComplexMatrix lhs = values_[a | b] - values_[a];
                    const ComplexMatrix rhs = values_[b] - values_[a & b];
                    if (distance(lhs, rhs) > 1e-9) throw Error("valuation condition violated");
                }
        }
    }

    std::size_t atom_count() const noexcept { return labels_.size(); }
    Element full() const noexcept { return static_cast<Element>((std::size_t{1} << atom_count()) - 1); }
    std::size_t element_count() const noexcept { return values_.size(); }
    const std::vector<std::string>& atom_labels() const noexcept { return labels_; }
    const std::vector<double>& support() const noexcept { return support_; }
    std::size_t slot_dim() const noexcept { return slot_dim_; }
    double tolerance() const noexcept { return tol_; }

    const ComplexMatrix& value_op(Element e) const {
        require_element(e);
        return values_[e];
    }

    TensorHistory value(Element e) const {
        return trusted_tensor_history(slot_dim_, support_, value_op(e));
    }

    TensorHistory atom(std::size_t i) const { return value(Element{1} << i); }

    void require_element(Element e) const {
        if (e > full()) throw Error("not a lattice element");
    }

private:
    bool images_close(Element a, Element b, double tol) const {
        const double t2 = tol * tol;
        double s = 0.0;
        const std::vector<Complex>& x = values_[a].entries();
        const std::vector<Complex>& y = values_[b].entries();
        for (std::size_t k = 0; k < x.size(); ++k) {
            s += std::norm(x[k] - y[k]);
            if (s > t2) return false;
        }
        return s <= t2;
    }

    std::size_t slot_dim_ = 0;
    std::vector<double> support_;
    std::vector<std::string> labels_;
    std::vector<ComplexMatrix> values_;
    double tol_ = 1e-9;
};

// d evaluated between the valuation images of two lattice elements.
inline Complex lattice_weight(const DecoherenceContext& ctx, const BooleanLattice& lat,
                              BooleanLattice::Element e1, BooleanLattice::Element e2) {
    lat.require_element(e1);
    lat.require_element(e2);
    return decoherence_weight(ctx.scenario, lat.value(e1), lat.value(e2));
}

// --- admissibility diagnostics ---

struct LatticePairIssue {
    BooleanLattice::Element a = 0;
    BooleanLattice::Element b = 0;
    double value = 0.0;   // residual or distance, depending on the list
    bool defined = true;  // false when a difference in the valuation condition does not exist
};

struct AdmissibilityReport {
    bool admissible = false;
    bool valuation_condition_ok = false;
    bool injective = false;
    bool weights_match = false;
    std::vector<LatticePairIssue> valuation_issues;
    std::vector<LatticePairIssue> injectivity_issues;
    std::vector<LatticePairIssue> weight_issues;
};

// Checks a valuation against the three admissibility requirements: the
// valuation condition, injectivity, and agreement of the induced weights
// with the canonical additive valuation. `custom` overrides the canonical
// image on selected elements; an empty map checks the lattice as built.
inline AdmissibilityReport check_admissible(const DecoherenceContext& ctx, const BooleanLattice& lat,
                                            const std::map<BooleanLattice::Element, TensorHistory>&
                                                custom = {}) {
    using Element = BooleanLattice::Element;
    const std::size_t count = lat.element_count();
    std::map<Element, ComplexMatrix> over;
    for (const auto& [e, h] : custom) {
        lat.require_element(e);
        if (h.slot_dim() != lat.slot_dim()) throw Error("dimension mismatch");
        over.emplace(e, embed_support(h, lat.support()).op());
    }
    const auto val = [&](Element e) -> const ComplexMatrix& {
        const auto it = over.find(e);
        return it == over.end() ? lat.value_op(e) : it->second;
    };
    const auto overridden = [&](Element e) { return over.find(e) != over.end(); };

    AdmissibilityReport rep;
    rep.valuation_condition_ok = true;
    for (Element a = 0; a < count; ++a)
        for (Element b = 0; b < count; ++b) {
            const bool touched = overridden(a) || overridden(b) || overridden(a | b) || overridden(a & b);
            const ComplexMatrix lhs = val(a | b) - val(a);
            const ComplexMatrix rhs = val(b) - val(a & b);
            bool defined = true;
            if (touched) {
                // differences must exist in the partial order, not just match
                defined = hermitian_eig(lhs).values.front() >= -1e-10 * scale_of(val(a | b)) &&
                          hermitian_eig(rhs).values.front() >= -1e-10 * scale_of(val(b));
            }
            const double residual = distance(lhs, rhs);
            if (!defined || residual > 1e-9) {
                rep.valuation_condition_ok = false;
                rep.valuation_issues.push_back({a, b, residual, defined});
            }
        }

    rep.injective = true;
    for (Element a = 0; a < count; ++a)
        for (Element b = static_cast<Element>(a + 1); b < count; ++b) {
            const double dist = distance(val(a), val(b));
            if (dist <= kInjectivityTol) {
                rep.injective = false;
                rep.injectivity_issues.push_back({a, b, dist, true});
            }
        }

    rep.weights_match = true;
    if (!over.empty()) {
        std::map<Element, ComplexMatrix> cop_custom;
        std::vector<ComplexMatrix> cop_canon(count);
        for (Element e = 0; e < count; ++e) {
            cop_canon[e] = class_operator(ctx.scenario, lat.value(e));
            if (overridden(e))
                cop_custom.emplace(e, class_operator(ctx.scenario,
                                                     trusted_tensor_history(lat.slot_dim(),
                                                                            lat.support(), val(e))));
        }
        const auto cop = [&](Element e) -> const ComplexMatrix& {
            const auto it = cop_custom.find(e);
            return it == cop_custom.end() ? cop_canon[e] : it->second;
        };
        const ComplexMatrix& rho = ctx.scenario.initial_state();
        for (Element a = 0; a < count; ++a)
            for (Element b = a; b < count; ++b) {
                if (!overridden(a) && !overridden(b)) continue;
                const Complex want = trace_sandwich(cop_canon[a], rho, cop_canon[b]);
                const Complex got = trace_sandwich(cop(a), rho, cop(b));
                const double residual = std::abs(got - want);
                if (residual > 1e-9 * std::max(1.0, std::abs(want))) {
                    rep.weights_match = false;
                    rep.weight_issues.push_back({a, b, residual, true});
                }
            }
    }

    rep.admissible = rep.valuation_condition_ok && rep.injective && rep.weights_match;
    return rep;
}

// --- consistency ---

struct ConsistencyReport {
    bool consistent = false;
    bool strict = false;
    double tol = 0.0;
    double normalization = 0.0;  // Re d(1_B, 1_B)
    double worst = 0.0;
    std::vector<LatticePairIssue> violations;  // atom pairs above tolerance
};

// A lattice is consistent when the real cross terms between distinct atoms
// vanish against the normalization weight. The strict variant demands the
// full complex cross terms vanish.
inline ConsistencyReport check_consistent(const DecoherenceContext& ctx, const BooleanLattice& lat,
                                          double tol = 1e-9, bool strict = false) {
    using Element = BooleanLattice::Element;
    const Scenario& s = ctx.scenario;
    const std::size_t n = lat.atom_count();
    ConsistencyReport rep;
    rep.strict = strict;
    rep.tol = tol;
    std::vector<ComplexMatrix> cop;
    for (std::size_t i = 0; i < n; ++i) cop.push_back(class_operator(s, lat.atom(i)));
    const ComplexMatrix cfull = class_operator(s, lat.value(lat.full()));
    rep.normalization = trace_sandwich(cfull, s.initial_state(), cfull).real();
    const double bound = tol * std::max(1.0, std::abs(rep.normalization));
    rep.consistent = true;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const Complex d = trace_sandwich(cop[i], s.initial_state(), cop[j]);
            const double r = strict ? std::abs(d) : std::abs(d.real());
            rep.worst = std::max(rep.worst, r);
            if (r > bound) {
                rep.consistent = false;
                rep.violations.push_back({static_cast<Element>(Element{1} << i),
                                          static_cast<Element>(Element{1} << j), r, true});
            }
        }
    return rep;
}

// --- probabilities and implication ---

namespace detail {

// Consistency and normalization gate shared by every probability query.
inline double checked_normalization(const DecoherenceContext& ctx, const BooleanLattice& lat) {
    const ConsistencyReport rep = check_consistent(ctx, lat, lat.tolerance(), false);
    if (std::abs(rep.normalization) < 1e-12) throw Error("degenerate normalization");
    if (!rep.consistent) throw Error("inconsistent lattice");
    return rep.normalization;
}

inline double element_probability(const DecoherenceContext& ctx, const BooleanLattice& lat,
                                  BooleanLattice::Element e, double norm) {
    const ComplexMatrix c = class_operator(ctx.scenario, lat.value(e));
    return trace_sandwich(c, ctx.scenario.initial_state(), c).real() / norm;
}

}  // namespace detail

inline double probability(const DecoherenceContext& ctx, const BooleanLattice& lat,
                          BooleanLattice::Element e) {
    lat.require_element(e);
    return detail::element_probability(ctx, lat, e, detail::checked_normalization(ctx, lat));
}

struct ImplicationResult {
    bool holds = false;
    double conditional = 0.0;  // p(e1 and e2 | e1), or its certified lower bound
};

// e1 implies e2 when the conditional probability of e2 given e1 is one.
inline ImplicationResult implies(const DecoherenceContext& ctx, const BooleanLattice& lat,
                                 BooleanLattice::Element e1, BooleanLattice::Element e2) {
    lat.require_element(e1);
    lat.require_element(e2);
    const double norm = detail::checked_normalization(ctx, lat);
    const double p1 = detail::element_probability(ctx, lat, e1, norm);
    if (std::abs(p1) <= 1e-12) throw Error("conditional undefined");
    const double p12 = detail::element_probability(ctx, lat, e1 & e2, norm);
    ImplicationResult r;
    r.conditional = p12 / p1;
    r.holds = std::abs(r.conditional - 1.0) <= 1e-9;
    return r;
}

// Certifies the implication from below: any common lower bound e3 whose
// conditional probability given e1 already reaches one forces p(e2|e1) = 1.
inline ImplicationResult implies_via(const DecoherenceContext& ctx, const BooleanLattice& lat,
                                     BooleanLattice::Element e1, BooleanLattice::Element e2,
                                     BooleanLattice::Element e3) {
    lat.require_element(e1);
    lat.require_element(e2);
    lat.require_element(e3);
    if ((e3 & e1) != e3 || (e3 & e2) != e3) throw Error("e3 not a common lower bound");
    const double norm = detail::checked_normalization(ctx, lat);
    const double p1 = detail::element_probability(ctx, lat, e1, norm);
    if (std::abs(p1) <= 1e-12) throw Error("conditional undefined");
    const double p3 = detail::element_probability(ctx, lat, e3, norm);
    ImplicationResult r;
    r.conditional = p3 / p1;
    r.holds = r.conditional >= 1.0 - 1e-9;
    return r;
}

inline bool equivalent(const DecoherenceContext& ctx, const BooleanLattice& lat,
                       BooleanLattice::Element e1, BooleanLattice::Element e2) {
    return implies(ctx, lat, e1, e2).holds && implies(ctx, lat, e2, e1).holds;
}

}  // namespace ceh
