#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "ceh/quantum.hpp"

namespace ceh {

// Threshold for dropping identity events and collapsing zero events during
// history normalization.
inline constexpr double kNormalizationTol = 1e-12;

// Eigenvalue clustering threshold used when intersecting projector ranges.
inline constexpr double kRangeClusterTol = 1e-8;

struct Event {
    double time = 0.0;
    ComplexMatrix effect;
};

namespace detail {

inline void require_finite_time(double t) {
    if (!std::isfinite(t)) throw Error("invalid time");
}

}  // namespace detail

// A finite list of effects attached to strictly increasing times, acting on
// one copy of the system each. Normal form: identity events are dropped, and
// a history containing a zero effect collapses to the canonical zero history
// (no events, zero flag set). The empty event list is the unit history.
class HomogeneousEffectHistory {
public:
    HomogeneousEffectHistory(std::size_t dim, std::vector<Event> events) : dim_(dim) {
        if (dim_ == 0) throw Error("dimension mismatch", "dim must be positive");
        std::stable_sort(events.begin(), events.end(),
                         [](const Event& x, const Event& y) { return x.time < y.time; });
        bool zero = false;
        const ComplexMatrix id = ComplexMatrix::identity(dim_);
        for (std::size_t k = 0; k < events.size(); ++k) {
            const Event& ev = events[k];
            detail::require_finite_time(ev.time);
            if (ev.effect.dim() != dim_) throw Error("dimension mismatch");
            if (k + 1 < events.size() && !(ev.time < events[k + 1].time))
                throw Error("temporal overlap");
            if (!classify(ev.effect).is_effect) throw Error("not an effect");
            if (ev.effect.frobenius_norm() <= kNormalizationTol) zero = true;
        }
        if (zero) {
            zero_ = true;
            return;
        }
        for (Event& ev : events)
            if (distance(ev.effect, id) > kNormalizationTol) events_.push_back(std::move(ev));
    }

    static HomogeneousEffectHistory unit(std::size_t dim) { return HomogeneousEffectHistory(dim, {}); }

    static HomogeneousEffectHistory zero(std::size_t dim) {
        HomogeneousEffectHistory h(dim, {});
        h.zero_ = true;
        return h;
    }

    std::size_t dim() const noexcept { return dim_; }
    const std::vector<Event>& events() const noexcept { return events_; }
    bool is_zero() const noexcept { return zero_; }
    bool is_unit() const noexcept { return !zero_ && events_.empty(); }

private:
    std::size_t dim_;
    std::vector<Event> events_;
    bool zero_ = false;
};

// A single effect on the tensor product of the system copies indexed by the
// support times, earliest time as the leftmost (most significant) factor.
// Unlike a homogeneous history the operator need not factorize. An empty
// support with a 1x1 operator [c] is the scalar proposition c, covering both
// the unit ([1]) and the zero ([0]) of the structure.
class TensorHistory {
public:
    TensorHistory(std::size_t slot_dim, std::vector<double> support, ComplexMatrix op)
        : TensorHistory(slot_dim, std::move(support), std::move(op), true) {}

    static TensorHistory unit(std::size_t slot_dim) {
        return TensorHistory(slot_dim, {}, ComplexMatrix{{Complex(1.0, 0.0)}});
    }

    static TensorHistory zero(std::size_t slot_dim) {
        return TensorHistory(slot_dim, {}, ComplexMatrix{{Complex(0.0, 0.0)}});
    }

    std::size_t slot_dim() const noexcept { return slot_dim_; }
    const std::vector<double>& support() const noexcept { return support_; }
    const ComplexMatrix& op() const noexcept { return op_; }

private:
    friend TensorHistory trusted_tensor_history(std::size_t, std::vector<double>, ComplexMatrix);

    TensorHistory(std::size_t slot_dim, std::vector<double> support, ComplexMatrix op, bool validate)
        : slot_dim_(slot_dim), support_(std::move(support)), op_(std::move(op)) {
        if (slot_dim_ == 0) throw Error("dimension mismatch", "slot dim must be positive");
        std::sort(support_.begin(), support_.end());
        std::size_t want = 1;
        for (std::size_t k = 0; k < support_.size(); ++k) {
            detail::require_finite_time(support_[k]);
            if (k + 1 < support_.size() && !(support_[k] < support_[k + 1]))
                throw Error("temporal overlap");
            if (want > kMaxTensorDim / slot_dim_) throw Error("tensor dimension overflow");
            want *= slot_dim_;
        }
        if (op_.dim() != want) throw Error("dimension mismatch", "operator size differs from tensor dim");
        if (validate && !classify(op_).is_effect) throw Error("not an effect");
    }

    std::size_t slot_dim_;
    std::vector<double> support_;
    ComplexMatrix op_;
};

// Internal factory for results whose effect property is guaranteed by
// construction (tensor products, unitary conjugates, checked sums).
inline TensorHistory trusted_tensor_history(std::size_t slot_dim, std::vector<double> support,
                                            ComplexMatrix op) {
    return TensorHistory(slot_dim, std::move(support), std::move(op), false);
}

// --- the tensor image of a homogeneous history ---

// Maps a homogeneous history to the single tensor effect carried by its
// support. Neither injective nor onto: inhomogeneous tensor effects have no
// preimage, and histories beyond the sharp ones can share an image.
inline TensorHistory to_tensor_history(const HomogeneousEffectHistory& h) {
    if (h.is_zero()) return TensorHistory::zero(h.dim());
    ComplexMatrix op{{Complex(1.0, 0.0)}};
    std::vector<double> support;
    for (const Event& ev : h.events()) {
        op = kron(op, ev.effect);
        support.push_back(ev.time);
    }
    return trusted_tensor_history(h.dim(), std::move(support), std::move(op));
}

// --- support manipulation ---

namespace detail {

// Insert an identity factor at slot position p into an operator on f factors
// of dimension d each.
inline ComplexMatrix insert_identity_factor(const ComplexMatrix& op, std::size_t d, std::size_t f,
                                            std::size_t p) {
    const std::size_t old_dim = op.dim();
    if (old_dim > kMaxTensorDim / d) throw Error("tensor dimension overflow");
    std::size_t post = 1;
    for (std::size_t k = p; k < f; ++k) post *= d;
    const std::size_t pre = old_dim / post;
    ComplexMatrix out(old_dim * d);
    for (std::size_t rp = 0; rp < pre; ++rp)
        for (std::size_t rs = 0; rs < post; ++rs)
            for (std::size_t cp = 0; cp < pre; ++cp)
                for (std::size_t cs = 0; cs < post; ++cs) {
                    const Complex v = op(rp * post + rs, cp * post + cs);
                    if (v == Complex(0.0, 0.0)) continue;
                    for (std::size_t a = 0; a < d; ++a)
                        out(rp * d * post + a * post + rs, cp * d * post + a * post + cs) = v;
                }
    return out;
}

}  // namespace detail

// Rewrites a tensor history on a superset support by padding the new slots
// with identity factors. Time labels compare by exact equality.
inline TensorHistory embed_support(const TensorHistory& h, std::vector<double> support) {
    std::sort(support.begin(), support.end());
    for (std::size_t k = 0; k + 1 < support.size(); ++k)
        if (!(support[k] < support[k + 1])) throw Error("temporal overlap");
    for (double t : h.support())
        if (!std::binary_search(support.begin(), support.end(), t))
            throw Error("support not superset");
    ComplexMatrix op = h.op();
    std::vector<double> cur = h.support();
    for (double t : support) {
        if (std::binary_search(cur.begin(), cur.end(), t)) continue;
        const std::size_t p =
            static_cast<std::size_t>(std::lower_bound(cur.begin(), cur.end(), t) - cur.begin());
        op = detail::insert_identity_factor(op, h.slot_dim(), cur.size(), p);
        cur.insert(cur.begin() + static_cast<std::ptrdiff_t>(p), t);
    }
    return trusted_tensor_history(h.slot_dim(), std::move(cur), std::move(op));
}

inline std::vector<double> support_union(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> r;
    std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(r));
    return r;
}

namespace detail {

inline void require_same_slot(const TensorHistory& a, const TensorHistory& b) {
    if (a.slot_dim() != b.slot_dim()) throw Error("dimension mismatch");
}

struct CommonSupport {
    ComplexMatrix a;
    ComplexMatrix b;
    std::vector<double> support;
};

inline CommonSupport on_common_support(const TensorHistory& a, const TensorHistory& b) {
    require_same_slot(a, b);
    std::vector<double> u = support_union(a.support(), b.support());
    TensorHistory ae = embed_support(a, u);
    TensorHistory be = embed_support(b, u);
    return {ae.op(), be.op(), std::move(u)};
}

}  // namespace detail

// --- the partial sum and difference on tensor effects ---

// a (+) b: defined when the sum stays below the identity. Following the
// closed-interval convention, sums reaching the identity exactly are allowed.
inline TensorHistory effect_sum(const TensorHistory& a, const TensorHistory& b) {
    detail::CommonSupport cs = detail::on_common_support(a, b);
    ComplexMatrix sum = cs.a + cs.b;
    const HermitianEigen eig = hermitian_eig(sum);
    if (eig.values.back() > 1.0 + 1e-10 * scale_of(sum)) throw Error("oplus undefined");
    return trusted_tensor_history(a.slot_dim(), std::move(cs.support), std::move(sum));
}

// a (-) b: defined when b lies below a.
inline TensorHistory effect_difference(const TensorHistory& a, const TensorHistory& b) {
    detail::CommonSupport cs = detail::on_common_support(a, b);
    ComplexMatrix diff = cs.a - cs.b;
    const HermitianEigen eig = hermitian_eig(diff);
    if (eig.values.front() < -1e-10 * scale_of(cs.a)) throw Error("ominus undefined (not below)");
    return trusted_tensor_history(a.slot_dim(), std::move(cs.support), std::move(diff));
}

inline bool is_sub_effect(const TensorHistory& below, const TensorHistory& above) {
    try {
        effect_difference(above, below);
        return true;
    } catch (const Error& e) {
        if (e.code() == "ominus undefined (not below)") return false;
        throw;
    }
}

// 1 (-) a on the support of a.
inline TensorHistory effect_complement(const TensorHistory& a) {
    ComplexMatrix c = ComplexMatrix::identity(a.op().dim()) - a.op();
    return trusted_tensor_history(a.slot_dim(), a.support(), std::move(c));
}

// --- meet and join, where determined ---

namespace detail {

inline ComplexMatrix spectral_band(const HermitianEigen& eig, double lo) {
    const std::size_t n = eig.vectors.dim();
    ComplexMatrix r(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (eig.values[k] < lo) continue;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                r(i, j) += eig.vectors(i, k) * std::conj(eig.vectors(j, k));
    }
    return r;
}

}  // namespace detail

// Greatest lower and least upper bound of two tensor effects, in the cases
// where the structure determines them: a pair of projectors (range
// intersection and span) or a comparable pair. Anything else is reported as
// undetermined rather than guessed.
inline std::optional<std::pair<TensorHistory, TensorHistory>> meet_and_join(const TensorHistory& a,
                                                                            const TensorHistory& b) {
    detail::CommonSupport cs = detail::on_common_support(a, b);
    const bool proj = classify(cs.a).is_projector && classify(cs.b).is_projector;
    if (proj) {
        const ComplexMatrix sum = cs.a + cs.b;
        const HermitianEigen eig = hermitian_eig(sum);
        ComplexMatrix meet = detail::spectral_band(eig, 2.0 - kRangeClusterTol);
        ComplexMatrix join = detail::spectral_band(eig, kRangeClusterTol);
        return std::make_pair(trusted_tensor_history(a.slot_dim(), cs.support, std::move(meet)),
                              trusted_tensor_history(a.slot_dim(), cs.support, std::move(join)));
    }
    TensorHistory ae = trusted_tensor_history(a.slot_dim(), cs.support, cs.a);
    TensorHistory be = trusted_tensor_history(a.slot_dim(), cs.support, cs.b);
    if (is_sub_effect(ae, be)) return std::make_pair(ae, be);
    if (is_sub_effect(be, ae)) return std::make_pair(be, ae);
    return std::nullopt;
}

// --- temporal composition ---

inline HomogeneousEffectHistory compose(const HomogeneousEffectHistory& a,
                                        const HomogeneousEffectHistory& b) {
    if (a.dim() != b.dim()) throw Error("dimension mismatch");
    if (a.is_zero() || b.is_zero()) return HomogeneousEffectHistory::zero(a.dim());
    std::vector<Event> events = a.events();
    events.insert(events.end(), b.events().begin(), b.events().end());
    return HomogeneousEffectHistory(a.dim(), std::move(events));
}

// Concatenation of tensor histories with disjoint supports. Embedding both
// factors into the union support turns the interleaved tensor product into a
// plain operator product of commuting factors.
inline TensorHistory compose(const TensorHistory& a, const TensorHistory& b) {
    detail::require_same_slot(a, b);
    std::vector<double> u = support_union(a.support(), b.support());
    if (u.size() != a.support().size() + b.support().size()) throw Error("temporal overlap");
    TensorHistory ae = embed_support(a, u);
    TensorHistory be = embed_support(b, u);
    return trusted_tensor_history(a.slot_dim(), std::move(u), ae.op() * be.op());
}

// --- class operators ---

// C(u) = U(t0, t_n) sqrt(E_n) U(t_n, t_{n-1}) ... sqrt(E_1) U(t_1, t0),
// with t0 the fiducial time and times ascending.
inline ComplexMatrix class_operator(const Scenario& s, const HomogeneousEffectHistory& h) {
    if (h.dim() != s.dim()) throw Error("dimension mismatch");
    if (h.is_zero()) return ComplexMatrix(s.dim());
    ComplexMatrix c = ComplexMatrix::identity(s.dim());
    double prev = s.fiducial_time();
    for (const Event& ev : h.events()) {
        // sqrt(P) = P for projectors; reusing the effect avoids amplifying
        // its near-zero eigenvalue noise through the root's infinite slope
        const ComplexMatrix root =
            classify(ev.effect).is_projector ? ev.effect : psd_power(ev.effect, 0.5);
        c = root * (propagator(s, ev.time, prev) * c);
        prev = ev.time;
    }
    return propagator(s, s.fiducial_time(), prev) * c;
}

namespace detail {

// The unique linear extension of the class operator map, evaluated by
// contracting the tensor operator against one inter-event propagator at a
// time. After step k the buffer holds the partial contraction with row index
// (i_{k+1}..i_n) and column index (j_1, j_{k+2}..j_n).
inline ComplexMatrix class_operator_on_support(const Scenario& s, const std::vector<double>& times,
                                               const ComplexMatrix& op) {
    const std::size_t d = s.dim();
    const std::size_t n = times.size();
    if (n == 0) return op(0, 0) * ComplexMatrix::identity(d);
    std::vector<Complex> x = op.entries();
    std::size_t rows = op.dim();
    for (std::size_t step = 1; step < n; ++step) {
        const ComplexMatrix w = propagator(s, times[step], times[step - 1]);
        const std::size_t m = rows / d;
        const std::size_t sub = m / d;
        std::vector<Complex> next(m * m, Complex(0.0, 0.0));
        for (std::size_t j1 = 0; j1 < d; ++j1)
            for (std::size_t rest = 0; rest < sub; ++rest)
                for (std::size_t r = 0; r < m; ++r) {
                    Complex acc(0.0, 0.0);
                    for (std::size_t ik = 0; ik < d; ++ik)
                        for (std::size_t jn = 0; jn < d; ++jn)
                            acc += w(jn, ik) * x[(ik * m + r) * rows + (j1 * m + jn * sub + rest)];
                    next[r * m + (j1 * sub + rest)] = acc;
                }
        x.swap(next);
        rows = m;
    }
    ComplexMatrix t(d, std::move(x));
    const ComplexMatrix u_end = propagator(s, s.fiducial_time(), times.back());
    const ComplexMatrix u_start = propagator(s, times.front(), s.fiducial_time());
    return u_end * (t * u_start);
}

}  // namespace detail

// Linear extension of the class operator map to arbitrary tensor effects.
// On images of sharp homogeneous histories it reproduces the product
// formula; elsewhere it is fixed by linearity in the matrix entries.
inline ComplexMatrix class_operator(const Scenario& s, const TensorHistory& h) {
    if (h.slot_dim() != s.dim()) throw Error("dimension mismatch");
    return detail::class_operator_on_support(s, h.support(), h.op());
}

// The effect a history reproduces on states at the fiducial time.
inline ComplexMatrix induced_effect(const Scenario& s, const HomogeneousEffectHistory& h) {
    const ComplexMatrix c = class_operator(s, h);
    return c.adjoint() * c;
}

inline ComplexMatrix induced_effect(const Scenario& s, const TensorHistory& h) {
    const ComplexMatrix c = class_operator(s, h);
    return c.adjoint() * c;
}

// --- shift translation ---

// Slides a history along the time axis, conjugating every event by the
// shift propagator. Class operators are invariant under this translation.
inline HomogeneousEffectHistory shift_translate(const Scenario& s, const HomogeneousEffectHistory& h,
                                                double tau) {
    if (h.dim() != s.dim()) throw Error("dimension mismatch");
    detail::require_finite_time(tau);
    if (h.is_zero()) return h;
    const ComplexMatrix w = unitary_exp(s.hamiltonian(), tau / s.hbar());
    const ComplexMatrix wd = w.adjoint();
    std::vector<Event> events;
    for (const Event& ev : h.events()) events.push_back({ev.time + tau, w * ev.effect * wd});
    return HomogeneousEffectHistory(s.dim(), std::move(events));
}

inline TensorHistory shift_translate(const Scenario& s, const TensorHistory& h, double tau) {
    if (h.slot_dim() != s.dim()) throw Error("dimension mismatch");
    detail::require_finite_time(tau);
    std::vector<double> support = h.support();
    for (double& t : support) t += tau;
    if (support.empty()) return h;
    const ComplexMatrix w = unitary_exp(s.hamiltonian(), tau / s.hbar());
    ComplexMatrix wt{{Complex(1.0, 0.0)}};
    for (std::size_t k = 0; k < support.size(); ++k) wt = kron(wt, w);
    return trusted_tensor_history(h.slot_dim(), std::move(support),
                                  wt * h.op() * wt.adjoint());
}

// --- repeated-measurement histories ---

// History in which each effect fires k times in immediate succession. The
// micro-events sit at t_j, t_j + delta, ..., each copy translated to its own
// time so repetition commutes with the dynamics; delta is small against the
// base spacing and the copies never spill into the next base slot.
inline HomogeneousEffectHistory repeat_history(const Scenario& s,
                                               const std::vector<ComplexMatrix>& effects,
                                               const std::vector<double>& base_times,
                                               std::size_t k) {
    if (effects.size() != base_times.size() || effects.empty()) throw Error("arity mismatch");
    if (k == 0) throw Error("arity mismatch", "repeat count must be positive");
    double gap = 1.0;
    for (std::size_t j = 0; j + 1 < base_times.size(); ++j)
        gap = std::min(gap, base_times[j + 1] - base_times[j]);
    if (!(gap > 0.0)) throw Error("temporal overlap");
    const double delta = 1e-3 * gap / static_cast<double>(k);
    std::vector<Event> events;
    for (std::size_t j = 0; j < effects.size(); ++j)
        for (std::size_t i = 0; i < k; ++i) {
            const double t = base_times[j] + static_cast<double>(i) * delta;
            events.push_back({t, heisenberg_translate(s, effects[j], t, base_times[j])});
        }
    return HomogeneousEffectHistory(s.dim(), std::move(events));
}

// The second-order replacement for a k-fold repeated history: each effect E
// becomes E^(k/2), repeated twice. Decoherence weights agree with the
// original because the translated micro-blocks collapse to the same class
// operator.
inline HomogeneousEffectHistory reduce_repeat_order(const Scenario& s,
                                                    const std::vector<ComplexMatrix>& effects,
                                                    const std::vector<double>& base_times,
                                                    std::size_t k) {
    if (effects.size() != base_times.size() || effects.empty()) throw Error("arity mismatch");
    if (k == 0) throw Error("arity mismatch", "repeat count must be positive");
    std::vector<ComplexMatrix> reduced;
    for (const ComplexMatrix& e : effects)
        reduced.push_back(psd_power(e, static_cast<double>(k) / 2.0));
    return repeat_history(s, reduced, base_times, 2);
}

}  // namespace ceh
