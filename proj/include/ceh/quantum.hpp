#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ceh/numerics.hpp"

namespace ceh {

// A closed finite-dimensional system: Hamiltonian dynamics plus the state
// prepared at the fiducial time. All histories and weights below refer to
// one of these.
class Scenario {
public:
    Scenario(std::size_t dim, ComplexMatrix hamiltonian, ComplexMatrix initial_state,
             double hbar = 1.0, double fiducial_time = 0.0)
        : dim_(dim),
          hamiltonian_(std::move(hamiltonian)),
          initial_state_(std::move(initial_state)),
          hbar_(hbar),
          fiducial_time_(fiducial_time) {
        if (dim_ == 0) throw Error("dimension mismatch", "dim must be positive");
        if (hamiltonian_.dim() != dim_ || initial_state_.dim() != dim_)
            throw Error("dimension mismatch", "operator size differs from dim");
        if (!(hbar_ > 0.0)) throw Error("invalid hbar");
        if (distance(hamiltonian_, hamiltonian_.adjoint()) > 1e-10 * scale_of(hamiltonian_))
            throw Error("not hermitian", "hamiltonian");
        const OperatorClass oc = classify(initial_state_);
        if (!oc.is_density) throw Error("not a density", "initial_state");
    }

    std::size_t dim() const noexcept { return dim_; }
    const ComplexMatrix& hamiltonian() const noexcept { return hamiltonian_; }
    const ComplexMatrix& initial_state() const noexcept { return initial_state_; }
    double hbar() const noexcept { return hbar_; }
    double fiducial_time() const noexcept { return fiducial_time_; }

private:
    std::size_t dim_;
    ComplexMatrix hamiltonian_;
    ComplexMatrix initial_state_;
    double hbar_;
    double fiducial_time_;
};

// U(t_to, t_from) = exp(-i (t_to - t_from) H / hbar).
inline ComplexMatrix propagator(const Scenario& s, double t_to, double t_from) {
    if (t_to == t_from) return ComplexMatrix::identity(s.dim());
    return unitary_exp(s.hamiltonian(), (t_to - t_from) / s.hbar());
}

// Conjugate an effect by the propagator from t_ref to t. This is the
// translation that lets a history slide along the time axis without touching
// its class operator: the conjugating unitaries telescope against the
// inter-event propagators.
inline ComplexMatrix heisenberg_translate(const Scenario& s, const ComplexMatrix& e, double t,
                                          double t_ref) {
    if (e.dim() != s.dim()) throw Error("dimension mismatch");
    if (!classify(e).is_effect) throw Error("not an effect");
    if (t == t_ref) return e;
    const ComplexMatrix u = propagator(s, t, t_ref);
    return u * e * u.adjoint();
}

// --- POV measures ---

struct POVMeasure {
    std::vector<std::string> outcomes;
    std::vector<ComplexMatrix> effects;
};

struct PovmOutcomeReport {
    std::string outcome;
    OperatorClass klass;
};

struct PovmReport {
    std::vector<PovmOutcomeReport> outcomes;
    double completeness_deviation = 0.0;  // ||sum of effects - identity||_F
    bool pass = false;
};

inline PovmReport validate_povm(const POVMeasure& povm) {
    if (povm.outcomes.size() != povm.effects.size() || povm.effects.empty())
        throw Error("arity mismatch", "outcome and effect counts differ");
    const std::size_t d = povm.effects.front().dim();
    PovmReport rep;
    ComplexMatrix sum(d);
    bool all_effects = true;
    for (std::size_t k = 0; k < povm.effects.size(); ++k) {
        if (povm.effects[k].dim() != d) throw Error("dimension mismatch");
        PovmOutcomeReport oc;
        oc.outcome = povm.outcomes[k];
        oc.klass = classify(povm.effects[k]);
        all_effects = all_effects && oc.klass.is_effect;
        rep.outcomes.push_back(std::move(oc));
        sum = sum + povm.effects[k];
    }
    rep.completeness_deviation = distance(sum, ComplexMatrix::identity(d));
    rep.pass = all_effects && rep.completeness_deviation <= 1e-10 * scale_of(sum);
    return rep;
}

}  // namespace ceh
