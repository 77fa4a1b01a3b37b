#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "ceh/ceh.hpp"

// Deterministic fixtures for the test suite. Every generator takes the
// engine by reference so each test case owns its seed.
namespace test_support {

using ceh::Complex;
using ceh::ComplexMatrix;

inline ComplexMatrix random_matrix(std::mt19937& g, std::size_t n) {
    std::normal_distribution<double> d(0.0, 1.0);
    ComplexMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = Complex(d(g), d(g));
    return m;
}

inline ComplexMatrix random_hermitian(std::mt19937& g, std::size_t n) {
    const ComplexMatrix a = random_matrix(g, n);
    ComplexMatrix h(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) h(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
    return h;
}

// Gram-Schmidt on the columns of a random matrix.
inline ComplexMatrix random_unitary(std::mt19937& g, std::size_t n) {
    const ComplexMatrix a = random_matrix(g, n);
    ComplexMatrix u(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<Complex> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = a(i, c);
        for (std::size_t p = 0; p < c; ++p) {
            Complex dot(0.0, 0.0);
            for (std::size_t i = 0; i < n; ++i) dot += std::conj(u(i, p)) * v[i];
            for (std::size_t i = 0; i < n; ++i) v[i] -= dot * u(i, p);
        }
        double norm = 0.0;
        for (const Complex& x : v) norm += std::norm(x);
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < n; ++i) u(i, c) = v[i] / norm;
    }
    return u;
}

inline ComplexMatrix from_spectrum(const ComplexMatrix& u, const std::vector<double>& lam) {
    const std::size_t n = u.dim();
    ComplexMatrix m(n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m(i, j) += lam[k] * u(i, k) * std::conj(u(j, k));
    return m;
}

inline ComplexMatrix random_projector(std::mt19937& g, std::size_t n, std::size_t rank) {
    std::vector<double> lam(n, 0.0);
    for (std::size_t k = 0; k < rank; ++k) lam[k] = 1.0;
    return from_spectrum(random_unitary(g, n), lam);
}

inline ComplexMatrix random_effect(std::mt19937& g, std::size_t n) {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<double> lam(n);
    for (double& x : lam) x = d(g);
    return from_spectrum(random_unitary(g, n), lam);
}

inline ComplexMatrix random_density(std::mt19937& g, std::size_t n) {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<double> lam(n);
    double sum = 0.0;
    for (double& x : lam) {
        x = d(g) + 1e-3;
        sum += x;
    }
    for (double& x : lam) x /= sum;
    return from_spectrum(random_unitary(g, n), lam);
}

// Matrix-unit expansion of the extended class operator: decompose the tensor
// operator over product matrix units and apply the product formula term by
// term. Deliberately slow and independent of the contraction code.
inline ComplexMatrix oracle_class_operator(const ceh::Scenario& s, const std::vector<double>& times,
                                           const ComplexMatrix& op) {
    const std::size_t d = s.dim();
    const std::size_t n = times.size();
    if (n == 0) return op(0, 0) * ComplexMatrix::identity(d);
    std::vector<ComplexMatrix> hops;  // U(t_k, t_{k-1}) for k = 2..n
    for (std::size_t k = 1; k < n; ++k) hops.push_back(ceh::propagator(s, times[k], times[k - 1]));
    const ComplexMatrix head = ceh::propagator(s, s.fiducial_time(), times.back());
    const ComplexMatrix tail = ceh::propagator(s, times.front(), s.fiducial_time());
    ComplexMatrix total(d);
    const std::size_t dim = op.dim();
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) {
            const Complex w = op(r, c);
            if (w == Complex(0.0, 0.0)) continue;
            // digits of r, c in base d, most significant digit = earliest time
            std::vector<std::size_t> iv(n), jv(n);
            std::size_t rr = r, cc = c;
            for (std::size_t k = n; k-- > 0;) {
                iv[k] = rr % d;
                jv[k] = cc % d;
                rr /= d;
                cc /= d;
            }
            ComplexMatrix m = tail;
            for (std::size_t k = 0; k < n; ++k) {
                if (k > 0) m = hops[k - 1] * m;
                ComplexMatrix unit(d);
                unit(iv[k], jv[k]) = 1.0;
                m = unit * m;
            }
            total = total + w * (head * m);
        }
    return total;
}

inline Complex oracle_extended_weight(const ceh::Scenario& s, const std::vector<double>& times_a,
                                      const ComplexMatrix& ea, const std::vector<double>& times_b,
                                      const ComplexMatrix& eb) {
    const ComplexMatrix ca = oracle_class_operator(s, times_a, ea);
    const ComplexMatrix cb = oracle_class_operator(s, times_b, eb);
    return ceh::trace_sandwich(ca, s.initial_state(), cb);
}

// Spectral double sum for the extended weight between two single-event
// effects: decompose each effect over rank-one eigenprojectors and combine
// the sharp product-formula weights bilinearly. This is the uniqueness
// argument for the extension, evaluated numerically.
inline Complex oracle_spectral_weight(const ceh::Scenario& s, double ta, const ComplexMatrix& ea,
                                      double tb, const ComplexMatrix& eb) {
    const ceh::HermitianEigen ga = ceh::hermitian_eig(ea);
    const ceh::HermitianEigen gb = ceh::hermitian_eig(eb);
    const std::size_t n = ea.dim();
    Complex w(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            ComplexMatrix pi(n), qj(n);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c) {
                    pi(r, c) = ga.vectors(r, i) * std::conj(ga.vectors(c, i));
                    qj(r, c) = gb.vectors(r, j) * std::conj(gb.vectors(c, j));
                }
            const ceh::HomogeneousEffectHistory ha(n, {{ta, pi}});
            const ceh::HomogeneousEffectHistory hb(n, {{tb, qj}});
            w += ga.values[i] * gb.values[j] * ceh::decoherence_weight(s, ha, hb);
        }
    return w;
}

}  // namespace test_support
