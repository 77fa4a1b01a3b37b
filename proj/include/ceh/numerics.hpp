#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "ceh/matrix.hpp"

namespace ceh {

inline constexpr std::size_t kMaxTensorDim = 4096;

// Scale factor used by relative tolerances: max(1, ||m||_F).
inline double scale_of(const ComplexMatrix& m) { return std::max(1.0, m.frobenius_norm()); }

inline double default_tol(const ComplexMatrix& m) { return 1e-10 * scale_of(m); }

// --- Kronecker product ---

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                          std::size_t max_dim = kMaxTensorDim) {
    const std::size_t da = a.dim();
    const std::size_t db = b.dim();
    if (da != 0 && (da * db) / da != db) throw Error("tensor dimension overflow");
    const std::size_t d = da * db;
    if (d > max_dim) throw Error("tensor dimension overflow");
    ComplexMatrix r(d);
    for (std::size_t i = 0; i < da; ++i)
        for (std::size_t j = 0; j < da; ++j) {
            const Complex aij = a(i, j);
            if (aij == Complex(0.0, 0.0)) continue;
            for (std::size_t k = 0; k < db; ++k)
                for (std::size_t l = 0; l < db; ++l) r(i * db + k, j * db + l) = aij * b(k, l);
        }
    return r;
}

// --- Hermitian eigensolver (cyclic Jacobi with complex rotations) ---

struct HermitianEigen {
    std::vector<double> values;  // ascending
    ComplexMatrix vectors;       // columns are eigenvectors, same order
};

namespace detail {

// One two-sided rotation zeroing a(p,q). The rotation is the complex Jacobi
// rotation: diagonalize the 2x2 block [[a_pp, r e^{i t}], [r e^{-i t}, a_qq]].
inline void jacobi_rotate(ComplexMatrix& a, ComplexMatrix& v, std::size_t p, std::size_t q) {
    const Complex apq = a(p, q);
    const double r = std::abs(apq);
    if (r == 0.0) return;
    const Complex phase = apq / r;
    const double app = a(p, p).real();
    const double aqq = a(q, q).real();
    const double theta = (app - aqq) / (2.0 * r);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;
    const std::size_t n = a.dim();
    // columns: A <- A * U with U = [[c, -s*phase], [s*conj(phase), c]]
    for (std::size_t i = 0; i < n; ++i) {
        const Complex aip = a(i, p);
        const Complex aiq = a(i, q);
        a(i, p) = c * aip + s * std::conj(phase) * aiq;
        a(i, q) = -s * phase * aip + c * aiq;
    }
    // rows: A <- U^dagger * A
    for (std::size_t j = 0; j < n; ++j) {
        const Complex apj = a(p, j);
        const Complex aqj = a(q, j);
        a(p, j) = c * apj + s * phase * aqj;
        a(q, j) = -s * std::conj(phase) * apj + c * aqj;
    }
    // force the block to its exact fixed point
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    a(p, p) = Complex(a(p, p).real(), 0.0);
    a(q, q) = Complex(a(q, q).real(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Complex vip = v(i, p);
        const Complex viq = v(i, q);
        v(i, p) = c * vip + s * std::conj(phase) * viq;
        v(i, q) = -s * phase * vip + c * viq;
    }
}

inline double offdiag_norm(const ComplexMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

}  // namespace detail

inline HermitianEigen hermitian_eig(const ComplexMatrix& m, std::size_t max_sweeps = 100) {
    const std::size_t n = m.dim();
    const double herm_dev = distance(m, m.adjoint());
    if (herm_dev > 1e-10 * scale_of(m)) throw Error("not hermitian");
    // work on the exactly hermitian part
    ComplexMatrix a(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    ComplexMatrix v = ComplexMatrix::identity(n);
    const double target = 1e-14 * m.frobenius_norm();
    bool converged = detail::offdiag_norm(a) <= target;
    for (std::size_t sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) detail::jacobi_rotate(a, v, p, q);
        converged = detail::offdiag_norm(a) <= target;
    }
    if (!converged) throw Error("eig failure", "jacobi sweeps exhausted");
    HermitianEigen out;
    out.values.resize(n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i).real();
    std::stable_sort(order.begin(), order.end(),
                     [&diag](std::size_t x, std::size_t y) { return diag[x] < diag[y]; });
    out.vectors = ComplexMatrix(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = diag[order[j]];
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

// --- spectral functions ---

namespace detail {

// Snap tiny eigenvalue excursions outside [0, 1] back onto the interval.
inline double clamp_spectrum(double lambda, double scale) {
    if (lambda < 0.0 && lambda >= -1e-10 * scale) return 0.0;
    if (lambda > 1.0 && lambda <= 1.0 + 1e-10 * scale) return 1.0;
    return lambda;
}

inline ComplexMatrix rebuild(const HermitianEigen& eig, const std::vector<Complex>& f) {
    const std::size_t n = eig.vectors.dim();
    ComplexMatrix r(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (f[k] == Complex(0.0, 0.0)) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const Complex w = f[k] * eig.vectors(i, k);
            for (std::size_t j = 0; j < n; ++j) r(i, j) += w * std::conj(eig.vectors(j, k));
        }
    }
    return r;
}

}  // namespace detail

// m^p for positive semidefinite m and real p > 0, by spectral calculus.
inline ComplexMatrix psd_power(const ComplexMatrix& m, double p) {
    const HermitianEigen eig = hermitian_eig(m);
    const double s = scale_of(m);
    std::vector<Complex> f(eig.values.size());
    for (std::size_t k = 0; k < eig.values.size(); ++k) {
        double lam = detail::clamp_spectrum(eig.values[k], s);
        if (lam < 0.0) throw Error("not positive semidefinite");
        f[k] = Complex(std::pow(lam, p), 0.0);
    }
    return detail::rebuild(eig, f);
}

// exp(-i * theta * h) for hermitian h.
inline ComplexMatrix unitary_exp(const ComplexMatrix& h, double theta) {
    const HermitianEigen eig = hermitian_eig(h);
    std::vector<Complex> f(eig.values.size());
    for (std::size_t k = 0; k < eig.values.size(); ++k) {
        const double phi = -theta * eig.values[k];
        f[k] = Complex(std::cos(phi), std::sin(phi));
    }
    return detail::rebuild(eig, f);
}

// --- operator classification ---

struct OperatorClass {
    bool is_hermitian = false;
    bool is_psd = false;
    bool is_effect = false;
    bool is_projector = false;
    bool is_density = false;
    double tol = 0.0;
    double hermiticity_deviation = 0.0;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    double trace_deviation = 0.0;  // |tr(m) - 1|
};

inline OperatorClass classify(const ComplexMatrix& m, double tol) {
    OperatorClass oc;
    oc.tol = tol;
    oc.hermiticity_deviation = distance(m, m.adjoint());
    oc.is_hermitian = oc.hermiticity_deviation <= tol;
    if (!oc.is_hermitian) return oc;
    const std::size_t n = m.dim();
    ComplexMatrix h(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    const HermitianEigen eig = hermitian_eig(h);
    oc.min_eigenvalue = eig.values.front();
    oc.max_eigenvalue = eig.values.back();
    oc.is_psd = oc.min_eigenvalue >= -tol;
    oc.is_effect = oc.is_psd && oc.max_eigenvalue <= 1.0 + tol;
    bool spectral = true;
    for (double lam : eig.values)
        if (std::abs(lam) > tol && std::abs(lam - 1.0) > tol) spectral = false;
    oc.is_projector = spectral;
    oc.trace_deviation = std::abs(m.trace() - Complex(1.0, 0.0));
    oc.is_density = oc.is_psd && oc.trace_deviation <= tol;
    return oc;
}

inline OperatorClass classify(const ComplexMatrix& m) { return classify(m, default_tol(m)); }

}  // namespace ceh
