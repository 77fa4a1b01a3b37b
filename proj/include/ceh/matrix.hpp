#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "ceh/error.hpp"

namespace ceh {

using Complex = std::complex<double>;

// Dense square complex matrix, row-major storage. Every operator in the
// library (effects, states, propagators, class operators) is one of these;
// dimensions stay small so no sparsity or blocking is attempted.
class ComplexMatrix {
public:
    ComplexMatrix() : dim_(0) {}

    explicit ComplexMatrix(std::size_t dim) : dim_(dim), a_(dim * dim, Complex(0.0, 0.0)) {}

    ComplexMatrix(std::size_t dim, std::vector<Complex> entries) : dim_(dim), a_(std::move(entries)) {
        if (a_.size() != dim_ * dim_) throw Error("dimension mismatch", "entry count does not match dim*dim");
    }

    ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) : dim_(rows.size()) {
        a_.reserve(dim_ * dim_);
        for (const auto& row : rows) {
            if (row.size() != dim_) throw Error("dimension mismatch", "ragged initializer");
            for (const auto& v : row) a_.push_back(v);
        }
    }

    static ComplexMatrix identity(std::size_t dim) {
        ComplexMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix diagonal(const std::vector<Complex>& d) {
        ComplexMatrix m(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t dim() const noexcept { return dim_; }

    Complex& operator()(std::size_t i, std::size_t j) { return a_[i * dim_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }

    const std::vector<Complex>& entries() const noexcept { return a_; }
    std::vector<Complex>& entries() noexcept { return a_; }

    ComplexMatrix adjoint() const {
        ComplexMatrix r(dim_);
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    Complex trace() const {
        Complex t(0.0, 0.0);
        for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : a_) s += std::norm(v);
        return std::sqrt(s);
    }

    bool all_finite() const {
        for (const auto& v : a_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    friend ComplexMatrix operator+(const ComplexMatrix& x, const ComplexMatrix& y) {
        require_same_dim(x, y);
        ComplexMatrix r(x.dim_);
        for (std::size_t k = 0; k < r.a_.size(); ++k) r.a_[k] = x.a_[k] + y.a_[k];
        return r;
    }

    friend ComplexMatrix operator-(const ComplexMatrix& x, const ComplexMatrix& y) {
        require_same_dim(x, y);
        ComplexMatrix r(x.dim_);
        for (std::size_t k = 0; k < r.a_.size(); ++k) r.a_[k] = x.a_[k] - y.a_[k];
        return r;
    }

    friend ComplexMatrix operator*(const ComplexMatrix& x, const ComplexMatrix& y) {
        require_same_dim(x, y);
        const std::size_t n = x.dim_;
        ComplexMatrix r(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const Complex xik = x(i, k);
                if (xik == Complex(0.0, 0.0)) continue;
                for (std::size_t j = 0; j < n; ++j) r(i, j) += xik * y(k, j);
            }
        return r;
    }

    friend ComplexMatrix operator*(const Complex& c, const ComplexMatrix& x) {
        ComplexMatrix r(x.dim_);
        for (std::size_t k = 0; k < r.a_.size(); ++k) r.a_[k] = c * x.a_[k];
        return r;
    }

    friend ComplexMatrix operator*(const ComplexMatrix& x, const Complex& c) { return c * x; }

private:
    static void require_same_dim(const ComplexMatrix& x, const ComplexMatrix& y) {
        if (x.dim_ != y.dim_) throw Error("dimension mismatch");
    }

    std::size_t dim_;
    std::vector<Complex> a_;
};

inline double distance(const ComplexMatrix& x, const ComplexMatrix& y) { return (x - y).frobenius_norm(); }

// tr(a * rho * b^dagger) without forming the triple product.
inline Complex trace_sandwich(const ComplexMatrix& a, const ComplexMatrix& rho, const ComplexMatrix& b) {
    const ComplexMatrix left = a * rho;
    Complex t(0.0, 0.0);
    for (std::size_t i = 0; i < left.dim(); ++i)
        for (std::size_t j = 0; j < left.dim(); ++j) t += left(i, j) * std::conj(b(i, j));
    return t;
}

}  // namespace ceh
