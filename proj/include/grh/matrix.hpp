#pragma once

#include <functional>
#include <initializer_list>
#include <vector>

#include "grh/complex_exact.hpp"
#include "grh/cyclotomic.hpp"
#include "grh/pi_poly.hpp"

namespace grh {

template <class T>
struct ring_traits;

template <>
struct ring_traits<Rational> {
    static Rational zero() { return Rational(0); }
    static Rational one() { return Rational(1); }
    static bool is_zero(const Rational& x) { return x == 0; }
    static Rational inv(const Rational& x) {
        if (x == 0) fail(errc::division_by_zero, "1/0");
        return Rational(1) / x;
    }
};

template <>
struct ring_traits<Cyclotomic> {
    static Cyclotomic zero() { return Cyclotomic::zero(); }
    static Cyclotomic one() { return Cyclotomic::one(); }
    static bool is_zero(const Cyclotomic& x) { return x.is_zero(); }
    static Cyclotomic inv(const Cyclotomic& x) { return x.inv(); }
};

template <>
struct ring_traits<PiPolynomial> {
    static PiPolynomial zero() { return PiPolynomial::zero(); }
    static PiPolynomial one() { return PiPolynomial::one(); }
    static bool is_zero(const PiPolynomial& x) { return x.is_zero(); }
    // no inv: PiPolynomial is only a ring
};

template <>
struct ring_traits<PiRational> {
    static PiRational zero() { return PiRational::zero(); }
    static PiRational one() { return PiRational::one(); }
    static bool is_zero(const PiRational& x) { return x.is_zero(); }
    static PiRational inv(const PiRational& x) { return x.inv(); }
};

template <>
struct ring_traits<ComplexExact> {
    static ComplexExact zero() { return ComplexExact(Rational(0)); }
    static ComplexExact one() { return ComplexExact(Rational(1)); }
    static bool is_zero(const ComplexExact& x) { return x.is_zero(); }
    static ComplexExact inv(const ComplexExact& x) {
        Rational n = x.re * x.re + x.im * x.im;
        if (n == 0) fail(errc::division_by_zero, "1/0");
        return ComplexExact(x.re / n, -x.im / n);
    }
};

template <class T>
class Mat {
  public:
    Mat() : rows_(0), cols_(0) {}
    Mat(size_t r, size_t c) : rows_(r), cols_(c), a_(r * c, ring_traits<T>::zero()) {}

    Mat(std::initializer_list<std::initializer_list<T>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        a_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_) fail(errc::internal, "ragged matrix literal");
            for (const auto& x : row) a_.push_back(x);
        }
    }

    static Mat identity(size_t n) {
        Mat m(n, n);
        for (size_t i = 0; i < n; ++i) m(i, i) = ring_traits<T>::one();
        return m;
    }

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    T& operator()(size_t i, size_t j) { return a_[i * cols_ + j]; }
    const T& operator()(size_t i, size_t j) const { return a_[i * cols_ + j]; }

    friend Mat operator+(const Mat& x, const Mat& y) {
        Mat r(x.rows_, x.cols_);
        for (size_t i = 0; i < x.a_.size(); ++i) r.a_[i] = x.a_[i] + y.a_[i];
        return r;
    }
    friend Mat operator-(const Mat& x, const Mat& y) {
        Mat r(x.rows_, x.cols_);
        for (size_t i = 0; i < x.a_.size(); ++i) r.a_[i] = x.a_[i] - y.a_[i];
        return r;
    }
    friend Mat operator*(const Mat& x, const Mat& y) {
        if (x.cols_ != y.rows_) fail(errc::internal, "matrix shape mismatch");
        Mat r(x.rows_, y.cols_);
        for (size_t i = 0; i < x.rows_; ++i)
            for (size_t k = 0; k < x.cols_; ++k) {
                if (ring_traits<T>::is_zero(x(i, k))) continue;
                for (size_t j = 0; j < y.cols_; ++j) {
                    if (ring_traits<T>::is_zero(y(k, j))) continue;
                    r(i, j) += x(i, k) * y(k, j);
                }
            }
        return r;
    }
    friend Mat operator*(const T& c, const Mat& x) {
        Mat r = x;
        for (auto& v : r.a_) v = c * v;
        return r;
    }
    Mat operator-() const {
        Mat r = *this;
        for (auto& v : r.a_) v = -v;
        return r;
    }

    friend bool operator==(const Mat& x, const Mat& y) {
        if (x.rows_ != y.rows_ || x.cols_ != y.cols_) return false;
        for (size_t i = 0; i < x.a_.size(); ++i)
            if (!(x.a_[i] == y.a_[i])) return false;
        return true;
    }
    friend bool operator!=(const Mat& x, const Mat& y) { return !(x == y); }

    bool is_identity() const {
        if (!square()) return false;
        return *this == identity(rows_);
    }

    bool is_zero() const {
        for (const auto& v : a_)
            if (!ring_traits<T>::is_zero(v)) return false;
        return true;
    }

    Mat transpose() const {
        Mat r(cols_, rows_);
        for (size_t i = 0; i < rows_; ++i)
            for (size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    template <class U, class F>
    Mat<U> map(F f) const {
        Mat<U> r(rows_, cols_);
        for (size_t i = 0; i < rows_; ++i)
            for (size_t j = 0; j < cols_; ++j) r(i, j) = f((*this)(i, j));
        return r;
    }

    std::vector<T> row(size_t i) const {
        return std::vector<T>(a_.begin() + i * cols_, a_.begin() + (i + 1) * cols_);
    }

  private:
    size_t rows_, cols_;
    std::vector<T> a_;
};

// In-place row reduction to reduced echelon form; returns pivot columns.
// Deterministic: pivots are the first nonzero entry scanning down each column.
template <class T>
std::vector<size_t> rref(Mat<T>& m) {
    std::vector<size_t> pivots;
    size_t r = 0;
    for (size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        size_t sel = r;
        while (sel < m.rows() && ring_traits<T>::is_zero(m(sel, c))) ++sel;
        if (sel == m.rows()) continue;
        if (sel != r)
            for (size_t j = 0; j < m.cols(); ++j) std::swap(m(sel, j), m(r, j));
        T piv_inv = ring_traits<T>::inv(m(r, c));
        for (size_t j = 0; j < m.cols(); ++j) m(r, j) = piv_inv * m(r, j);
        for (size_t i = 0; i < m.rows(); ++i) {
            if (i == r || ring_traits<T>::is_zero(m(i, c))) continue;
            T f = m(i, c);
            for (size_t j = 0; j < m.cols(); ++j) m(i, j) = m(i, j) - f * m(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

template <class T>
size_t rank(Mat<T> m) {
    return rref(m).size();
}

// Basis of the right kernel, columns of the result.
template <class T>
Mat<T> kernel_basis(Mat<T> m) {
    size_t n = m.cols();
    std::vector<size_t> pivots = rref(m);
    std::vector<bool> is_pivot(n, false);
    for (size_t c : pivots) is_pivot[c] = true;
    std::vector<size_t> free_cols;
    for (size_t c = 0; c < n; ++c)
        if (!is_pivot[c]) free_cols.push_back(c);
    Mat<T> basis(n, free_cols.size());
    for (size_t k = 0; k < free_cols.size(); ++k) {
        size_t fc = free_cols[k];
        basis(fc, k) = ring_traits<T>::one();
        for (size_t pi = 0; pi < pivots.size(); ++pi) basis(pivots[pi], k) = -m(pi, fc);
    }
    return basis;
}

template <class T>
Mat<T> inverse(const Mat<T>& m) {
    if (!m.square()) fail(errc::internal, "inverse of non-square matrix");
    size_t n = m.rows();
    Mat<T> aug(n, 2 * n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
        aug(i, n + i) = ring_traits<T>::one();
    }
    auto pivots = rref(aug);
    if (pivots.size() != n || pivots.back() >= n)
        fail(errc::singular_input, "matrix not invertible");
    Mat<T> inv(n, n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
    return inv;
}

// Ring determinant by Leibniz expansion; fine at the dimensions this
// workbench handles.
template <class T>
T leibniz_det(const Mat<T>& m) {
    if (!m.square()) fail(errc::internal, "determinant of non-square matrix");
    size_t n = m.rows();
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    T det = ring_traits<T>::zero();
    // iterate permutations with parity tracking
    std::function<void(size_t, int)> rec = [&](size_t k, int sign) {
        if (k == n) {
            T prod = ring_traits<T>::one();
            for (size_t i = 0; i < n; ++i) prod = prod * m(i, perm[i]);
            if (sign > 0)
                det = det + prod;
            else
                det = det - prod;
            return;
        }
        for (size_t i = k; i < n; ++i) {
            std::swap(perm[k], perm[i]);
            rec(k + 1, i == k ? sign : -sign);
            std::swap(perm[k], perm[i]);
        }
    };
    rec(0, 1);
    return det;
}

}  // namespace grh
