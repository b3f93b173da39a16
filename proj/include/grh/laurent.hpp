#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "grh/matrix.hpp"

namespace grh {

// Matrix of truncated Laurent series in sigma = tau^(1/q). Exponents are
// integers in sigma units. Coefficients below lo() are exactly zero; the
// window [lo(), hi()] is stored; beyond hi() nothing is known unless the
// matrix is exact (a genuine Laurent polynomial), in which case hi() is
// unbounded. Reads past the valid window raise TRUNCATION_EXHAUSTED.
class LaurentMatrix {
  public:
    static constexpr long kInf = std::numeric_limits<long>::max() / 4;

    LaurentMatrix() : q_(1), rows_(0), cols_(0), lo_(0), hi_(kInf) {}

    LaurentMatrix(size_t rows, size_t cols, int q, long lo, long hi)
        : q_(q), rows_(rows), cols_(cols), lo_(lo), hi_(hi) {}

    static LaurentMatrix exact_zero(size_t rows, size_t cols, int q = 1) {
        return LaurentMatrix(rows, cols, q, 0, kInf);
    }

    static LaurentMatrix identity(size_t n, int q = 1) {
        LaurentMatrix m = exact_zero(n, n, q);
        m.add_term(0, Mat<Cyclotomic>::identity(n));
        return m;
    }

    static LaurentMatrix from_constant(const Mat<Cyclotomic>& c, int q = 1) {
        LaurentMatrix m = exact_zero(c.rows(), c.cols(), q);
        m.add_term(0, c);
        return m;
    }

    // sigma^e * c
    static LaurentMatrix monomial(const Mat<Cyclotomic>& c, long e, int q = 1) {
        LaurentMatrix m = exact_zero(c.rows(), c.cols(), q);
        m.add_term(e, c);
        return m;
    }

    // diag(sigma^{k_1}, ..., sigma^{k_n})
    static LaurentMatrix power_diagonal(const std::vector<long>& k, int q = 1) {
        LaurentMatrix m = exact_zero(k.size(), k.size(), q);
        for (size_t i = 0; i < k.size(); ++i) {
            Mat<Cyclotomic> e(k.size(), k.size());
            e(i, i) = Cyclotomic::one();
            m.add_term(k[i], e);
        }
        return m;
    }

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    int root_index() const { return q_; }
    long lo() const { return lo_; }
    long hi() const { return hi_; }
    bool exact() const { return hi_ == kInf; }
    long stored_top() const { return lo_ + static_cast<long>(coeff_.size()) - 1; }

    // Insert/accumulate one coefficient matrix; extends storage as needed.
    void add_term(long e, const Mat<Cyclotomic>& m) {
        if (m.rows() != rows_ || m.cols() != cols_) fail(errc::internal, "term shape mismatch");
        if (!exact() && e > hi_) fail(errc::internal, "term beyond declared window");
        ensure_storage(e);
        Mat<Cyclotomic>& slot = coeff_[static_cast<size_t>(e - lo_)];
        slot = slot + m;
    }

    Mat<Cyclotomic> coefficient(long e) const {
        if (e > hi_) fail(errc::truncation_exhausted, "coefficient beyond valid order");
        if (e < lo_ || static_cast<size_t>(e - lo_) >= coeff_.size())
            return Mat<Cyclotomic>(rows_, cols_);
        return coeff_[static_cast<size_t>(e - lo_)];
    }

    Cyclotomic entry(size_t i, size_t j, long e) const {
        if (e > hi_) fail(errc::truncation_exhausted, "coefficient beyond valid order");
        if (e < lo_ || static_cast<size_t>(e - lo_) >= coeff_.size()) return Cyclotomic::zero();
        return coeff_[static_cast<size_t>(e - lo_)](i, j);
    }

    // The (i, j) entry as a 1x1 series with the same window.
    LaurentMatrix entry_series(size_t i, size_t j) const {
        LaurentMatrix e(1, 1, q_, lo_, hi_);
        for (long ex = lo_; ex <= stored_top(); ++ex) {
            Cyclotomic c = entry(i, j, ex);
            if (c.is_zero()) continue;
            Mat<Cyclotomic> cm(1, 1);
            cm(0, 0) = c;
            e.add_term(ex, cm);
        }
        return e;
    }

    // First exponent carrying a nonzero matrix; nullopt when everything
    // visible vanishes (the exact zero matrix, or truncation too shallow).
    std::optional<long> valuation() const {
        for (long e = lo_; e <= stored_top(); ++e)
            if (!coeff_[static_cast<size_t>(e - lo_)].is_zero()) return e;
        return std::nullopt;
    }

    std::optional<long> row_valuation(size_t i, long scan_hi) const {
        long top = std::min(scan_hi, stored_top());
        for (long e = lo_; e <= top; ++e)
            for (size_t j = 0; j < cols_; ++j)
                if (!entry(i, j, e).is_zero()) return e;
        return std::nullopt;
    }

    std::vector<Cyclotomic> row_coefficients(size_t i, long e) const {
        std::vector<Cyclotomic> v(cols_);
        for (size_t j = 0; j < cols_; ++j) v[j] = entry(i, j, e);
        return v;
    }

    friend LaurentMatrix operator+(const LaurentMatrix& a, const LaurentMatrix& b) {
        check_compat(a, b);
        LaurentMatrix r(a.rows_, a.cols_, a.q_, std::min(a.lo_, b.lo_), std::min(a.hi_, b.hi_));
        long top = std::min(r.hi_, std::max(a.stored_top(), b.stored_top()));
        for (long e = r.lo_; e <= top; ++e) {
            Mat<Cyclotomic> c = a.coefficient(e) + b.coefficient(e);
            if (!c.is_zero()) r.add_term(e, c);
        }
        return r;
    }

    friend LaurentMatrix operator-(const LaurentMatrix& a, const LaurentMatrix& b) {
        return a + (-b);
    }

    LaurentMatrix operator-() const {
        LaurentMatrix r = *this;
        for (auto& c : r.coeff_) c = -c;
        return r;
    }

    friend LaurentMatrix operator*(const LaurentMatrix& a, const LaurentMatrix& b) {
        if (a.cols_ != b.rows_) fail(errc::internal, "laurent shape mismatch");
        if (a.q_ != b.q_) fail(errc::internal, "laurent root mismatch");
        long hi = kInf;
        if (!a.exact() || !b.exact()) {
            long ha = a.exact() ? kInf : a.hi_ + b.lo_;
            long hb = b.exact() ? kInf : b.hi_ + a.lo_;
            hi = std::min(ha, hb);
        }
        LaurentMatrix r(a.rows_, b.cols_, a.q_, a.lo_ + b.lo_, hi);
        long top = std::min(hi, a.stored_top() + b.stored_top());
        for (long e = r.lo_; e <= top; ++e) {
            Mat<Cyclotomic> acc(a.rows_, b.cols_);
            for (long ea = a.lo_; ea <= std::min(a.stored_top(), e - b.lo_); ++ea) {
                long eb = e - ea;
                if (eb < b.lo_ || eb > b.stored_top()) continue;
                acc = acc + a.coefficient(ea) * b.coefficient(eb);
            }
            if (!acc.is_zero()) r.add_term(e, acc);
        }
        return r;
    }

    // multiply by sigma^e
    LaurentMatrix shifted(long e) const {
        LaurentMatrix r = *this;
        r.lo_ += e;
        if (!r.exact()) r.hi_ += e;
        return r;
    }

    LaurentMatrix truncated(long new_hi) const {
        if (new_hi >= hi_) return *this;
        LaurentMatrix r(rows_, cols_, q_, lo_, new_hi);
        for (long e = lo_; e <= std::min(new_hi, stored_top()); ++e) {
            Mat<Cyclotomic> c = coefficient(e);
            if (!c.is_zero()) r.add_term(e, c);
        }
        return r;
    }

    // Series inverse; needs an invertible leading coefficient matrix.
    LaurentMatrix inverted() const {
        if (rows_ != cols_) fail(errc::internal, "inverse of non-square series");
        auto v = valuation();
        if (!v) fail(errc::singular_input, "series with no detectable valuation");
        Mat<Cyclotomic> lead = coefficient(*v);
        Mat<Cyclotomic> lead_inv;
        try {
            lead_inv = inverse(lead);
        } catch (const error&) {
            fail(errc::singular_input, "leading coefficient matrix is singular");
        }
        long len = exact() ? options::default_truncation : hi_ - *v;
        std::vector<Mat<Cyclotomic>> g(static_cast<size_t>(len) + 1, Mat<Cyclotomic>(rows_, cols_));
        g[0] = lead_inv;
        for (long j = 1; j <= len; ++j) {
            Mat<Cyclotomic> acc(rows_, cols_);
            for (long k = 1; k <= j; ++k) {
                Mat<Cyclotomic> fk = coefficient(*v + k);
                if (fk.is_zero()) continue;
                acc = acc + fk * g[static_cast<size_t>(j - k)];
            }
            g[static_cast<size_t>(j)] = -(lead_inv * acc);
        }
        LaurentMatrix r(rows_, cols_, q_, -*v, -*v + len);
        for (long j = 0; j <= len; ++j)
            if (!g[static_cast<size_t>(j)].is_zero()) r.add_term(-*v + j, g[static_cast<size_t>(j)]);
        return r;
    }

    // Strictly negative-exponent part, as an exact Laurent polynomial.
    LaurentMatrix principal_part() const {
        LaurentMatrix r = exact_zero(rows_, cols_, q_);
        for (long e = lo_; e < 0 && e <= stored_top(); ++e) {
            Mat<Cyclotomic> c = coefficient(e);
            if (!c.is_zero()) r.add_term(e, c);
        }
        return r;
    }

    // Coefficient-wise comparison over the overlap of the valid windows.
    friend bool equal_on_common_window(const LaurentMatrix& a, const LaurentMatrix& b) {
        check_compat(a, b);
        long top = std::min(a.hi_, b.hi_);
        long bottom = std::min(a.lo_, b.lo_);
        if (top == kInf) top = std::max(a.stored_top(), b.stored_top());
        for (long e = bottom; e <= top; ++e)
            if (a.coefficient(e) != b.coefficient(e)) return false;
        return true;
    }

  private:
    static void check_compat(const LaurentMatrix& a, const LaurentMatrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) fail(errc::internal, "shape mismatch");
        if (a.q_ != b.q_) fail(errc::internal, "root mismatch");
    }

    void ensure_storage(long e) {
        if (coeff_.empty()) {
            lo_ = e;
            coeff_.assign(1, Mat<Cyclotomic>(rows_, cols_));
            return;
        }
        while (e < lo_) {
            coeff_.insert(coeff_.begin(), Mat<Cyclotomic>(rows_, cols_));
            --lo_;
        }
        while (e > stored_top()) coeff_.push_back(Mat<Cyclotomic>(rows_, cols_));
    }

    int q_;
    size_t rows_, cols_;
    long lo_, hi_;
    std::vector<Mat<Cyclotomic>> coeff_;
};

// Determinant as a 1x1 truncated series, by permutation expansion. The
// dimensions this workbench meets make the p! cost irrelevant.
inline LaurentMatrix laurent_det(const LaurentMatrix& m) {
    if (m.rows() != m.cols()) fail(errc::internal, "det of non-square");
    size_t n = m.rows();
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    LaurentMatrix det(1, 1, m.root_index(), 0, m.hi() == LaurentMatrix::kInf
                                                   ? LaurentMatrix::kInf
                                                   : m.hi() * static_cast<long>(n));
    bool first = true;
    std::function<void(size_t, int)> rec = [&](size_t k, int sign) {
        if (k == n) {
            LaurentMatrix prod = LaurentMatrix::identity(1, m.root_index());
            for (size_t i = 0; i < n; ++i) prod = prod * m.entry_series(i, perm[i]);
            if (sign < 0) prod = -prod;
            det = first ? prod : det + prod;
            first = false;
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
