#pragma once

#include <algorithm>
#include <vector>

#include "grh/laurent.hpp"

namespace grh {

struct SauvageResult {
    LaurentMatrix gamma;      // polynomial in 1/sigma, det constant (unit)
    std::vector<long> k;      // integer diagonal, sigma-units
    LaurentMatrix f0;         // invertible at order zero
};

struct PermutationResult {
    LaurentMatrix t;          // polynomial in 1/sigma, invertible outside 0
    LaurentMatrix h;          // invertible at order zero
    std::vector<long> d;      // permutation of the input diagonal
};

struct BlockClearResult {
    LaurentMatrix gamma;      // meromorphic at 0, unipotent block form
    LaurentMatrix top_clean;  // holomorphic top block
};

namespace detail {

inline std::vector<LaurentMatrix> split_rows(const LaurentMatrix& m) {
    std::vector<LaurentMatrix> rows;
    rows.reserve(m.rows());
    for (size_t i = 0; i < m.rows(); ++i) {
        LaurentMatrix r(1, m.cols(), m.root_index(), m.lo(), m.hi());
        for (long e = m.lo(); e <= m.stored_top(); ++e) {
            Mat<Cyclotomic> c(1, m.cols());
            bool nz = false;
            for (size_t j = 0; j < m.cols(); ++j) {
                c(0, j) = m.entry(i, j, e);
                nz = nz || !c(0, j).is_zero();
            }
            if (nz) r.add_term(e, c);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

inline LaurentMatrix join_rows(const std::vector<LaurentMatrix>& rows, size_t cols, int q) {
    long lo = 0, hi = LaurentMatrix::kInf;
    for (const auto& r : rows) {
        lo = std::min(lo, r.lo());
        hi = std::min(hi, r.hi());
    }
    LaurentMatrix m(rows.size(), cols, q, lo, hi);
    for (size_t i = 0; i < rows.size(); ++i) {
        for (long e = rows[i].lo(); e <= std::min(rows[i].stored_top(), hi); ++e) {
            Mat<Cyclotomic> c(rows.size(), cols);
            bool nz = false;
            for (size_t j = 0; j < cols; ++j) {
                c(i, j) = rows[i].entry(0, j, e);
                nz = nz || !c(i, j).is_zero();
            }
            if (nz) m.add_term(e, c);
        }
    }
    return m;
}

// Row reduction at the level of leading coefficient vectors: combine rows with
// nonnegative powers of 1/sigma until the leading vectors become independent.
// Works on detached rows so each keeps its own validity window. Returns the
// final row valuations.
inline std::vector<long> leading_row_reduction(std::vector<LaurentMatrix>& srows,
                                               std::vector<LaurentMatrix>& grows,
                                               long iteration_cap) {
    const size_t p = srows.size();
    std::vector<long> v(p, 0);
    for (long iter = 0;; ++iter) {
        if (iter > iteration_cap)
            fail(errc::truncation_exhausted, "row reduction exceeded the truncation budget");
        Mat<Cyclotomic> lead(p, srows[0].cols());
        for (size_t i = 0; i < p; ++i) {
            auto vi = srows[i].row_valuation(0, srows[i].hi());
            if (!vi) {
                if (srows[i].exact())
                    fail(errc::singular_input, "row vanished: matrix not formally invertible");
                fail(errc::truncation_exhausted,
                     "row valuation undetectable within the truncation order");
            }
            v[i] = *vi;
            auto rc = srows[i].row_coefficients(0, v[i]);
            for (size_t j = 0; j < rc.size(); ++j) lead(i, j) = rc[j];
        }
        Mat<Cyclotomic> ker = kernel_basis(lead.transpose());
        if (ker.cols() == 0) return v;
        // pivot: minimal valuation in the relation support, lowest index first
        std::vector<size_t> supp;
        for (size_t i = 0; i < p; ++i)
            if (!ker(i, 0).is_zero()) supp.push_back(i);
        size_t pivot = supp[0];
        for (size_t i : supp)
            if (v[i] < v[pivot]) pivot = i;
        Cyclotomic norm = ker(pivot, 0).inv();
        LaurentMatrix new_s(1, srows[0].cols(), srows[0].root_index(), 0, LaurentMatrix::kInf);
        LaurentMatrix new_g(1, grows[0].cols(), grows[0].root_index(), 0, LaurentMatrix::kInf);
        bool first = true;
        for (size_t i : supp) {
            Cyclotomic ci = ker(i, 0) * norm;
            Mat<Cyclotomic> scale(1, 1);
            scale(0, 0) = ci;
            LaurentMatrix factor = LaurentMatrix::monomial(scale, v[pivot] - v[i],
                                                           srows[0].root_index());
            LaurentMatrix segs = factor * srows[i];
            LaurentMatrix segg = factor * grows[i];
            if (first) {
                new_s = segs;
                new_g = segg;
                first = false;
            } else {
                new_s = new_s + segs;
                new_g = new_g + segg;
            }
        }
        srows[pivot] = std::move(new_s);
        grows[pivot] = std::move(new_g);
    }
}

}  // namespace detail

// Valuation of det F, or SINGULAR_INPUT when it cannot be seen through the
// truncation window.
inline long det_valuation(const LaurentMatrix& f) {
    LaurentMatrix d = laurent_det(f);
    auto v = d.valuation();
    if (!v) fail(errc::singular_input, "determinant valuation undetectable");
    return *v;
}

// Row reduction to the form Gamma * F = sigma^K * F0 with Gamma polynomial in
// 1/sigma and holomorphically invertible outside the origin (det Gamma is a
// nonzero constant), and F0 invertible at order zero.
inline SauvageResult sauvage_reduce(const LaurentMatrix& f) {
    if (f.rows() != f.cols()) fail(errc::singular_input, "square input required");
    long vdet = det_valuation(f);
    auto srows = detail::split_rows(f);
    auto grows = detail::split_rows(LaurentMatrix::identity(f.rows(), f.root_index()));
    long sum_init = 0;
    for (const auto& r : srows) {
        auto v = r.valuation();
        sum_init += v ? *v : 0;
    }
    long cap = (vdet - sum_init) + static_cast<long>(f.rows()) + 8;
    std::vector<long> k = detail::leading_row_reduction(srows, grows, cap);

    SauvageResult out;
    out.k = k;
    long sum_k = 0;
    for (long x : k) sum_k += x;
    if (sum_k != vdet) fail(errc::internal, "determinant valuation not conserved");
    for (size_t i = 0; i < srows.size(); ++i) srows[i] = srows[i].shifted(-k[i]);
    out.f0 = detail::join_rows(srows, f.cols(), f.root_index());
    out.gamma = detail::join_rows(grows, f.rows(), f.root_index());
    return out;
}

// T * sigma^K * F = H * sigma^D with D a permutation of K. Candidates are
// tried deterministically: K itself first, then the remaining distinct
// permutations in lexicographic order; for each, success means the row
// reduction of sigma^K F sigma^{-D} terminates with all valuations zero.
inline PermutationResult permutation_reduce(const std::vector<long>& k, const LaurentMatrix& f) {
    if (f.rows() != f.cols() || f.rows() != k.size())
        fail(errc::singular_input, "shape mismatch");
    auto v = f.valuation();
    if (!v || *v != 0)
        fail(errc::singular_input, "matrix must be invertible at order zero");
    {
        Mat<Cyclotomic> lead = f.coefficient(0);
        try {
            (void)inverse(lead);
        } catch (const error&) {
            fail(errc::singular_input, "constant term not invertible");
        }
    }

    std::vector<std::vector<long>> candidates;
    candidates.push_back(k);
    std::vector<long> sorted = k;
    std::sort(sorted.begin(), sorted.end());
    std::vector<long> perm = sorted;
    do {
        if (perm != k) candidates.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    bool saw_truncation = false;
    for (const auto& d : candidates) {
        LaurentMatrix m = LaurentMatrix::power_diagonal(k, f.root_index()) * f;
        std::vector<long> neg_d(d.size());
        for (size_t i = 0; i < d.size(); ++i) neg_d[i] = -d[i];
        m = m * LaurentMatrix::power_diagonal(neg_d, f.root_index());
        try {
            SauvageResult r = sauvage_reduce(m);
            bool all_zero = std::all_of(r.k.begin(), r.k.end(), [](long x) { return x == 0; });
            if (!all_zero) continue;
            PermutationResult out;
            out.t = r.gamma;
            out.h = r.f0;
            out.d = d;
            return out;
        } catch (const error& e) {
            // a candidate whose gauge runs out of window is simply not
            // certifiable at this truncation; move to the next one
            if (e.code() == errc::truncation_exhausted || e.code() == errc::singular_input) {
                saw_truncation = true;
                continue;
            }
            throw;
        }
    }
    if (saw_truncation)
        fail(errc::truncation_exhausted, "no permutation certified within the truncation order");
    fail(errc::internal, "no diagonal permutation admits the factorization");
}

// Clears the poles of the top block of the stack (top over bottom) by the
// unipotent gauge Gamma = [[I, -C], [0, I]] with C the principal part of
// top * bottom^{-1}.
inline BlockClearResult block_holo_clear(const LaurentMatrix& top, const LaurentMatrix& bottom) {
    if (top.cols() != bottom.cols() || bottom.rows() != bottom.cols())
        fail(errc::singular_input, "stack shapes invalid");
    auto vb = bottom.valuation();
    if (!vb || *vb < 0)
        fail(errc::singular_input, "bottom block must be holomorphic at the origin");
    if (*vb > 0) fail(errc::singular_input, "bottom block not invertible at order zero");
    LaurentMatrix bottom_inv = bottom.inverted();  // SINGULAR_INPUT if the unit part fails
    LaurentMatrix quotient = top * bottom_inv;
    if (quotient.hi() < -1)
        fail(errc::truncation_exhausted, "window too shallow to isolate the pole part");
    LaurentMatrix c = quotient.principal_part();
    LaurentMatrix clean = top - c * bottom;
    // everything below order zero must have cancelled
    for (long e = clean.lo(); e < 0; ++e)
        if (!clean.coefficient(e).is_zero())
            fail(errc::internal, "pole clearance failed");

    size_t p1 = top.rows(), p2 = bottom.rows();
    LaurentMatrix gamma = LaurentMatrix::identity(p1 + p2, top.root_index());
    for (long e = c.lo(); e <= c.stored_top(); ++e) {
        Mat<Cyclotomic> cm = c.coefficient(e);
        if (cm.is_zero()) continue;
        Mat<Cyclotomic> block(p1 + p2, p1 + p2);
        for (size_t i = 0; i < p1; ++i)
            for (size_t j = 0; j < p2; ++j) block(i, p1 + j) = -cm(i, j);
        gamma.add_term(e, block);
    }
    return {gamma, clean};
}

// Stack (top over bottom) as one matrix, for multiply-back checks.
inline LaurentMatrix stack_blocks(const LaurentMatrix& top, const LaurentMatrix& bottom) {
    size_t p1 = top.rows(), p2 = bottom.rows(), cols = top.cols();
    LaurentMatrix s(p1 + p2, cols, top.root_index(), std::min(top.lo(), bottom.lo()),
                    std::min(top.hi(), bottom.hi()));
    for (long e = top.lo(); e <= std::min(top.stored_top(), s.hi()); ++e) {
        Mat<Cyclotomic> c(p1 + p2, cols);
        bool nz = false;
        for (size_t i = 0; i < p1; ++i)
            for (size_t j = 0; j < cols; ++j) {
                c(i, j) = top.entry(i, j, e);
                nz = nz || !c(i, j).is_zero();
            }
        if (nz) s.add_term(e, c);
    }
    for (long e = bottom.lo(); e <= std::min(bottom.stored_top(), s.hi()); ++e) {
        Mat<Cyclotomic> c(p1 + p2, cols);
        bool nz = false;
        for (size_t i = 0; i < p2; ++i)
            for (size_t j = 0; j < cols; ++j) {
                c(p1 + i, j) = bottom.entry(i, j, e);
                nz = nz || !c(p1 + i, j).is_zero();
            }
        if (nz) s.add_term(e, c);
    }
    return s;
}

}  // namespace grh
