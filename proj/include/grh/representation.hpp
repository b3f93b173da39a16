#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "grh/local_datum.hpp"
#include "grh/matrix.hpp"

namespace grh {

namespace detail {

using PiRatPoly = std::vector<PiRational>;  // index = power of the variable

inline int prp_degree(const PiRatPoly& p) {
    for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i)
        if (!p[static_cast<size_t>(i)].is_zero()) return i;
    return -1;
}

inline PiRational prp_eval(const PiRatPoly& p, const PiRational& x) {
    PiRational acc;
    for (size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
    return acc;
}

// synthetic division by (X - c); remainder discarded (caller checks the root)
inline PiRatPoly prp_deflate(const PiRatPoly& p, const PiRational& c) {
    int d = prp_degree(p);
    PiRatPoly q(static_cast<size_t>(d), PiRational::zero());
    PiRational carry;
    for (int i = d; i >= 1; --i) {
        carry = p[static_cast<size_t>(i)] + carry * c;
        q[static_cast<size_t>(i - 1)] = carry;
        if (i == 1) carry = carry * c;
    }
    return q;
}

// Faddeev-LeVerrier: exact characteristic polynomial coefficients.
inline PiRatPoly charpoly(const Mat<PiRational>& a) {
    size_t p = a.rows();
    PiRatPoly cs(p + 1, PiRational::zero());
    cs[p] = PiRational::one();
    Mat<PiRational> m = Mat<PiRational>::identity(p);
    for (size_t k = 1; k <= p; ++k) {
        if (k > 1) {
            Mat<PiRational> shift = Mat<PiRational>::identity(p);
            for (size_t i = 0; i < p; ++i) shift(i, i) = cs[p - k + 1];
            m = a * (m + shift);
        } else {
            m = a;
        }
        PiRational tr;
        for (size_t i = 0; i < p; ++i) tr += m(i, i);
        cs[p - k] = -(tr / PiRational(Rational(static_cast<long>(k))));
    }
    return cs;
}

inline bool prp_is_rational(const PiRatPoly& p, std::vector<Rational>& out) {
    out.clear();
    for (const auto& c : p) {
        if (!c.denominator().is_constant() || !c.numerator().is_constant()) return false;
        Cyclotomic n = c.numerator().constant_value(), d = c.denominator().constant_value();
        if (!n.is_rational() || !d.is_rational()) return false;
        out.push_back(n.rational_value() / d.rational_value());
    }
    return true;
}

inline std::vector<Integer> divisors_of(Integer v) {
    if (v < 0) v = -v;
    std::vector<Integer> out;
    if (v == 0 || v > 1000000) return out;
    long n = v.convert_to<long>();
    for (long d = 1; d * d <= n; ++d)
        if (n % d == 0) {
            out.push_back(Integer(d));
            if (d != n / d) out.push_back(Integer(n / d));
        }
    return out;
}

}  // namespace detail

// The monodromy tuple: matrices over the fraction field of the tower, with
// the single product relation checked at construction.
struct MonodromyTuple {
    int dimension = 1;
    std::vector<Mat<PiRational>> matrices;

    static MonodromyTuple from(const std::vector<Mat<PiPolynomial>>& gs, int p) {
        MonodromyTuple t;
        t.dimension = p;
        Mat<PiPolynomial> prod = Mat<PiPolynomial>::identity(static_cast<size_t>(p));
        for (const auto& g : gs) {
            if (g.rows() != static_cast<size_t>(p) || g.cols() != static_cast<size_t>(p))
                fail(errc::block_mismatch, "monodromy matrix size mismatch");
            prod = prod * g;
            t.matrices.push_back(
                g.map<PiRational>([](const PiPolynomial& x) { return PiRational(x); }));
        }
        if (!prod.is_identity())
            fail(errc::block_mismatch, "monodromy matrices violate the product relation");
        return t;
    }

    static MonodromyTuple unchecked(std::vector<Mat<PiRational>> gs, int p) {
        MonodromyTuple t;
        t.dimension = p;
        t.matrices = std::move(gs);
        return t;
    }
};

namespace detail {

// Independent-set tracker over the fraction field with first-seen pivots.
class SpanTracker {
  public:
    explicit SpanTracker(size_t width) : width_(width) {}

    size_t size() const { return rows_.size(); }

    bool add(std::vector<PiRational> v) {
        for (size_t r = 0; r < rows_.size(); ++r) {
            PiRational c = v[pivots_[r]];  // by value: v[pivot] changes below
            if (c.is_zero()) continue;
            for (size_t j = 0; j < width_; ++j) v[j] -= c * rows_[r][j];
        }
        size_t pivot = width_;
        for (size_t j = 0; j < width_; ++j)
            if (!v[j].is_zero()) {
                pivot = j;
                break;
            }
        if (pivot == width_) return false;
        PiRational inv = v[pivot].inv();
        for (size_t j = 0; j < width_; ++j) v[j] = inv * v[j];
        rows_.push_back(std::move(v));
        pivots_.push_back(pivot);
        return true;
    }

  private:
    size_t width_;
    std::vector<std::vector<PiRational>> rows_;
    std::vector<size_t> pivots_;
};

inline std::vector<PiRational> flatten(const Mat<PiRational>& m) {
    std::vector<PiRational> v;
    v.reserve(m.rows() * m.cols());
    for (size_t i = 0; i < m.rows(); ++i)
        for (size_t j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
    return v;
}

}  // namespace detail

// Dimension of the unital algebra spanned by all words in the tuple, by
// closure under right multiplication. Equals p^2 exactly when the tuple is
// irreducible (the base-field dimension is stable under field extension).
inline int algebra_dimension(const MonodromyTuple& t) {
    size_t p = static_cast<size_t>(t.dimension);
    detail::SpanTracker span(p * p);
    std::vector<Mat<PiRational>> basis_words;
    Mat<PiRational> id = Mat<PiRational>::identity(p);
    if (span.add(detail::flatten(id))) basis_words.push_back(id);
    for (size_t at = 0; at < basis_words.size(); ++at) {
        Mat<PiRational> w = basis_words[at];
        for (const auto& g : t.matrices) {
            Mat<PiRational> next = w * g;
            if (span.add(detail::flatten(next))) basis_words.push_back(next);
        }
        if (basis_words.size() > p * p) break;  // cannot happen; guard
    }
    return static_cast<int>(span.size());
}

inline bool is_irreducible(const MonodromyTuple& t) {
    return algebra_dimension(t) == t.dimension * t.dimension;
}

// A subspace invariant under every matrix of the tuple, with the exact
// images of the basis in itself as the certificate.
struct InvariantSubspace {
    Mat<PiRational> basis;                   // p x dim, columns span the subspace
    int dimension = 1;
    std::vector<Mat<PiRational>> certificate;  // G_i B = B C_i
    bool scalar_family = false;  // every line of a larger eigenspace is invariant
};

namespace detail {

// Solve B X = W for X when B has full column rank; nullopt when W leaves the
// span of B.
inline std::optional<Mat<PiRational>> solve_in_span(const Mat<PiRational>& b,
                                                    const Mat<PiRational>& w) {
    size_t p = b.rows(), dim = b.cols(), m = w.cols();
    Mat<PiRational> aug(p, dim + m);
    for (size_t i = 0; i < p; ++i) {
        for (size_t j = 0; j < dim; ++j) aug(i, j) = b(i, j);
        for (size_t j = 0; j < m; ++j) aug(i, dim + j) = w(i, j);
    }
    auto pivots = rref(aug);
    Mat<PiRational> x(dim, m);
    for (size_t r = 0; r < pivots.size(); ++r) {
        if (pivots[r] >= dim) return std::nullopt;  // inconsistent: W outside span
        for (size_t j = 0; j < m; ++j) x(pivots[r], j) = aug(r, dim + j);
    }
    // rows beyond the pivot count must vanish on the W side
    for (size_t r = pivots.size(); r < p; ++r)
        for (size_t j = 0; j < m; ++j)
            if (!aug(r, dim + j).is_zero()) return std::nullopt;
    return x;
}

// Eigenvalues of one matrix inside the tower, with multiplicity, or
// UNSUPPORTED_SPECTRUM when the characteristic polynomial does not visibly
// split over the candidate set.
inline std::vector<PiRational> tower_eigenvalues(const Mat<PiRational>& g,
                                                 const std::vector<Cyclotomic>& declared) {
    PiRatPoly chi = charpoly(g);
    std::vector<PiRational> candidates;
    for (size_t i = 0; i < g.rows(); ++i) candidates.push_back(g(i, i));
    for (const auto& c : declared) candidates.push_back(PiRational(c));
    std::vector<Rational> rat;
    if (prp_is_rational(chi, rat)) {
        // rational root candidates p/q with p | constant, q | leading
        Integer scale = 1;
        for (const auto& r : rat) scale = scale / boost::multiprecision::gcd(scale, den(r)) * den(r);
        std::vector<Integer> ints;
        for (const auto& r : rat) ints.push_back(num(r) * (scale / den(r)));
        if (!ints.empty() && ints.front() != 0) {
            for (const auto& dp : divisors_of(ints.front()))
                for (const auto& dq : divisors_of(ints.back()))
                    for (int s = -1; s <= 1; s += 2) {
                        candidates.push_back(PiRational(Rational(s * dp, dq)));
                    }
        } else {
            candidates.push_back(PiRational::zero());
        }
        // roots of unity scaled by the rational candidates: small standard
        // conductors plus whatever the entries already use
        std::vector<long> conductors{3, 4, 5, 6, 8, 12};
        long m = 1;
        for (size_t i = 0; i < g.rows(); ++i)
            for (size_t j = 0; j < g.cols(); ++j) {
                for (const auto& c : g(i, j).numerator().coefficients())
                    m = lcm_long(m, c.conductor());
            }
        if (m > 1 && m <= 30) conductors.push_back(m);
        size_t base = candidates.size();
        for (long mc : conductors)
            for (long k = 1; k < mc; ++k)
                for (size_t ci = 0; ci < base; ++ci)
                    candidates.push_back(candidates[ci] *
                                         PiRational(Cyclotomic::root_of_unity(
                                             static_cast<int>(mc), k)));
    }
    std::vector<PiRational> roots;
    PiRatPoly rem = chi;
    bool progress = true;
    while (prp_degree(rem) > 0 && progress) {
        progress = false;
        for (const auto& c : candidates) {
            while (prp_degree(rem) > 0 && prp_eval(rem, c).is_zero()) {
                roots.push_back(c);
                rem = prp_deflate(rem, c);
                progress = true;
            }
        }
    }
    if (prp_degree(rem) > 0)
        fail(errc::unsupported_spectrum,
             "characteristic polynomial does not split over the declared tower");
    return roots;
}

struct LineSet {
    std::vector<Mat<PiRational>> lines;     // p x 1 columns
    std::vector<Mat<PiRational>> families;  // p x d, d >= 2: scalar eigenspaces
};

inline LineSet eigen_lines(const Mat<PiRational>& g, const std::vector<Cyclotomic>& declared) {
    LineSet out;
    std::vector<PiRational> seen;
    for (const auto& c : tower_eigenvalues(g, declared)) {
        bool dup = false;
        for (const auto& s : seen) dup = dup || s == c;
        if (dup) continue;
        seen.push_back(c);
        Mat<PiRational> shifted = g;
        for (size_t i = 0; i < g.rows(); ++i) shifted(i, i) -= c;
        Mat<PiRational> ker = kernel_basis(shifted);
        if (ker.cols() == 1)
            out.lines.push_back(ker);
        else if (ker.cols() >= 2)
            out.families.push_back(ker);
    }
    return out;
}

inline bool line_in_subspace(const Mat<PiRational>& v, const Mat<PiRational>& basis) {
    Mat<PiRational> aug(basis.rows(), basis.cols() + 1);
    for (size_t i = 0; i < basis.rows(); ++i) {
        for (size_t j = 0; j < basis.cols(); ++j) aug(i, j) = basis(i, j);
        aug(i, basis.cols()) = v(i, 0);
    }
    return rank(aug) == basis.cols();
}

inline Mat<PiRational> subspace_intersection(const Mat<PiRational>& a, const Mat<PiRational>& b) {
    // columns x, y with A x = B y: kernel of [A | -B]
    size_t p = a.rows();
    Mat<PiRational> stacked(p, a.cols() + b.cols());
    for (size_t i = 0; i < p; ++i) {
        for (size_t j = 0; j < a.cols(); ++j) stacked(i, j) = a(i, j);
        for (size_t j = 0; j < b.cols(); ++j) stacked(i, a.cols() + j) = -b(i, j);
    }
    Mat<PiRational> ker = kernel_basis(stacked);
    Mat<PiRational> inter(p, ker.cols());
    for (size_t k = 0; k < ker.cols(); ++k)
        for (size_t i = 0; i < p; ++i) {
            PiRational acc;
            for (size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * ker(j, k);
            inter(i, k) = acc;
        }
    // normalize to an independent spanning set
    Mat<PiRational> t = inter.transpose();
    auto pivots = rref(t);
    Mat<PiRational> out(p, pivots.size());
    for (size_t r = 0; r < pivots.size(); ++r)
        for (size_t i = 0; i < p; ++i) out(i, r) = t(r, i);
    return out;
}

}  // namespace detail

// All lines fixed by every matrix of the tuple. Eigenspaces of dimension
// two or more survive only when every matrix acts on them as a scalar; such
// families are returned with their basis lines flagged.
inline std::vector<InvariantSubspace> invariant_lines(const MonodromyTuple& t,
                                                      const std::vector<Cyclotomic>& declared) {
    if (t.dimension > 3)
        fail(errc::unsupported_spectrum, "invariant line search is limited to dimension <= 3");
    size_t p = static_cast<size_t>(t.dimension);
    // start from the full space as one family and refine matrix by matrix
    detail::LineSet current;
    current.families.push_back(Mat<PiRational>::identity(p));
    for (const auto& g : t.matrices) {
        detail::LineSet refined;
        // finite lines survive iff they are eigenlines of g; no eigenvalue
        // computation is needed for this part
        for (const auto& v : current.lines) {
            Mat<PiRational> w = g * v;
            bool parallel = true;
            for (size_t a = 0; a < p && parallel; ++a)
                for (size_t b = a + 1; b < p && parallel; ++b)
                    if (!(v(a, 0) * w(b, 0) == v(b, 0) * w(a, 0))) parallel = false;
            if (parallel) refined.lines.push_back(v);
        }
        // families refine against g's eigen structure
        if (!current.families.empty()) {
            detail::LineSet eig = detail::eigen_lines(g, declared);
            for (const auto& fam : current.families) {
                for (const auto& v : eig.lines)
                    if (detail::line_in_subspace(v, fam)) refined.lines.push_back(v);
                for (const auto& f2 : eig.families) {
                    Mat<PiRational> inter = detail::subspace_intersection(fam, f2);
                    if (inter.cols() == 1)
                        refined.lines.push_back(inter);
                    else if (inter.cols() >= 2)
                        refined.families.push_back(inter);
                }
            }
        }
        current = std::move(refined);
    }
    std::vector<InvariantSubspace> out;
    auto emit = [&](Mat<PiRational> basis, bool family) {
        InvariantSubspace s;
        s.dimension = static_cast<int>(basis.cols());
        s.basis = std::move(basis);
        s.scalar_family = family;
        for (const auto& g : t.matrices) {
            auto cert = detail::solve_in_span(s.basis, g * s.basis);
            if (!cert) fail(errc::internal, "invariant subspace certificate failed");
            s.certificate.push_back(std::move(*cert));
        }
        out.push_back(std::move(s));
    };
    // dedupe lines (projective equality)
    std::vector<Mat<PiRational>> unique_lines;
    for (const auto& v : current.lines) {
        bool dup = false;
        for (const auto& u : unique_lines) {
            bool parallel = true;
            for (size_t a = 0; a < p && parallel; ++a)
                for (size_t b = a + 1; b < p && parallel; ++b)
                    if (!(v(a, 0) * u(b, 0) == v(b, 0) * u(a, 0))) parallel = false;
            dup = dup || parallel;
        }
        if (!dup) unique_lines.push_back(v);
    }
    for (auto& v : unique_lines) emit(v, false);
    for (auto& fam : current.families) {
        // every line inside is invariant: emit the basis lines as representatives
        for (size_t c = 0; c < fam.cols(); ++c) {
            Mat<PiRational> col(p, 1);
            for (size_t i = 0; i < p; ++i) col(i, 0) = fam(i, c);
            bool dup = false;
            for (const auto& u : unique_lines) {
                bool parallel = true;
                for (size_t a = 0; a < p && parallel; ++a)
                    for (size_t b = a + 1; b < p && parallel; ++b)
                        if (!(col(a, 0) * u(b, 0) == col(b, 0) * u(a, 0))) parallel = false;
                dup = dup || parallel;
            }
            if (!dup) emit(col, true);
        }
    }
    return out;
}

inline std::vector<InvariantSubspace> invariant_lines(const MonodromyTuple& t) {
    return invariant_lines(t, {});
}

inline MonodromyTuple dual_tuple(const MonodromyTuple& t) {
    MonodromyTuple d;
    d.dimension = t.dimension;
    for (const auto& g : t.matrices) d.matrices.push_back(g.transpose());
    return d;
}

namespace detail {

// Ramified superblocks must be selected wholly or not at all.
inline bool selection_respects_superblocks(const LocalDatum& loc, const std::vector<int>& sel) {
    if (!loc.irregular()) return true;
    auto positions = expand(*loc.exponential_part);
    const auto& blocks = loc.exponential_part->blocks;
    for (size_t bi = 0; bi < blocks.size(); ++bi) {
        if (blocks[bi].ramification == 1) continue;
        int inside = 0, total = 0;
        for (size_t j = 0; j < positions.size(); ++j) {
            if (positions[j].block != static_cast<int>(bi)) continue;
            ++total;
            if (std::find(sel.begin(), sel.end(), static_cast<int>(j)) != sel.end()) ++inside;
        }
        if (inside != 0 && inside != total) return false;
    }
    return true;
}

// Determinant filter: the restricted monodromy determinant must match the
// product of the selected formal eigenvalue exponentials. Skipped when a
// nonreal exponent keeps the comparison outside the tower.
inline bool selection_determinant_matches(const LocalDatum& loc, const std::vector<int>& sel,
                                          const PiRational& restricted_det) {
    Cyclotomic prod = Cyclotomic::one();
    auto diag = loc.exponent_diagonal();
    try {
        for (int j : sel) prod *= exp_two_pi_i(diag[static_cast<size_t>(j)]);
    } catch (const error& e) {
        if (e.code() == errc::unsupported_eigenvalue) return true;
        throw;
    }
    return restricted_det == PiRational(prod);
}

inline std::vector<std::vector<int>> combinations(int p, int take) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int from) {
        if (static_cast<int>(cur.size()) == take) {
            out.push_back(cur);
            return;
        }
        for (int j = from; j < p; ++j) {
            cur.push_back(j);
            rec(j + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

}  // namespace detail

// Match each monodromy-invariant chain against the local data: per point a
// position selection consistent with the superblock structure and the
// determinant of the restriction. Incompatible chains are dropped with the
// reason recorded.
inline std::vector<FiltrationSpec> filtration_candidates(
    const ReducedDatum& d, std::vector<std::string>* dropped = nullptr) {
    if (d.dimension > 3) return d.filtrations;  // user-supplied only
    MonodromyTuple t = MonodromyTuple::from(d.monodromy, d.dimension);
    std::vector<std::vector<InvariantSubspace>> chains;
    std::vector<InvariantSubspace> lines = invariant_lines(t, d.declared_spectrum);
    for (const auto& l : lines) chains.push_back({l});
    if (d.dimension == 3) {
        std::vector<InvariantSubspace> dual_lines =
            invariant_lines(dual_tuple(t), d.declared_spectrum);
        std::vector<InvariantSubspace> planes;
        for (const auto& w : dual_lines) {
            // annihilator of the dual line
            Mat<PiRational> row(1, 3);
            for (size_t i = 0; i < 3; ++i) row(0, i) = w.basis(i, 0);
            InvariantSubspace s;
            s.basis = kernel_basis(row);
            s.dimension = 2;
            for (const auto& g : t.matrices) {
                auto cert = detail::solve_in_span(s.basis, g * s.basis);
                if (!cert) fail(errc::internal, "plane certificate failed");
                s.certificate.push_back(std::move(*cert));
            }
            planes.push_back(std::move(s));
        }
        for (const auto& pl : planes) chains.push_back({pl});
        for (const auto& l : lines)
            for (const auto& pl : planes)
                if (detail::line_in_subspace(l.basis, pl.basis)) chains.push_back({l, pl});
    }

    std::vector<FiltrationSpec> out;
    for (const auto& chain : chains) {
        FiltrationSpec spec;
        spec.origin = "monodromy-invariant chain";
        bool ok = true;
        std::string reason;
        for (const auto& sub : chain) {
            FiltrationStep step;
            step.selections.resize(d.points.size());
            for (size_t i = 0; i < d.points.size() && ok; ++i) {
                PiRational det = PiRational::one();
                {
                    const Mat<PiRational>& c = sub.certificate[i];
                    if (c.rows() == 1)
                        det = c(0, 0);
                    else
                        det = leibniz_det(c);
                }
                bool found = false;
                for (const auto& sel : detail::combinations(d.dimension, sub.dimension)) {
                    if (!detail::selection_respects_superblocks(d.locals[i], sel)) continue;
                    if (!detail::selection_determinant_matches(d.locals[i], sel, det)) continue;
                    // nested under the previous step's selection
                    if (!spec.steps.empty()) {
                        const auto& prev = spec.steps.back().selections[i];
                        bool nested = true;
                        for (int pos : prev)
                            nested = nested &&
                                     std::find(sel.begin(), sel.end(), pos) != sel.end();
                        if (!nested) continue;
                    }
                    step.selections[i] = sel;
                    found = true;
                    break;
                }
                if (!found) {
                    ok = false;
                    reason = "no compatible position selection at point " + std::to_string(i);
                }
            }
            if (!ok) break;
            spec.steps.push_back(std::move(step));
        }
        if (ok)
            out.push_back(std::move(spec));
        else if (dropped)
            dropped->push_back(reason);
    }
    return out;
}

enum class Genericity { generic, non_generic, unknown };

struct GenericityResult {
    Genericity kind = Genericity::unknown;
    std::optional<FiltrationSpec> witness;
    std::string note;
};

// Irreducible monodromy is a sufficient condition; otherwise a locally
// compatible invariant chain is a witness against genericity, and the
// absence of one leaves the question open (the discrete surrogate cannot
// rule out analytic stabilized subbundles).
inline GenericityResult genericity_check(const ReducedDatum& d) {
    GenericityResult res;
    MonodromyTuple t = MonodromyTuple::from(d.monodromy, d.dimension);
    if (is_irreducible(t)) {
        res.kind = Genericity::generic;
        res.note = "irreducible monodromy";
        return res;
    }
    if (d.dimension > 3 && d.filtrations.empty()) {
        res.kind = Genericity::unknown;
        res.note = "reducible in dimension > 3 without user-supplied subspaces";
        return res;
    }
    try {
        std::vector<std::string> dropped;
        std::vector<FiltrationSpec> cands = filtration_candidates(d, &dropped);
        if (!cands.empty()) {
            res.kind = Genericity::non_generic;
            res.witness = cands.front();
            res.note = "locally compatible invariant chain";
        } else {
            res.kind = Genericity::unknown;
            res.note = dropped.empty() ? "reducible but no invariant chain found"
                                       : "all invariant chains locally incompatible";
        }
    } catch (const error& e) {
        if (e.code() != errc::unsupported_spectrum) throw;
        res.kind = Genericity::unknown;
        res.note = e.what();
    }
    return res;
}

}  // namespace grh
