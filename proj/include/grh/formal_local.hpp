#pragma once

#include <vector>

#include "grh/local_datum.hpp"
#include "grh/rays.hpp"

namespace grh {

namespace detail {

// exp(2 pi i (D + N)) for commuting diagonal D and nilpotent N over the
// tower: the semisimple factor is a diagonal of roots of unity, the
// unipotent factor expands as a polynomial in Pi.
inline Mat<PiPolynomial> exp_two_pi_i_upper(const Mat<ComplexExact>& e) {
    size_t n = e.rows();
    for (size_t k = 0; k < n; ++k)
        for (size_t l = 0; l < n; ++l) {
            if (k == l || e(k, l).is_zero()) continue;
            if (!(e(k, k) == e(l, l)))
                fail(errc::unsupported_eigenvalue,
                     "nilpotent support joins distinct eigenvalues; exponential not computable");
        }
    Mat<Cyclotomic> nil(n, n);
    for (size_t k = 0; k < n; ++k)
        for (size_t l = 0; l < n; ++l)
            if (k != l) nil(k, l) = complex_to_cyclotomic(e(k, l));
    // unipotent part: sum of Pi^j N^j / j!
    Mat<PiPolynomial> unip(n, n);
    Mat<Cyclotomic> power = Mat<Cyclotomic>::identity(n);
    Rational fact(1);
    for (size_t j = 0;; ++j) {
        for (size_t r = 0; r < n; ++r)
            for (size_t c = 0; c < n; ++c) {
                if (power(r, c).is_zero()) continue;
                unip(r, c) += PiPolynomial::pi_power(static_cast<int>(j),
                                                     Rational(1) / fact * power(r, c));
            }
        power = power * nil;
        if (power.is_zero()) break;
        fact *= Rational(static_cast<long>(j) + 1);
        if (j > n + 2) fail(errc::internal, "nilpotent power failed to vanish");
    }
    // semisimple factor on the left (commutes with the unipotent one)
    Mat<PiPolynomial> out(n, n);
    for (size_t r = 0; r < n; ++r) {
        Cyclotomic s = exp_two_pi_i(e(r, r));
        for (size_t c = 0; c < n; ++c)
            if (!unip(r, c).is_zero()) out(r, c) = PiPolynomial(s) * unip(r, c);
    }
    return out;
}

// Jordan matrix J_s of one superblock as an exact complex matrix.
inline Mat<ComplexExact> jordan_matrix(const Superblock& b) {
    size_t s = static_cast<size_t>(b.multiplicity);
    Mat<ComplexExact> j(s, s);
    size_t at = 0;
    for (const auto& blk : b.jordan) {
        for (int i = 0; i < blk.size; ++i) {
            j(at + i, at + i) = blk.rho;
            if (i + 1 < blk.size) j(at + i, at + i + 1) = ComplexExact(Rational(1));
        }
        at += static_cast<size_t>(blk.size);
    }
    return j;
}

}  // namespace detail

// The formal monodromy U^{-1} exp(2 pi i J~) U, assembled superblock by
// superblock; entries are exact polynomials in Pi over the cyclotomic tower.
inline Mat<PiPolynomial> formal_monodromy(const LocalDatum& d) {
    if (!d.irregular()) {
        return detail::exp_two_pi_i_upper(d.effective_exponent_matrix());
    }
    if (!d.exponential_part) fail(errc::internal, "irregular datum without exponential part");
    const ExponentialPart& part = *d.exponential_part;
    size_t dim = static_cast<size_t>(part.dimension());
    Mat<PiPolynomial> out(dim, dim);
    size_t base = 0;
    for (const auto& b : part.blocks) {
        size_t s = static_cast<size_t>(b.multiplicity);
        size_t p = static_cast<size_t>(b.ramification);
        Mat<ComplexExact> j = detail::jordan_matrix(b);
        Mat<PiPolynomial> core = detail::exp_two_pi_i_upper(j);
        size_t bd = p * s;
        // exp(2 pi i J~_j): copy k scaled by zeta_p^k
        Mat<PiPolynomial> expj(bd, bd);
        for (size_t k = 0; k < p; ++k) {
            Cyclotomic scale = Cyclotomic::root_of_unity(static_cast<int>(p),
                                                         static_cast<long>(k));
            for (size_t r = 0; r < s; ++r)
                for (size_t c = 0; c < s; ++c)
                    if (!core(r, c).is_zero())
                        expj(k * s + r, k * s + c) = PiPolynomial(scale) * core(r, c);
        }
        Mat<PiPolynomial> g = expj;
        if (p > 1) {
            Mat<PiPolynomial> u(bd, bd), uinv(bd, bd);
            Rational inv_p(1, static_cast<long>(p));
            for (size_t l = 0; l < p; ++l)
                for (size_t k = 0; k < p; ++k) {
                    Cyclotomic w = Cyclotomic::root_of_unity(
                        static_cast<int>(p), static_cast<long>(l) * static_cast<long>(k));
                    Cyclotomic winv =
                        inv_p * Cyclotomic::root_of_unity(
                                    static_cast<int>(p),
                                    -static_cast<long>(l) * static_cast<long>(k));
                    for (size_t r = 0; r < s; ++r) {
                        u(l * s + r, k * s + r) = PiPolynomial(w);
                        uinv(l * s + r, k * s + r) = PiPolynomial(winv);
                    }
                }
            g = uinv * expj * u;
        }
        for (size_t r = 0; r < bd; ++r)
            for (size_t c = 0; c < bd; ++c) out(base + r, base + c) = g(r, c);
        base += bd;
    }
    return out;
}

struct CyclicCheck {
    bool holds = true;
    int row = -1, col = -1;  // witness entry when the product disagrees
};

// Note attached to a symbolic tower mismatch: equality in Pi is complete for
// identities, so a failed comparison is cross-checked numerically and
// reported as SYMBOLIC_UNEQUAL when the boxes cannot be separated.
inline std::string symbolic_mismatch_note(const PiPolynomial& difference) {
    for (int bits = 128; bits <= 4096; bits *= 2) {
        CInterval box = difference.evaluate(bits);
        if (!box.contains_zero()) return "numerically distinct at 2 pi i";
    }
    return "SYMBOLIC_UNEQUAL: numerically indistinguishable at the cross-check precision";
}

// C_1 ... C_N * G_hat (exact product over the tower) against the prescribed
// local monodromy matrix.
inline CyclicCheck validate_cyclic(const LocalDatum& d, const Mat<PiPolynomial>& g) {
    Mat<PiPolynomial> prod = Mat<PiPolynomial>::identity(g.rows());
    for (const auto& c : d.stokes) {
        Mat<PiPolynomial> cp = c.map<PiPolynomial>([](const Cyclotomic& x) {
            return PiPolynomial(x);
        });
        prod = prod * cp;
    }
    prod = prod * formal_monodromy(d);
    for (size_t i = 0; i < g.rows(); ++i)
        for (size_t j = 0; j < g.cols(); ++j)
            if (!(prod(i, j) == g(i, j))) return {false, static_cast<int>(i), static_cast<int>(j)};
    return {};
}

// Every law a single local datum must satisfy; violations are report
// entries, never exceptions.
inline ValidationReport validate_local(const LocalDatum& d) {
    ValidationReport rep;
    const int dim = d.dimension;

    if (d.irregular()) {
        if (!d.exponential_part) {
            rep.add("shape", "irregular datum missing its exponential part");
            return rep;
        }
        const ExponentialPart& part = *d.exponential_part;
        if (part.dimension() != dim)
            rep.add("shape", "superblock dimensions sum to " + std::to_string(part.dimension()) +
                                 ", datum dimension is " + std::to_string(dim));
        bool any_ramified = false;
        for (size_t bi = 0; bi < part.blocks.size(); ++bi) {
            const Superblock& b = part.blocks[bi];
            any_ramified = any_ramified || b.ramification > 1;
            if (b.jordan_size_total() != b.multiplicity)
                rep.add("shape", "jordan sizes disagree with multiplicity in superblock " +
                                     std::to_string(bi));
            if (!b.q.empty() && !b.q[0].is_zero())
                rep.add("q_constant_term",
                        "q has a constant term in superblock " + std::to_string(bi));
            for (const auto& jb : b.jordan) {
                if (jb.rho.re < 0 || jb.rho.re >= Rational(1, b.ramification))
                    rep.add("rho_normalization",
                            "Re rho = " + to_string(jb.rho.re) + " outside [0, 1/" +
                                std::to_string(b.ramification) + ") in superblock " +
                                std::to_string(bi));
            }
        }
        if (any_ramified != (d.kind == LocalKind::irregular_ramified))
            rep.add("shape", any_ramified ? "ramified superblocks in an unramified datum"
                                          : "no ramified superblock in a ramified datum");
        Rational s = katz_rank(part);
        Integer want = ceil_rank(s);
        if (Integer(d.rank) != want)
            rep.add("rank_mismatch", "declared rank " + std::to_string(d.rank) +
                                         " but the fractional degree " + to_string(s) +
                                         " forces rank " + want.str());
        // rays and Stokes matrices
        std::vector<StokesRay> rays = singular_rays(part);
        if (rays.size() != d.stokes.size()) {
            rep.add("stokes_count", "datum carries " + std::to_string(d.stokes.size()) +
                                        " Stokes matrices, the exponential part has " +
                                        std::to_string(rays.size()) + " singular rays");
        } else {
            for (size_t ri = 0; ri < rays.size(); ++ri) {
                const Mat<Cyclotomic>& c = d.stokes[ri];
                if (c.rows() != static_cast<size_t>(dim) || c.cols() != static_cast<size_t>(dim)) {
                    rep.add("shape", "Stokes matrix " + std::to_string(ri) + " has wrong size");
                    continue;
                }
                for (size_t i = 0; i < c.rows(); ++i)
                    for (size_t j = 0; j < c.cols(); ++j) {
                        Cyclotomic expected =
                            i == j ? Cyclotomic::one() : Cyclotomic::zero();
                        if (c(i, j) == expected) continue;
                        bool allowed =
                            std::find(rays[ri].pairs.begin(), rays[ri].pairs.end(),
                                      std::make_pair(static_cast<int>(i), static_cast<int>(j))) !=
                            rays[ri].pairs.end();
                        if (i == j || !allowed)
                            rep.add("stokes_support",
                                    "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                        ") of Stokes matrix " + std::to_string(ri) +
                                        " lies outside the maximal-decay support");
                    }
                // unipotence: (C - I)^dim = 0
                Mat<Cyclotomic> n = c - Mat<Cyclotomic>::identity(c.rows());
                Mat<Cyclotomic> pw = n;
                for (int k = 1; k < dim; ++k) pw = pw * n;
                if (!pw.is_zero())
                    rep.add("stokes_unipotent",
                            "Stokes matrix " + std::to_string(ri) + " is not unipotent");
            }
        }
    } else {
        if (d.rank != 0)
            rep.add("rank_mismatch", "regular-singular data have true rank 0, declared " +
                                         std::to_string(d.rank));
        if (!d.stokes.empty())
            rep.add("stokes_count", "regular-singular data carry no Stokes matrices");
        if (d.exponent_matrix) {
            const Mat<ComplexExact>& e = *d.exponent_matrix;
            if (e.rows() != static_cast<size_t>(dim) || !e.square())
                rep.add("shape", "exponent matrix size disagrees with the dimension");
            for (size_t i = 0; i < e.rows(); ++i)
                for (size_t j = 0; j < e.cols(); ++j) {
                    if (j < i && !e(i, j).is_zero())
                        rep.add("exponent_support", "exponent matrix is not upper triangular");
                    if (i != j && !e(i, j).is_zero() && !(e(i, i) == e(j, j)))
                        rep.add("exponent_support",
                                "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") joins distinct eigenvalues");
                }
            for (size_t i = 0; i < e.rows(); ++i)
                if (e(i, i).re < 0 || e(i, i).re >= 1)
                    rep.add("rho_normalization",
                            "Re rho = " + to_string(e(i, i).re) + " outside [0, 1)");
        }
    }

    if (d.divergent) {
        bool nontrivial = false;
        for (const auto& c : d.stokes)
            if (!c.is_identity()) nontrivial = true;
        if (!nontrivial)
            rep.add("divergence_unsupported",
                    "datum flagged divergent but every Stokes matrix is the identity");
    }
    return rep;
}

// The aggregate validation of a reduced datum: all local laws, the global
// product relation, the cyclic relations, and integrality of the exponent
// trace sum.
inline ValidationReport validate_datum(const ReducedDatum& d) {
    ValidationReport rep;
    size_t n = d.points.size();
    if (d.monodromy.size() != n || d.locals.size() != n) {
        rep.add("shape", "points, monodromy and locals must have equal lengths");
        return rep;
    }
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (d.points[i] == d.points[j])
                rep.add("points_distinct", "points " + std::to_string(i) + " and " +
                                               std::to_string(j) + " coincide");

    size_t p = static_cast<size_t>(d.dimension);
    bool shapes_ok = true;
    for (size_t i = 0; i < n; ++i) {
        if (d.monodromy[i].rows() != p || d.monodromy[i].cols() != p) {
            rep.add("shape", "monodromy matrix " + std::to_string(i) + " is not " +
                                 std::to_string(p) + "x" + std::to_string(p));
            shapes_ok = false;
        }
        if (d.locals[i].dimension != d.dimension) {
            rep.add("shape", "local datum " + std::to_string(i) + " has dimension " +
                                 std::to_string(d.locals[i].dimension));
            shapes_ok = false;
        }
    }
    if (!shapes_ok) return rep;

    Mat<PiPolynomial> prod = Mat<PiPolynomial>::identity(p);
    for (const auto& g : d.monodromy) prod = prod * g;
    if (!prod.is_identity()) {
        PiPolynomial witness;
        for (size_t i = 0; i < p && witness.is_zero(); ++i)
            for (size_t j = 0; j < p && witness.is_zero(); ++j) {
                PiPolynomial want = i == j ? PiPolynomial::one() : PiPolynomial::zero();
                witness = prod(i, j) - want;
            }
        rep.add("global_relation",
                "G_1 ... G_n differs from the identity (" + symbolic_mismatch_note(witness) +
                    ")");
    }

    ComplexExact trace_sum;
    for (size_t i = 0; i < n; ++i) {
        ValidationReport local = validate_local(d.locals[i]);
        for (auto v : local.violations) {
            v.point = static_cast<int>(i);
            rep.violations.push_back(std::move(v));
        }
        trace_sum += d.locals[i].exponent_trace();

        bool checkable = d.locals[i].irregular() ||
                         (d.locals[i].exponent_matrix.has_value());
        if (checkable && local.valid()) {
            try {
                CyclicCheck c = validate_cyclic(d.locals[i], d.monodromy[i]);
                if (!c.holds)
                    rep.add("cyclic_relation",
                            "Stokes/formal product disagrees with the monodromy at entry (" +
                                std::to_string(c.row) + "," + std::to_string(c.col) + ")",
                            static_cast<int>(i));
            } catch (const error& e) {
                if (e.code() != errc::unsupported_eigenvalue) throw;
                // nonreal exponents: the formal monodromy leaves the tower,
                // so the relation is not checkable from discrete data
            }
        }
    }
    if (!(trace_sum.im == 0) || !is_integer(trace_sum.re))
        rep.add("degree_integrality",
                "exponent traces sum to " + to_string(trace_sum.re) +
                    (trace_sum.im == 0 ? "" : " + nonzero imaginary part") +
                    ", expected an integer");
    return rep;
}

}  // namespace grh
