#pragma once

#include <optional>
#include <string>
#include <vector>

#include "grh/complex_exact.hpp"
#include "grh/matrix.hpp"
#include "grh/pi_poly.hpp"
#include "grh/rational.hpp"

namespace grh {

// i as a cyclotomic number, for moving exact complex scalars into the tower.
inline Cyclotomic complex_to_cyclotomic(const ComplexExact& z) {
    Cyclotomic r(z.re);
    if (z.im != 0) r += Rational(z.im) * Cyclotomic::root_of_unity(4, 1);
    return r;
}

struct SpherePoint {
    bool infinite = false;
    ComplexExact coord;  // meaningful when finite

    static SpherePoint infinity() { return {true, ComplexExact()}; }
    static SpherePoint at(ComplexExact z) { return {false, std::move(z)}; }

    friend bool operator==(const SpherePoint& a, const SpherePoint& b) {
        if (a.infinite != b.infinite) return false;
        return a.infinite || a.coord == b.coord;
    }
    friend bool operator!=(const SpherePoint& a, const SpherePoint& b) { return !(a == b); }
};

// One Jordan block of the constant matrix J_s inside a superblock.
struct JordanBlock {
    ComplexExact rho;
    int size = 1;
};

// A superblock of the exponential part: the orbit of one polynomial
// q(t), t = (z-a)^(-1/p), taken with multiplicity s. When p > 1 the block
// expands to the p rotated copies q(t), q(t zeta_p), ..., q(t zeta_p^{p-1}).
struct Superblock {
    int ramification = 1;          // p
    int multiplicity = 1;          // s
    std::vector<Cyclotomic> q;     // q[k] = coefficient of t^k; q[0] must vanish
    std::vector<JordanBlock> jordan;

    int dimension() const { return ramification * multiplicity; }

    int q_degree() const {
        for (int k = static_cast<int>(q.size()) - 1; k >= 1; --k)
            if (!q[k].is_zero()) return k;
        return 0;
    }

    // fractional degree in 1/(z-a)
    Rational katz() const { return Rational(q_degree(), ramification); }

    int jordan_size_total() const {
        int s = 0;
        for (const auto& b : jordan) s += b.size;
        return s;
    }
};

struct ExponentialPart {
    SpherePoint center;
    std::vector<Superblock> blocks;

    int dimension() const {
        int d = 0;
        for (const auto& b : blocks) d += b.dimension();
        return d;
    }

    int common_root() const {
        long q = 1;
        for (const auto& b : blocks) q = lcm_long(q, b.ramification);
        return static_cast<int>(q);
    }
};

// One expanded diagonal slot of Q / J~: superblock `block`, rotation `copy`,
// inner index `slot`. The q-polynomial is re-expressed in the common
// fractional variable u with u^common_root = 1/(z-a).
struct DiagonalPosition {
    int block = 0;
    int copy = 0;
    int slot = 0;
    std::vector<Cyclotomic> q_u;   // exponents in u-units
    ComplexExact exponent;         // diagonal of J~: rho + copy/p
    bool jordan_link_next = false; // J~ has a 1 at (this, this+1)
};

inline std::vector<DiagonalPosition> expand(const ExponentialPart& part) {
    std::vector<DiagonalPosition> out;
    int Q = part.common_root();
    for (size_t bi = 0; bi < part.blocks.size(); ++bi) {
        const Superblock& b = part.blocks[bi];
        int stretch = Q / b.ramification;
        for (int copy = 0; copy < b.ramification; ++copy) {
            // q(t * zeta^copy) with exponents rescaled into u-units
            std::vector<Cyclotomic> qu;
            if (b.q_degree() > 0) qu.resize(static_cast<size_t>(b.q_degree()) * stretch + 1);
            for (int k = 1; k < static_cast<int>(b.q.size()); ++k) {
                if (b.q[k].is_zero()) continue;
                Cyclotomic rot = Cyclotomic::root_of_unity(b.ramification,
                                                           static_cast<long>(copy) * k);
                qu[static_cast<size_t>(k) * stretch] = b.q[k] * rot;
            }
            int slot = 0;
            for (const auto& jb : b.jordan) {
                for (int s = 0; s < jb.size; ++s) {
                    DiagonalPosition pos;
                    pos.block = static_cast<int>(bi);
                    pos.copy = copy;
                    pos.slot = slot;
                    pos.q_u = qu;
                    pos.exponent = jb.rho + ComplexExact(Rational(copy, b.ramification));
                    pos.jordan_link_next = (s + 1 < jb.size);
                    out.push_back(std::move(pos));
                    ++slot;
                }
            }
        }
    }
    return out;
}

inline Rational katz_rank(const ExponentialPart& part) {
    Rational best(0);
    for (const auto& b : part.blocks) best = std::max(best, b.katz());
    return best;
}

inline Integer true_rank(const ExponentialPart& part) { return ceil_rank(katz_rank(part)); }

enum class LocalKind { fuchsian, regular_singular, irregular_unramified, irregular_ramified };

inline const char* kind_name(LocalKind k) {
    switch (k) {
        case LocalKind::fuchsian: return "fuchsian";
        case LocalKind::regular_singular: return "regular_singular";
        case LocalKind::irregular_unramified: return "irregular_unramified";
        case LocalKind::irregular_ramified: return "irregular_ramified";
    }
    return "?";
}

// Complete local invariants at one singular point.
struct LocalDatum {
    LocalKind kind = LocalKind::fuchsian;
    int dimension = 1;
    int rank = 0;  // declared true Poincare rank r
    bool divergent = false;

    // regular-singular data: upper-triangular exponent matrix E (also used
    // for fuchsian points; absent means E = 0)
    std::optional<Mat<ComplexExact>> exponent_matrix;

    // irregular data
    std::optional<ExponentialPart> exponential_part;

    // Stokes matrices in counterclockwise ray order starting from angle 0
    std::vector<Mat<Cyclotomic>> stokes;

    bool irregular() const {
        return kind == LocalKind::irregular_unramified || kind == LocalKind::irregular_ramified;
    }

    Mat<ComplexExact> effective_exponent_matrix() const {
        if (exponent_matrix) return *exponent_matrix;
        Mat<ComplexExact> e(static_cast<size_t>(dimension), static_cast<size_t>(dimension));
        return e;
    }

    // Diagonal of the formal exponent matrix (J~ for irregular points, E for
    // regular-singular ones), in expanded position order.
    std::vector<ComplexExact> exponent_diagonal() const {
        std::vector<ComplexExact> d;
        if (irregular()) {
            if (!exponential_part) fail(errc::internal, "irregular datum without exponential part");
            for (const auto& pos : expand(*exponential_part)) d.push_back(pos.exponent);
        } else {
            Mat<ComplexExact> e = effective_exponent_matrix();
            for (size_t i = 0; i < e.rows(); ++i) d.push_back(e(i, i));
        }
        return d;
    }

    ComplexExact exponent_trace() const {
        ComplexExact t;
        for (const auto& x : exponent_diagonal()) t += x;
        return t;
    }
};

struct Violation {
    std::string code;
    std::string detail;
    int point = -1;  // -1: datum-level
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool valid() const { return violations.empty(); }
    void add(std::string code, std::string detail, int point = -1) {
        violations.push_back({std::move(code), std::move(detail), point});
    }
    bool has(const std::string& code) const {
        for (const auto& v : violations)
            if (v.code == code) return true;
        return false;
    }
};

// Candidate filtration data: per filtration step, one selection of diagonal
// positions per singular point, aligned with a chain of invariant subspaces.
struct FiltrationStep {
    std::vector<std::vector<int>> selections;  // [point][positions], ascending
};

struct FiltrationSpec {
    std::vector<FiltrationStep> steps;  // strictly nested, coarse to fine
    std::string origin;                 // free-form provenance note
};

// The global object: points, monodromy representation, local data.
struct ReducedDatum {
    int dimension = 1;
    SpherePoint base_point;
    std::vector<SpherePoint> points;
    std::vector<Mat<PiPolynomial>> monodromy;
    std::vector<LocalDatum> locals;

    // optional side inputs carried by the datum file
    std::vector<std::vector<long>> weights;      // one integer diagonal per point
    std::vector<FiltrationSpec> filtrations;
    std::vector<Cyclotomic> declared_spectrum;
    bool formally_fuchsian = false;

    size_t point_count() const { return points.size(); }
};

}  // namespace grh
