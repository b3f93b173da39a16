#pragma once

#include <optional>
#include <string>
#include <vector>

#include "grh/local_datum.hpp"
#include "grh/matrix.hpp"

namespace grh {

struct RootSpace {
    std::vector<long> root;  // chi_i - chi_j on the character lattice
    int dim = 1;             // dim of the rootspace
};

// Discrete payload of a local differential Galois structure: the character
// lattice of the torus, the finite-order automorphism induced by the
// normalizing element, and the rootspace dimensions of the adjoint action.
struct LocalGaloisStructure {
    int lattice_rank = 1;
    std::vector<std::vector<long>> weights;  // distinct diagonal weights chi_i
    Mat<Rational> delta;                     // integer automorphism on the lattice
    int order = 1;                           // nu, minimal with delta^nu = id
    std::vector<RootSpace> roots;
    bool formal_galois = false;
    bool connected = false;
    std::string name;
};

struct CycloBlock {
    int nu_k = 1;
    Mat<Rational> basis;  // columns span E_k, reduced echelon rows transposed
    int dimension = 0;    // = multiplicity * phi(nu_k)
    int multiplicity = 0;
};

struct CyclotomicBlockDecomposition {
    std::vector<CycloBlock> blocks;
};

enum class MuRule { conservative, iterative };

namespace detail {

inline Mat<Rational> matrix_power(const Mat<Rational>& m, int e) {
    Mat<Rational> acc = Mat<Rational>::identity(m.rows());
    for (int i = 0; i < e; ++i) acc = acc * m;
    return acc;
}

inline Mat<Rational> evaluate_poly_at(const std::vector<Integer>& coeffs,
                                      const Mat<Rational>& m) {
    Mat<Rational> acc(m.rows(), m.cols());
    Mat<Rational> pw = Mat<Rational>::identity(m.rows());
    for (size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k] != 0) acc = acc + Rational(coeffs[k]) * pw;
        pw = pw * m;
    }
    return acc;
}

}  // namespace detail

// Splits the lattice by the cyclotomic factors of delta^nu - id: one block
// per divisor whose cyclotomic polynomial has a nontrivial kernel on E.
inline CyclotomicBlockDecomposition cyclotomic_decompose(const Mat<Rational>& delta, int nu) {
    if (!delta.square()) fail(errc::order_mismatch, "automorphism matrix must be square");
    size_t d = delta.rows();
    if (!detail::matrix_power(delta, nu).is_identity())
        fail(errc::order_mismatch, "delta^nu is not the identity");
    for (int div = 1; div < nu; ++div)
        if (nu % div == 0 && detail::matrix_power(delta, div).is_identity())
            fail(errc::order_mismatch, "the declared order " + std::to_string(nu) +
                                           " is not minimal (delta^" + std::to_string(div) +
                                           " = id)");
    CyclotomicBlockDecomposition out;
    int total = 0;
    for (int k = 1; k <= nu; ++k) {
        if (nu % k != 0) continue;
        Mat<Rational> phi_of_delta =
            detail::evaluate_poly_at(detail::cyclotomic_polynomial(k), delta);
        Mat<Rational> ker = kernel_basis(phi_of_delta);
        if (ker.cols() == 0) continue;
        // normalize: reduced echelon form of the transposed basis
        Mat<Rational> t = ker.transpose();
        rref(t);
        CycloBlock b;
        b.nu_k = k;
        b.basis = t.transpose();
        b.dimension = static_cast<int>(ker.cols());
        b.multiplicity = b.dimension / euler_phi(k);
        total += b.dimension;
        out.blocks.push_back(std::move(b));
    }
    if (total != static_cast<int>(d))
        fail(errc::order_mismatch, "cyclotomic kernels do not fill the lattice");
    return out;
}

namespace detail {

// Does the root have a nonzero component in the given block of the
// decomposition? Solved exactly in the combined block basis.
inline bool root_touches_block(const std::vector<long>& root,
                               const CyclotomicBlockDecomposition& dec, size_t block_index) {
    size_t d = root.size();
    size_t cols = 0;
    for (const auto& b : dec.blocks) cols += b.basis.cols();
    Mat<Rational> aug(d, cols + 1);
    size_t at = 0;
    std::vector<std::pair<size_t, size_t>> spans;  // column range per block
    for (const auto& b : dec.blocks) {
        spans.push_back({at, at + b.basis.cols()});
        for (size_t j = 0; j < b.basis.cols(); ++j, ++at)
            for (size_t i = 0; i < d; ++i) aug(i, at) = b.basis(i, j);
    }
    for (size_t i = 0; i < d; ++i) aug(i, cols) = Rational(root[i]);
    auto pivots = rref(aug);
    std::vector<Rational> coords(cols, Rational(0));
    for (size_t r = 0; r < pivots.size(); ++r) {
        if (pivots[r] == cols) fail(errc::internal, "root outside the lattice span");
        coords[pivots[r]] = aug(r, cols);
    }
    auto [lo, hi] = spans[block_index];
    for (size_t j = lo; j < hi; ++j)
        if (coords[j] != 0) return true;
    return false;
}

}  // namespace detail

// Smallest mu >= 1, coprime to nu_k, dominating the dimensions of the
// relevant rootspaces. The conservative rule counts every root with a
// nonzero component in the block; the iterative rule narrows relevance to
// the blocks realizing the maximal fractional degree and runs to a fixpoint.
inline int minimal_mu(const CyclotomicBlockDecomposition& dec, size_t block_index,
                      const LocalGaloisStructure& structure,
                      MuRule rule = MuRule::conservative) {
    const CycloBlock& blk = dec.blocks[block_index];
    auto smallest = [&](int nu_k, long need) {
        int mu = 1;
        while (gcd_int(mu, nu_k) != 1 || mu < need) ++mu;
        return mu;
    };
    if (rule == MuRule::conservative) {
        long need = 1;
        for (const auto& r : structure.roots)
            if (detail::root_touches_block(r.root, dec, block_index))
                need = std::max(need, static_cast<long>(r.dim));
        return smallest(blk.nu_k, need);
    }
    // iterative: start from the coprimality floor everywhere, then let each
    // root constrain only its maximal-degree blocks until nothing changes
    std::vector<int> mu(dec.blocks.size());
    for (size_t b = 0; b < dec.blocks.size(); ++b) mu[b] = smallest(dec.blocks[b].nu_k, 1);
    for (int pass = 0; pass < 64; ++pass) {
        std::vector<long> need(dec.blocks.size(), 1);
        for (const auto& r : structure.roots) {
            Rational best(-1);
            std::vector<size_t> touched;
            for (size_t b = 0; b < dec.blocks.size(); ++b) {
                if (!detail::root_touches_block(r.root, dec, b)) continue;
                touched.push_back(b);
                Rational deg(mu[b], dec.blocks[b].nu_k);
                if (deg > best) best = deg;
            }
            for (size_t b : touched)
                if (Rational(mu[b], dec.blocks[b].nu_k) == best)
                    need[b] = std::max(need[b], static_cast<long>(r.dim));
        }
        bool changed = false;
        for (size_t b = 0; b < dec.blocks.size(); ++b) {
            int next = smallest(dec.blocks[b].nu_k, need[b]);
            if (next > mu[b]) {
                mu[b] = next;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return mu[block_index];
}

struct RankResult {
    std::vector<std::pair<int, int>> block_mu;  // (nu_k, mu_k)
    Rational rho;                               // Katz rank
    long poincare_rank = 0;                     // -[-rho]
    ExponentialPart witness;                    // realizing exponential-part skeleton
};

// Minimal Katz and Poincare ranks of a local Galois structure, together with
// the witness exponential part built from the orbit polynomials t^{mu_k} in
// the nu_k-th root of 1/z.
inline RankResult katz_rank_galois(const LocalGaloisStructure& l,
                                   MuRule rule = MuRule::conservative) {
    CyclotomicBlockDecomposition dec = cyclotomic_decompose(l.delta, l.order);
    RankResult out;
    out.rho = Rational(0);
    for (size_t b = 0; b < dec.blocks.size(); ++b) {
        int mu = minimal_mu(dec, b, l, rule);
        out.block_mu.push_back({dec.blocks[b].nu_k, mu});
        out.rho = std::max(out.rho, Rational(mu, dec.blocks[b].nu_k));
    }
    out.poincare_rank = ceil_rank(out.rho).convert_to<long>();
    out.witness.center = SpherePoint::at(ComplexExact(Rational(0)));
    for (const auto& [nu_k, mu] : out.block_mu) {
        Superblock sb;
        sb.ramification = nu_k;
        sb.multiplicity = 1;
        sb.q.assign(static_cast<size_t>(mu) + 1, Cyclotomic::zero());
        sb.q[static_cast<size_t>(mu)] = Cyclotomic::one();
        sb.jordan = {{ComplexExact(Rational(0)), 1}};
        out.witness.blocks.push_back(std::move(sb));
    }
    return out;
}

// min over the candidate structures, lowest index on ties.
inline std::pair<long, size_t> group_rank(const std::vector<LocalGaloisStructure>& candidates,
                                          MuRule rule = MuRule::conservative) {
    if (candidates.empty()) fail(errc::empty_candidates, "no candidate structures supplied");
    long best = 0;
    size_t arg = 0;
    for (size_t i = 0; i < candidates.size(); ++i) {
        long r = katz_rank_galois(candidates[i], rule).poincare_rank;
        if (i == 0 || r < best) {
            best = r;
            arg = i;
        }
    }
    return {best, arg};
}

// User-asserted group-theoretic facts plus computed ranks; the report
// machinery checks hypotheses only, never re-derives them.
struct GaloisCandidateFacts {
    std::string name;
    std::optional<LocalGaloisStructure> structure;
    std::optional<long> declared_rank;  // used when no structure is given
    bool in_minimal_family = false;     // belongs to a minimal generator family of V(G)
};

struct GaloisFacts {
    int dimension = 0;
    bool representation_irreducible = false;
    bool representation_faithful = false;
    bool subgroups_generate = false;
    bool subgroups_connected = false;
    int s_count = 0;     // s(G)
    int sbar_count = 0;  // sbar(G)
    bool stable_pair_conditions = false;  // the weighted-pair route applies
    std::vector<GaloisCandidateFacts> candidates;
    MuRule mu_rule = MuRule::conservative;
};

struct RealizationFinding {
    std::string rule;
    bool applicable = false;
    std::vector<std::string> unmet;
    std::string conclusion;
};

inline long candidate_rank(const GaloisCandidateFacts& c, MuRule rule) {
    if (c.structure) return katz_rank_galois(*c.structure, rule).poincare_rank;
    if (c.declared_rank) return *c.declared_rank;
    fail(errc::recipe_unavailable, "candidate '" + c.name + "' carries no rank information");
}

// Applies each realization rule's hypothesis checklist; unmet hypotheses are
// listed verbatim and the conclusion states the singularity profile.
inline std::vector<RealizationFinding> realization_report(const GaloisFacts& f) {
    std::vector<RealizationFinding> out;
    auto ranks_known = [&]() {
        for (const auto& c : f.candidates)
            if (!c.structure && !c.declared_rank) return false;
        return !f.candidates.empty();
    };

    {
        RealizationFinding r;
        r.rule = "irreducible-representation-fuchsian-count";
        if (!f.representation_faithful) r.unmet.push_back("the representation is not faithful");
        if (!f.representation_irreducible)
            r.unmet.push_back("the representation is not irreducible");
        if (f.s_count < 2) r.unmet.push_back("s(G) was not supplied");
        r.applicable = r.unmet.empty();
        if (r.applicable)
            r.conclusion = "Galois group of a system with at most " + std::to_string(f.s_count) +
                           " singularities, all fuchsian";
        out.push_back(std::move(r));
    }
    {
        RealizationFinding r;
        r.rule = "generating-subgroups-prescribed-ranks";
        if (!f.subgroups_generate)
            r.unmet.push_back("the local subgroups are not asserted to generate the group");
        if (!ranks_known()) r.unmet.push_back("candidate ranks are unavailable");
        if (!f.stable_pair_conditions)
            r.unmet.push_back("the stable-pair conditions for the datum were not established");
        r.applicable = r.unmet.empty();
        if (r.applicable) {
            std::string ranks;
            for (const auto& c : f.candidates) {
                if (!ranks.empty()) ranks += ", ";
                ranks += c.name + ": " + std::to_string(candidate_rank(c, f.mu_rule));
            }
            r.conclusion =
                "Galois group of a system with the prescribed local ranks (" + ranks +
                ") and one further fuchsian point";
        }
        out.push_back(std::move(r));
    }
    {
        RealizationFinding r;
        r.rule = "irreducible-monodromy-prescribed-ranks";
        if (!f.subgroups_generate)
            r.unmet.push_back("the local subgroups are not asserted to generate the group");
        if (!f.representation_irreducible)
            r.unmet.push_back("the chosen monodromy family is not irreducible");
        if (!ranks_known()) r.unmet.push_back("candidate ranks are unavailable");
        r.applicable = r.unmet.empty();
        if (r.applicable)
            r.conclusion = "Galois group of a system with the candidates' true ranks and a "
                           "final fuchsian point";
        out.push_back(std::move(r));
    }
    {
        RealizationFinding r;
        r.rule = "connected-generators-prescribed-ranks";
        if (!f.subgroups_connected)
            r.unmet.push_back("the generating subgroups are not all connected");
        if (!f.representation_irreducible)
            r.unmet.push_back("the induced monodromy family is not irreducible");
        if (!ranks_known()) r.unmet.push_back("candidate ranks are unavailable");
        r.applicable = r.unmet.empty();
        if (r.applicable)
            r.conclusion = "Galois group of a system with the candidates' true ranks and a "
                           "final fuchsian point";
        out.push_back(std::move(r));
    }
    // minimal-rank selection over the alpha candidates
    std::vector<size_t> family;
    for (size_t i = 0; i < f.candidates.size(); ++i)
        if (f.candidates[i].in_minimal_family) family.push_back(i);
    std::optional<long> r_of_g;
    std::optional<size_t> argmin;
    if (!family.empty()) {
        for (size_t i : family) {
            long r = candidate_rank(f.candidates[i], f.mu_rule);
            if (!r_of_g || r < *r_of_g) {
                r_of_g = r;
                argmin = i;
            }
        }
    }
    {
        RealizationFinding r;
        r.rule = "minimal-rank-at-one-point";
        if (!r_of_g) r.unmet.push_back("no candidate belongs to a minimal generator family");
        if (f.sbar_count < 2) r.unmet.push_back("sbar(G) was not supplied");
        if (!f.stable_pair_conditions)
            r.unmet.push_back("the stable-pair conditions for the datum were not established");
        r.applicable = r.unmet.empty();
        if (r.applicable)
            r.conclusion = "fuchsian at the last " + std::to_string(f.sbar_count - 1) +
                           " points, rank " + std::to_string(*r_of_g) + " at the first (witness " +
                           f.candidates[*argmin].name + ")";
        out.push_back(std::move(r));
    }
    {
        RealizationFinding r;
        r.rule = "low-dimension-minimal-rank";
        if (f.dimension != 2 && f.dimension != 3)
            r.unmet.push_back("dimension is not two or three");
        if (!r_of_g) r.unmet.push_back("no candidate belongs to a minimal generator family");
        if (f.sbar_count < 2) r.unmet.push_back("sbar(G) was not supplied");
        if (f.dimension == 3 && r_of_g && f.candidates[*argmin].structure &&
            f.candidates[*argmin].structure->formal_galois)
            r.unmet.push_back(
                "in dimension three the minimal-rank candidate must not be a formal Galois "
                "group, but '" +
                f.candidates[*argmin].name + "' is flagged as one");
        r.applicable = r.unmet.empty();
        if (r.applicable)
            r.conclusion = "Galois group of a system with at most " +
                           std::to_string(f.sbar_count) +
                           " singularities, all fuchsian but one of rank " +
                           std::to_string(*r_of_g);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace grh
