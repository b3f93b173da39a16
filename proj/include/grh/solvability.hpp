#pragma once

#include <optional>
#include <string>
#include <vector>

#include "grh/representation.hpp"
#include "grh/weights.hpp"

namespace grh {

enum class DatumClass { rh, bsf, general };

inline const char* datum_class_name(DatumClass c) {
    switch (c) {
        case DatumClass::rh: return "RH";
        case DatumClass::bsf: return "BSF";
        case DatumClass::general: return "GENERAL";
    }
    return "?";
}

// All ranks zero is the classical problem; two points with exactly one
// nonzero rank is the standard-form problem.
inline DatumClass classify_datum(const ReducedDatum& d) {
    bool all_zero = true;
    for (const auto& l : d.locals) all_zero = all_zero && l.rank == 0;
    if (all_zero) return DatumClass::rh;
    if (d.points.size() == 2) {
        int zeros = 0;
        for (const auto& l : d.locals)
            if (l.rank == 0) ++zeros;
        if (zeros == 1) return DatumClass::bsf;
    }
    return DatumClass::general;
}

enum class CaseLabel {
    regularizable_contradiction,
    weight_recipe,        // dimension 2, diagonal form
    weight_recipe_case1,  // dimension 3, split form
    weight_recipe_case2,  // dimension 3, conjugated-top form
};

inline const char* case_label_name(CaseLabel c) {
    switch (c) {
        case CaseLabel::regularizable_contradiction: return "REGULARIZABLE_CONTRADICTION";
        case CaseLabel::weight_recipe: return "WEIGHT_RECIPE";
        case CaseLabel::weight_recipe_case1: return "WEIGHT_RECIPE_CASE1";
        case CaseLabel::weight_recipe_case2: return "WEIGHT_RECIPE_CASE2";
    }
    return "?";
}

// Shape classification of the aligned local form: jprime is the permuted
// upper-triangular Jordan data, q_scalar says whether the aligned
// exponential part is a scalar matrix.
inline CaseLabel dim23_case(const Mat<ComplexExact>& jprime, bool q_scalar) {
    size_t p = jprime.rows();
    if (p != 2 && p != 3) fail(errc::malformed_case, "dimension must be two or three");
    for (size_t i = 0; i < p; ++i)
        for (size_t j = 0; j < i; ++j)
            if (!jprime(i, j).is_zero())
                fail(errc::malformed_case, "aligned form is not upper triangular");
    for (size_t i = 0; i + 2 < p; ++i)
        if (!jprime(i, i + 2).is_zero())
            fail(errc::malformed_case, "aligned form carries a long-range entry");
    std::vector<bool> link(p - 1);
    for (size_t i = 0; i + 1 < p; ++i) link[i] = !jprime(i, i + 1).is_zero();
    bool full_jordan = true;
    for (bool l : link) full_jordan = full_jordan && l;
    if (full_jordan && p >= 2 && link.size() == p - 1 && link[0]) {
        if (q_scalar) return CaseLabel::regularizable_contradiction;
        // a jordan chain across the whole space forces equal exponentials
        fail(errc::malformed_case, "full jordan block without a scalar exponential part");
    }
    if (p == 2) return CaseLabel::weight_recipe;  // diagonal
    if (link[0] && !link[1]) return CaseLabel::weight_recipe_case2;
    return CaseLabel::weight_recipe_case1;  // diagonal or lower split
}

// The aligned local form of one point along a filtration: positions ordered
// by flag depth, exponent diagonal permuted accordingly, links carried over.
struct AlignedForm {
    Mat<ComplexExact> jprime;
    bool q_scalar = true;
    std::vector<int> order;  // aligned position order
};

inline AlignedForm aligned_local_form(const ReducedDatum& d, const FiltrationSpec& f,
                                      size_t point) {
    const LocalDatum& loc = d.locals[point];
    size_t p = static_cast<size_t>(d.dimension);
    std::vector<int> depth(p, 0);
    for (const auto& st : f.steps)
        for (int pos : st.selections[point]) depth[static_cast<size_t>(pos)]++;
    std::vector<int> order(p);
    for (size_t j = 0; j < p; ++j) order[j] = static_cast<int>(j);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return depth[static_cast<size_t>(a)] >
                                                 depth[static_cast<size_t>(b)]; });
    AlignedForm out;
    out.order = order;
    auto diag = loc.exponent_diagonal();
    Mat<ComplexExact> j(p, p);
    auto linked = [&](int a, int b) -> bool {
        if (loc.irregular()) {
            auto positions = expand(*loc.exponential_part);
            if (b == a + 1) return positions[static_cast<size_t>(a)].jordan_link_next;
            if (a == b + 1) return positions[static_cast<size_t>(b)].jordan_link_next;
            return false;
        }
        Mat<ComplexExact> e = loc.effective_exponent_matrix();
        return !e(static_cast<size_t>(std::min(a, b)), static_cast<size_t>(std::max(a, b)))
                    .is_zero();
    };
    for (size_t r = 0; r < p; ++r) {
        j(r, r) = diag[static_cast<size_t>(order[r])];
        for (size_t c = r + 1; c < p; ++c)
            if (linked(order[r], order[c])) j(r, c) = ComplexExact(Rational(1));
    }
    out.jprime = j;
    if (loc.irregular()) {
        auto positions = expand(*loc.exponential_part);
        for (size_t a = 1; a < p; ++a)
            out.q_scalar = out.q_scalar && positions[a].q_u == positions[0].q_u;
    }
    return out;
}

// Minimal b >= 0 whose case-shaped shift makes the pair stable against the
// witness filtration; b = 0 is returned when the inequality is already
// strict.
inline std::pair<WeightCollection, StabilityReport> dim23_weights(
    const ReducedDatum& d, CaseLabel label, const FiltrationSpec& witness, size_t point) {
    if (label == CaseLabel::regularizable_contradiction)
        fail(errc::malformed_case, "no weight recipe exists for the regularizable shape");
    size_t p = static_cast<size_t>(d.dimension);
    AlignedForm form = aligned_local_form(d, witness, point);
    std::vector<long> pattern;
    if (label == CaseLabel::weight_recipe)
        pattern = {-1, 1};
    else if (label == CaseLabel::weight_recipe_case1)
        pattern = {-2, 1, 1};
    else
        pattern = {-1, -1, 2};
    if (pattern.size() != p) fail(errc::malformed_case, "case label disagrees with dimension");
    for (long b = 0; b <= 4096; ++b) {
        WeightCollection w = zero_weights(d);
        for (size_t r = 0; r < p; ++r)
            w[point][static_cast<size_t>(form.order[r])] = pattern[r] * b;
        if (!is_admissible(w[point], d.locals[point])) continue;
        StabilityReport rep = stability_check(d, w, {witness});
        if (rep.verdict == StabilityVerdict::stable) return {w, rep};
    }
    fail(errc::recipe_unavailable, "no shift makes the pair stable against the witness");
}

struct SolvabilityVerdict {
    bool solvable = false;
    std::string certificate;  // Irreducible | Generic | StableWeights | DirectSum | Dim2 | Dim3
    std::optional<WeightCollection> weights;
    std::optional<StabilityReport> report;
    std::vector<FiltrationSpec> filtration_context;
    std::optional<CaseLabel> case_label;
    std::optional<Lemma6Result> phi_table;
    std::vector<std::string> preconditions;
    std::vector<std::string> reasons;  // blocking reasons on UNKNOWN
};

namespace detail {

inline bool has_divergent_point(const ReducedDatum& d) {
    for (const auto& l : d.locals)
        if (l.divergent) return true;
    return false;
}

}  // namespace detail

// The decision pipeline: irreducibility, genericity, the stable-weight
// search over the candidate filtrations, then the dimension-2/3 case
// analysis for data with a declared divergent point. Every positive verdict
// carries a certificate that re-validates.
inline SolvabilityVerdict solve(const ReducedDatum& d, const Rational& margin = Rational(1)) {
    SolvabilityVerdict v;
    int a1 = first_unramified_point(d);
    if (a1 < 0) {
        v.reasons.push_back("no singularity without roots");
        return v;
    }
    v.preconditions.push_back("singularity without roots at point index " +
                              std::to_string(a1));

    GenericityResult gen;
    try {
        gen = genericity_check(d);
    } catch (const error& e) {
        v.reasons.push_back(std::string("genericity check failed: ") + e.what());
        gen.kind = Genericity::unknown;
    }
    if (gen.kind == Genericity::generic) {
        MonodromyTuple t = MonodromyTuple::from(d.monodromy, d.dimension);
        v.solvable = true;
        v.certificate = is_irreducible(t) ? "Irreducible" : "Generic";
        v.preconditions.push_back(gen.note);
        return v;
    }

    // candidate filtrations: computed ones plus whatever the datum supplies
    std::vector<FiltrationSpec> candidates = d.filtrations;
    std::vector<std::string> dropped;
    try {
        for (auto& c : filtration_candidates(d, &dropped)) candidates.push_back(std::move(c));
        v.preconditions.push_back(
            d.dimension <= 3 ? "complete invariant-subspace enumeration"
                             : "user-supplied filtrations only");
    } catch (const error& e) {
        v.reasons.push_back(std::string("invariant subspace search failed: ") + e.what());
    }

    auto stable = find_stable_weights(d, candidates, margin);
    if (std::holds_alternative<StableWeightsResult>(stable)) {
        const auto& res = std::get<StableWeightsResult>(stable);
        v.solvable = true;
        v.certificate = "StableWeights";
        v.weights = res.weights;
        v.report = res.report;
        v.filtration_context = candidates;
        return v;
    }
    v.reasons.push_back("stable weight search: " +
                        std::get<StableWeightsFailure>(stable).reason);

    // dimension 2/3 route, for data with a declared divergent local system
    if ((d.dimension == 2 || d.dimension == 3) && detail::has_divergent_point(d) &&
        !candidates.empty()) {
        v.preconditions.push_back("declared divergent formal solution");
        // direct sum: complementary single-step candidates
        for (size_t i = 0; i < candidates.size(); ++i) {
            for (size_t j = 0; j < candidates.size(); ++j) {
                if (i == j) continue;
                if (candidates[i].steps.size() != 1 || candidates[j].steps.size() != 1) continue;
                const auto& si = candidates[i].steps[0].selections;
                const auto& sj = candidates[j].steps[0].selections;
                bool complementary = true;
                for (size_t pt = 0; pt < d.points.size() && complementary; ++pt) {
                    std::vector<int> merged = si[pt];
                    merged.insert(merged.end(), sj[pt].begin(), sj[pt].end());
                    std::sort(merged.begin(), merged.end());
                    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
                    complementary = merged.size() == static_cast<size_t>(d.dimension) &&
                                    si[pt].size() + sj[pt].size() ==
                                        static_cast<size_t>(d.dimension);
                }
                if (!complementary) continue;
                v.solvable = true;
                v.certificate = "DirectSum";
                v.filtration_context = {candidates[i], candidates[j]};
                return v;
            }
        }
        // full flag in dimension three: integer exponents along the chain
        if (d.dimension == 3) {
            for (const auto& c : candidates) {
                if (c.steps.size() != 2) continue;
                auto phi = lemma6_exponents(d, c);
                if (phi) {
                    // assemble the weight collection from the table
                    WeightCollection w = zero_weights(d);
                    for (size_t pt = 0; pt < d.points.size(); ++pt)
                        for (int t = 0; t < 3; ++t)
                            w[pt][static_cast<size_t>(phi->order[pt][static_cast<size_t>(t)])] =
                                phi->phi[pt][static_cast<size_t>(t)];
                    bool adm = true;
                    for (size_t pt = 0; pt < d.points.size(); ++pt)
                        adm = adm && is_admissible(w[pt], d.locals[pt]);
                    if (!adm) continue;
                    v.solvable = true;
                    v.certificate = "Dim3";
                    v.weights = w;
                    v.phi_table = phi;
                    v.filtration_context = {c};
                    return v;
                }
                v.reasons.push_back("flag exponents admit no integer solution");
            }
        }
        // unique proper subbundle: classify the aligned shape and shift
        const FiltrationSpec& witness = candidates.front();
        try {
            AlignedForm form = aligned_local_form(d, witness, static_cast<size_t>(a1));
            CaseLabel label = dim23_case(form.jprime, form.q_scalar);
            if (label == CaseLabel::regularizable_contradiction) {
                v.reasons.push_back(
                    "aligned form is regularizable: inconsistent with a divergent irregular "
                    "datum");
            } else {
                auto [w, rep] = dim23_weights(d, label, witness, static_cast<size_t>(a1));
                v.solvable = true;
                v.certificate = d.dimension == 2 ? "Dim2" : "Dim3";
                v.case_label = label;
                v.weights = w;
                v.report = rep;
                v.filtration_context = {witness};
                return v;
            }
        } catch (const error& e) {
            v.reasons.push_back(std::string("case analysis failed: ") + e.what());
        }
    } else if (d.dimension == 2 || d.dimension == 3) {
        if (!detail::has_divergent_point(d))
            v.reasons.push_back("no declared divergent formal solution");
        if (candidates.empty())
            v.reasons.push_back("no stabilized filtration candidate to analyze");
    }
    return v;
}

struct RealizationPlan {
    WeightCollection weights;
    FiltrationSpec witness;
    bool proposition_path = false;  // formally fuchsian, unstable, degree zero
    long scale_used = 1;
    Integer degree_correction = 0;
    std::vector<std::string> script;
};

// Plan for realizing a non-generic datum by a block-triangular system: the
// weight collection from the reducible recipe plus the ordered reduction
// script the construction would follow.
inline RealizationPlan reducible_realization_plan(const ReducedDatum& d) {
    GenericityResult gen = genericity_check(d);
    if (gen.kind == Genericity::generic)
        fail(errc::recipe_unavailable, "no stabilized filtration: the datum is generic");
    std::vector<FiltrationSpec> candidates = d.filtrations;
    for (auto& c : filtration_candidates(d)) candidates.push_back(std::move(c));
    if (candidates.empty())
        fail(errc::recipe_unavailable, "no stabilized filtration candidate available");
    FiltrationSpec witness = gen.witness ? *gen.witness : candidates.front();

    RealizationPlan plan;
    plan.witness = witness;
    plan.script = {
        "rescale and separate the admissible weights at the distinguished point",
        "row-reduce the formal factor to sigma^K times an invertible series",
        "permute the diagonal powers through the invertible series",
        "clear the residual poles of the upper block against the lower one",
    };

    auto stable = find_stable_weights(d, candidates);
    if (std::holds_alternative<StableWeightsFailure>(stable)) {
        if (d.formally_fuchsian) {
            // unstable formally fuchsian pair: a degree-zero stabilized
            // subbundle is realized directly, no scaling required
            WeightCollection base = zero_weights(d);
            for (const auto& cand : candidates) {
                for (const auto& step : cand.steps) {
                    Integer deg;
                    try {
                        deg = subbundle_degree(d, base, step);
                    } catch (const error&) {
                        continue;
                    }
                    if (deg == 0) {
                        plan.witness = cand;
                        plan.weights = base;
                        plan.proposition_path = true;
                        return plan;
                    }
                }
            }
            fail(errc::recipe_unavailable,
                 "formally fuchsian path needs a degree-zero stabilized subbundle");
        }
        fail(errc::recipe_unavailable,
             "no stable pair over the candidate set: " +
                 std::get<StableWeightsFailure>(stable).reason);
    }
    const auto& sw = std::get<StableWeightsResult>(stable);
    long n = std::max<long>(sw.scale, 2);
    for (int attempt = 0; attempt < 24; ++attempt, n *= 2) {
        try {
            ReducibleWeightsResult r =
                reducible_weights(d, witness, n, std::optional<WeightCollection>(sw.weights));
            plan.weights = r.weights;
            plan.scale_used = n;
            plan.degree_correction = r.degree_correction;
            return plan;
        } catch (const error& e) {
            if (e.code() != errc::recipe_unavailable) throw;
            if (attempt == 23) throw;
        }
    }
    fail(errc::recipe_unavailable, "unreachable");
}

}  // namespace grh
