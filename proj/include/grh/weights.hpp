#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "grh/formal_local.hpp"
#include "grh/local_datum.hpp"

namespace grh {

// One integer diagonal matrix per singular point, blocked like Q there.
using WeightCollection = std::vector<std::vector<long>>;

inline WeightCollection zero_weights(const ReducedDatum& d) {
    return WeightCollection(d.points.size(),
                            std::vector<long>(static_cast<size_t>(d.dimension), 0));
}

// Admissibility of one integer diagonal against one local datum: within each
// unramified superblock the twist must keep the Jordan links holomorphic
// (lambda_k >= lambda_l wherever the upper-triangular part has an entry),
// and ramified superblocks only admit scalar blocks.
inline bool is_admissible(const std::vector<long>& lambda, const LocalDatum& d) {
    if (lambda.size() != static_cast<size_t>(d.dimension))
        fail(errc::block_mismatch, "weight diagonal has size " + std::to_string(lambda.size()) +
                                       ", datum dimension is " + std::to_string(d.dimension));
    if (d.irregular()) {
        const ExponentialPart& part = *d.exponential_part;
        auto positions = expand(part);
        // scalar rule on ramified superblocks
        for (size_t bi = 0; bi < part.blocks.size(); ++bi) {
            if (part.blocks[bi].ramification == 1) continue;
            std::optional<long> value;
            for (size_t j = 0; j < positions.size(); ++j) {
                if (positions[j].block != static_cast<int>(bi)) continue;
                if (!value) value = lambda[j];
                if (lambda[j] != *value) return false;
            }
        }
        // Jordan links within (copies of) each superblock
        for (size_t j = 0; j + 1 < positions.size(); ++j) {
            if (!positions[j].jordan_link_next) continue;
            if (lambda[j] < lambda[j + 1]) return false;
        }
        return true;
    }
    Mat<ComplexExact> e = d.effective_exponent_matrix();
    for (size_t k = 0; k < e.rows(); ++k)
        for (size_t l = k + 1; l < e.cols(); ++l)
            if (!e(k, l).is_zero() && lambda[k] < lambda[l]) return false;
    return true;
}

inline void check_weights(const ReducedDatum& d, const WeightCollection& w) {
    if (w.size() != d.points.size())
        fail(errc::block_mismatch, "weight collection size differs from the point count");
    for (size_t i = 0; i < w.size(); ++i)
        if (!is_admissible(w[i], d.locals[i]))
            fail(errc::block_mismatch,
                 "weight diagonal at point " + std::to_string(i) + " is not admissible");
}

// deg F = sum over points of tr(Lambda_i + T_i); must come out an integer.
inline Integer degree(const ReducedDatum& d, const WeightCollection& w) {
    ComplexExact total;
    for (size_t i = 0; i < d.locals.size(); ++i) {
        for (long x : w[i]) total += ComplexExact(Rational(x));
        total += d.locals[i].exponent_trace();
    }
    if (total.im != 0)
        fail(errc::non_integer_degree, "exponent traces carry a nonzero imaginary part");
    if (!is_integer(total.re))
        fail(errc::non_integer_degree, "degree " + to_string(total.re) + " is not an integer");
    return num(total.re);
}

// Degree of the subbundle cut out by one per-point position selection.
inline Integer subbundle_degree(const ReducedDatum& d, const WeightCollection& w,
                                const FiltrationStep& step) {
    if (step.selections.size() != d.points.size())
        fail(errc::block_mismatch, "selection count differs from the point count");
    ComplexExact total;
    for (size_t i = 0; i < d.locals.size(); ++i) {
        auto diag = d.locals[i].exponent_diagonal();
        for (int j : step.selections[i]) {
            if (j < 0 || j >= d.dimension) fail(errc::block_mismatch, "selection out of range");
            total += ComplexExact(Rational(w[i][static_cast<size_t>(j)])) +
                     diag[static_cast<size_t>(j)];
        }
    }
    if (total.im != 0)
        fail(errc::imaginary_obstruction,
             "imaginary parts of the selected exponents do not cancel");
    if (!is_integer(total.re))
        fail(errc::non_integer_degree,
             "selected exponents sum to the non-integer " + to_string(total.re));
    return num(total.re);
}

enum class StabilityVerdict { stable, semistable, unstable };

inline const char* verdict_name(StabilityVerdict v) {
    switch (v) {
        case StabilityVerdict::stable: return "stable";
        case StabilityVerdict::semistable: return "semistable";
        case StabilityVerdict::unstable: return "unstable";
    }
    return "?";
}

struct StabilityReport {
    Rational total_slope;
    struct SubSlope {
        size_t filtration, step;
        int rank;
        Integer degree;
        Rational slope;
    };
    std::vector<SubSlope> sub_slopes;
    std::vector<std::pair<size_t, std::string>> pruned;  // filtration index, reason
    std::optional<Rational> mu_max;                      // max(slope' - slope), checked set
    StabilityVerdict verdict = StabilityVerdict::stable;
    std::optional<SubSlope> witness;                     // extremal filtration step
};

// Slope comparison of the pair against every step of every supplied
// filtration. Steps whose degree is obstructed (imaginary parts or
// non-integer sums) cannot come from actual stabilized subbundles and are
// pruned with a note.
inline StabilityReport stability_check(const ReducedDatum& d, const WeightCollection& w,
                                       const std::vector<FiltrationSpec>& filtrations) {
    check_weights(d, w);
    StabilityReport rep;
    Integer total_deg = degree(d, w);
    rep.total_slope = Rational(total_deg, Integer(d.dimension));
    for (size_t fi = 0; fi < filtrations.size(); ++fi) {
        for (size_t si = 0; si < filtrations[fi].steps.size(); ++si) {
            const FiltrationStep& step = filtrations[fi].steps[si];
            int rank = step.selections.empty() ? 0 : static_cast<int>(step.selections[0].size());
            if (rank == 0 || rank >= d.dimension) continue;  // only proper subbundles count
            try {
                Integer deg = subbundle_degree(d, w, step);
                Rational slope(deg, Integer(rank));
                rep.sub_slopes.push_back({fi, si, rank, deg, slope});
            } catch (const error& e) {
                if (e.code() == errc::imaginary_obstruction ||
                    e.code() == errc::non_integer_degree) {
                    rep.pruned.push_back({fi, std::string(e.what())});
                    continue;
                }
                throw;
            }
        }
    }
    for (const auto& s : rep.sub_slopes) {
        Rational gap = s.slope - rep.total_slope;
        if (!rep.mu_max || gap > *rep.mu_max) {
            rep.mu_max = gap;
            rep.witness = s;
        }
    }
    if (!rep.mu_max)
        rep.verdict = StabilityVerdict::stable;  // vacuous
    else if (*rep.mu_max < 0)
        rep.verdict = StabilityVerdict::stable;
    else if (*rep.mu_max == 0)
        rep.verdict = StabilityVerdict::semistable;
    else
        rep.verdict = StabilityVerdict::unstable;
    return rep;
}

// The weight rescaling lambda -> N lambda + [Re (N-1) rho] entry by entry on
// unramified blocks; ramified superblocks move as scalars by the averaged
// integer part, which keeps them admissible.
inline WeightCollection scale_weights(const ReducedDatum& d, const WeightCollection& w, long n_factor) {
    check_weights(d, w);
    if (n_factor <= 0) fail(errc::internal, "scale factor must be positive");
    WeightCollection out = w;
    for (size_t i = 0; i < d.locals.size(); ++i) {
        const LocalDatum& loc = d.locals[i];
        auto diag = loc.exponent_diagonal();
        if (loc.irregular()) {
            auto positions = expand(*loc.exponential_part);
            const auto& blocks = loc.exponential_part->blocks;
            size_t j = 0;
            for (size_t bi = 0; bi < blocks.size(); ++bi) {
                size_t bdim = static_cast<size_t>(blocks[bi].dimension());
                if (blocks[bi].ramification > 1) {
                    Rational re_sum(0);
                    for (size_t t = 0; t < bdim; ++t)
                        re_sum += Rational(n_factor - 1) * diag[j + t].re;
                    long shift = rfloor(re_sum / Rational(static_cast<long>(bdim)))
                                     .convert_to<long>();
                    for (size_t t = 0; t < bdim; ++t)
                        out[i][j + t] = n_factor * w[i][j + t] + shift;
                } else {
                    for (size_t t = 0; t < bdim; ++t)
                        out[i][j + t] =
                            n_factor * w[i][j + t] +
                            rfloor(Rational(n_factor - 1) * diag[j + t].re).convert_to<long>();
                }
                j += bdim;
            }
        } else {
            for (size_t j = 0; j < diag.size(); ++j)
                out[i][j] = n_factor * w[i][j] +
                            rfloor(Rational(n_factor - 1) * diag[j].re).convert_to<long>();
        }
    }
    check_weights(d, out);
    return out;
}

// Splits every maximal chain of equal entries symmetrically around its value
// with gap (R-2+n) p^2 per step; the trace is preserved exactly.
inline std::vector<long> separate_entries(const std::vector<long>& lambda, int big_r, int n,
                                          int p) {
    long g = static_cast<long>(big_r - 2 + n) * p * p;
    std::vector<long> out = lambda;
    std::vector<bool> done(lambda.size(), false);
    for (size_t i = 0; i < lambda.size(); ++i) {
        if (done[i]) continue;
        std::vector<size_t> chain;
        for (size_t j = i; j < lambda.size(); ++j)
            if (!done[j] && lambda[j] == lambda[i]) chain.push_back(j);
        for (size_t j : chain) done[j] = true;
        long s = static_cast<long>(chain.size());
        if (s < 2) continue;
        for (long t = 1; t <= s; ++t) {
            long shift = (t <= s / 2) ? g * (s / 2 - t + 1) : g * ((s + 1) / 2 - t);
            out[chain[static_cast<size_t>(t - 1)]] += shift;
        }
    }
    return out;
}

struct StableWeightsResult {
    WeightCollection weights;
    StabilityReport report;
    long scale = 1;
    int separated_point = -1;
};

struct StableWeightsFailure {
    std::string reason;
    std::optional<StabilityReport::SubSlope> witness;
};

inline int first_unramified_point(const ReducedDatum& d) {
    for (size_t i = 0; i < d.locals.size(); ++i)
        if (d.locals[i].kind != LocalKind::irregular_ramified) return static_cast<int>(i);
    return -1;
}

inline long rank_sum(const ReducedDatum& d) {
    long r = 0;
    for (const auto& l : d.locals) r += l.rank;
    return r;
}

// The stable-weight recipe: start from the zero collection; if the pair is
// already stable over the supplied filtration set, rescale by the least N
// with -N mu_max > margin (R-2+n) p^3, separate equal entries at the chosen
// unramified point, and verify; N doubles until the verification passes.
inline std::variant<StableWeightsResult, StableWeightsFailure> find_stable_weights(
    const ReducedDatum& d, const std::vector<FiltrationSpec>& filtrations,
    const Rational& margin = Rational(1)) {
    WeightCollection base = zero_weights(d);
    StabilityReport rep0 = stability_check(d, base, filtrations);
    if (!rep0.mu_max) {
        StableWeightsResult res;
        res.weights = base;
        res.report = rep0;
        return res;  // no proper stabilized candidates: vacuously stable
    }
    if (*rep0.mu_max >= 0) {
        StableWeightsFailure f;
        f.reason = "a supplied filtration has slope >= the total slope at every tested weight";
        f.witness = rep0.witness;
        return f;
    }
    int a1 = first_unramified_point(d);
    if (a1 < 0) {
        StableWeightsFailure f;
        f.reason = "no singularity without roots";
        return f;
    }
    long big_r = rank_sum(d);
    int n = static_cast<int>(d.points.size());
    long p = d.dimension;
    Rational bound = margin * Rational((big_r - 2 + n) * p * p * p);
    Rational mu = -*rep0.mu_max;  // positive
    long n_scale = (rfloor(bound / mu) + 1).convert_to<long>();
    if (n_scale < 1) n_scale = 1;
    for (int attempt = 0; attempt < 32; ++attempt, n_scale *= 2) {
        WeightCollection scaled = scale_weights(d, base, n_scale);
        scaled[static_cast<size_t>(a1)] =
            separate_entries(scaled[static_cast<size_t>(a1)], static_cast<int>(big_r), n,
                             static_cast<int>(p));
        if (!is_admissible(scaled[static_cast<size_t>(a1)], d.locals[static_cast<size_t>(a1)]))
            continue;
        StabilityReport rep = stability_check(d, scaled, filtrations);
        if (rep.verdict == StabilityVerdict::stable) {
            StableWeightsResult res;
            res.weights = scaled;
            res.report = rep;
            res.scale = n_scale;
            res.separated_point = a1;
            return res;
        }
    }
    StableWeightsFailure f;
    f.reason = "rescaling did not reach a stable collection within the retry budget";
    return f;
}

struct ReducibleWeightsResult {
    WeightCollection weights;
    Integer degree_correction;  // the constant folded into the target step
    std::vector<long> k_used;
    size_t target_step = 0;     // index into spec.steps of the degree-zero step
    bool degenerate_path = false;  // formally fuchsian, degree already zero
};

// The reducible-realization weights: rescale the base collection by N, push
// the distinguished point's entries apart with a k ladder ordered by flag
// depth, then fold in the exact correction that makes the target subbundle
// degree zero. All displayed sign conditions are verified before returning.
inline ReducibleWeightsResult reducible_weights(const ReducedDatum& d, const FiltrationSpec& f,
                                                long n_factor,
                                                std::optional<WeightCollection> base_in = {}) {
    if (f.steps.empty()) fail(errc::recipe_unavailable, "empty filtration");
    int a1 = first_unramified_point(d);
    if (a1 < 0) fail(errc::recipe_unavailable, "no singularity without roots");
    WeightCollection base = base_in ? *base_in : zero_weights(d);
    check_weights(d, base);

    const size_t p = static_cast<size_t>(d.dimension);
    const auto& steps = f.steps;
    // chain sanity at the distinguished point: proper, strictly nested
    for (size_t si = 0; si < steps.size(); ++si) {
        const auto& sel = steps[si].selections[static_cast<size_t>(a1)];
        if (sel.empty() || sel.size() >= p)
            fail(errc::recipe_unavailable, "filtration steps must be proper");
        for (size_t sj = 0; sj < steps.size(); ++sj) {
            const auto& other = steps[sj].selections[static_cast<size_t>(a1)];
            if (other.size() <= sel.size()) continue;
            for (int pos : sel)
                if (std::find(other.begin(), other.end(), pos) == other.end())
                    fail(errc::recipe_unavailable, "filtration steps are not nested");
        }
    }

    // distinguished step: maximal degree at the base collection, then maximal
    // rank, then first
    size_t target = 0;
    {
        std::optional<Integer> best;
        int best_rank = -1;
        for (size_t si = 0; si < steps.size(); ++si) {
            Integer deg = subbundle_degree(d, base, steps[si]);
            int rank = static_cast<int>(steps[si].selections[0].size());
            if (!best || deg > *best || (deg == *best && rank > best_rank)) {
                best = deg;
                best_rank = rank;
                target = si;
            }
        }
        if (d.formally_fuchsian && *best == 0) {
            ReducibleWeightsResult res;
            res.weights = base;
            res.target_step = target;
            res.degenerate_path = true;
            return res;
        }
    }

    long big_r = rank_sum(d);
    int n = static_cast<int>(d.points.size());
    long gap_needed = (big_r - 2 + n) * static_cast<long>(p);

    // positions at the distinguished point ordered by flag depth (number of
    // steps containing them), deepest first
    std::vector<int> depth(p, 0);
    for (const auto& st : steps)
        for (int pos : st.selections[static_cast<size_t>(a1)]) depth[static_cast<size_t>(pos)]++;
    std::vector<size_t> order(p);
    for (size_t j = 0; j < p; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return depth[a] > depth[b]; });

    WeightCollection scaled = scale_weights(d, base, n_factor);
    long k_base = 2L * n * static_cast<long>(p) + 1;
    long k_gap = gap_needed + 1;
    std::vector<long> k(p);  // ladder values, descending
    for (size_t j = 0; j < p; ++j) k[j] = k_base + static_cast<long>(p - 1 - j) * k_gap;

    WeightCollection out = scaled;
    auto& v1 = out[static_cast<size_t>(a1)];
    Integer s_corr = -degree(d, scaled);
    for (size_t j = 0; j < p; ++j) v1[order[j]] += k[j];
    v1[order[0]] += s_corr.convert_to<long>();
    long k_sum = 0;
    for (long x : k) k_sum += x;
    v1[order[p - 1]] -= k_sum;

    // fold the exact correction making the target step degree zero: add it
    // inside the innermost part of the chain and compensate outside all steps
    Integer d1 = subbundle_degree(d, out, steps[target]);
    const auto& sel1 = steps[target].selections[static_cast<size_t>(a1)];
    int jin = -1;
    for (size_t j = 0; j < p && jin < 0; ++j)
        if (std::find(sel1.begin(), sel1.end(), static_cast<int>(order[j])) != sel1.end())
            jin = static_cast<int>(order[j]);
    int jout = static_cast<int>(order[p - 1]);
    if (depth[static_cast<size_t>(jout)] != 0)
        fail(errc::recipe_unavailable, "the finest step selects every shallow position");
    v1[static_cast<size_t>(jin)] -= d1.convert_to<long>();
    v1[static_cast<size_t>(jout)] += d1.convert_to<long>();

    // verification of every displayed condition
    std::string why;
    do {
        bool admissible = true;
        for (size_t i = 0; i < out.size(); ++i)
            admissible = admissible && is_admissible(out[i], d.locals[i]);
        if (!admissible) {
            why = "output not admissible";
            break;
        }
        if (degree(d, out) != 0) {
            why = "total degree nonzero";
            break;
        }
        if (subbundle_degree(d, out, f.steps[target]) != 0) {
            why = "target step degree nonzero";
            break;
        }
        bool others_negative = true;
        for (size_t si = 0; si < f.steps.size(); ++si) {
            if (si == target) continue;
            if (subbundle_degree(d, out, f.steps[si]) >= 0) others_negative = false;
        }
        if (!others_negative) {
            why = "a coarser or finer step has nonnegative degree; increase N";
            break;
        }
        for (size_t a = 0; a < p; ++a)
            for (size_t b = a + 1; b < p; ++b)
                if (std::abs(v1[a] - v1[b]) <= gap_needed) {
                    why = "entry gap condition failed at the distinguished point";
                    break;
                }
    } while (false);
    if (!why.empty()) fail(errc::recipe_unavailable, why);

    ReducibleWeightsResult res;
    res.weights = out;
    res.degree_correction = d1;
    res.k_used = k;
    res.target_step = target;
    return res;
}

struct GapBound {
    long step;    // bound on c_j - c_{j+1}
    long spread;  // bound on c_1 - c_p
};

inline GapBound splitting_gap_bound(int p, int n, long big_r) {
    long step = big_r + n - 2;
    return {step, step * (p - 1)};
}

struct Lemma6Result {
    std::vector<std::vector<long>> phi;  // [point][t]
    std::vector<std::vector<int>> order; // flag-aligned position order per point
};

// Integer exponents phi_i^t with zero column sums against the rho diagonal,
// compatible with the triangular structure along the flag. Bounded search,
// deterministic: columns filled with values descending from the box bound.
inline std::optional<Lemma6Result> lemma6_exponents(const ReducedDatum& d,
                                                    const FiltrationSpec& flag) {
    if (d.dimension != 3) fail(errc::recipe_unavailable, "three-dimensional data only");
    if (flag.steps.size() != 2) fail(errc::recipe_unavailable, "a full flag has two proper steps");
    size_t n = d.points.size();
    // flag-aligned order: step-1 position, then the new step-2 position, then the rest
    std::vector<std::vector<int>> order(n);
    for (size_t i = 0; i < n; ++i) {
        std::vector<int> ord;
        for (int j : flag.steps[0].selections[i]) ord.push_back(j);
        for (int j : flag.steps[1].selections[i])
            if (std::find(ord.begin(), ord.end(), j) == ord.end()) ord.push_back(j);
        for (int j = 0; j < 3; ++j)
            if (std::find(ord.begin(), ord.end(), j) == ord.end()) ord.push_back(j);
        if (ord.size() != 3) fail(errc::recipe_unavailable, "flag selections malformed");
        order[i] = ord;
    }
    // column sums: sum_i rho_i^t must be an integer for each t
    std::vector<long> colsum(3);
    for (int t = 0; t < 3; ++t) {
        ComplexExact s;
        for (size_t i = 0; i < n; ++i) {
            auto diag = d.locals[i].exponent_diagonal();
            s += diag[static_cast<size_t>(order[i][static_cast<size_t>(t)])];
        }
        if (s.im != 0 || !is_integer(s.re)) return std::nullopt;
        colsum[t] = (-num(s.re)).convert_to<long>();
    }
    // constraint (a): within each point, links of the aligned triangular form
    auto link = [&](size_t i, int t1, int t2) -> bool {
        const LocalDatum& loc = d.locals[i];
        int pos1 = order[i][static_cast<size_t>(t1)], pos2 = order[i][static_cast<size_t>(t2)];
        if (loc.irregular()) {
            auto positions = expand(*loc.exponential_part);
            if (pos2 == pos1 + 1) return positions[static_cast<size_t>(pos1)].jordan_link_next;
            return false;
        }
        Mat<ComplexExact> e = loc.effective_exponent_matrix();
        int a = std::min(pos1, pos2), b = std::max(pos1, pos2);
        return !e(static_cast<size_t>(a), static_cast<size_t>(b)).is_zero();
    };
    // per-column candidates ordered by (max-norm ascending, lexicographic
    // descending); the first compatible combination wins
    auto column_candidates = [&](long target_sum) {
        std::vector<std::vector<long>> result;
        for (long m = 0; m <= std::abs(target_sum) + 2; ++m) {
            std::vector<long> cur(n);
            std::function<void(size_t, long, bool)> rec = [&](size_t row, long acc, bool hit) {
                if (result.size() > 4000) return;
                if (row == n) {
                    if (acc == target_sum && (hit || m == 0)) result.push_back(cur);
                    return;
                }
                long remain = static_cast<long>(n - row - 1);
                for (long v = m; v >= -m; --v) {
                    long next = acc + v;
                    if (next - remain * m > target_sum) continue;
                    if (next + remain * m < target_sum) break;
                    cur[row] = v;
                    rec(row + 1, next, hit || std::abs(v) == m);
                }
            };
            rec(0, 0, false);
        }
        return result;
    };
    auto c0 = column_candidates(colsum[0]);
    auto c1 = column_candidates(colsum[1]);
    auto c2 = column_candidates(colsum[2]);
    auto pair_ok = [&](const std::vector<long>& a, int ta, const std::vector<long>& b, int tb) {
        for (size_t i = 0; i < n; ++i) {
            if (link(i, ta, tb) && a[i] < b[i]) return false;
            if (link(i, tb, ta) && b[i] < a[i]) return false;
        }
        return true;
    };
    for (const auto& x0 : c0)
        for (const auto& x1 : c1) {
            if (!pair_ok(x0, 0, x1, 1)) continue;
            for (const auto& x2 : c2) {
                if (!pair_ok(x0, 0, x2, 2) || !pair_ok(x1, 1, x2, 2)) continue;
                Lemma6Result res;
                res.phi.assign(n, std::vector<long>(3, 0));
                for (size_t i = 0; i < n; ++i) {
                    res.phi[i][0] = x0[i];
                    res.phi[i][1] = x1[i];
                    res.phi[i][2] = x2[i];
                }
                res.order = order;
                return res;
            }
        }
    return std::nullopt;
}

}  // namespace grh
