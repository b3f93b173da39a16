#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "grh/datum_io.hpp"
#include "grh/formal_local.hpp"
#include "grh/galois.hpp"
#include "grh/rays.hpp"
#include "grh/reduction.hpp"
#include "grh/representation.hpp"
#include "grh/solvability.hpp"
#include "grh/weights.hpp"

using namespace grh;

namespace {

// decimal rendering of a rational to a fixed number of digits (round toward
// zero), for the human-readable angle output
std::string rational_decimal(const Rational& q, int digits) {
    Integer scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    Integer scaled = num(q) * scale / den(q);
    bool neg = scaled < 0;
    if (neg) scaled = -scaled;
    std::string s = scaled.str();
    if (static_cast<int>(s.size()) <= digits) s.insert(0, digits + 1 - s.size(), '0');
    s.insert(s.size() - digits, ".");
    return (neg ? "-" : "") + s;
}

std::string pi_rational_string(const PiRational& x) {
    std::string s = scalar_string(x.numerator());
    if (!(x.denominator() == PiPolynomial::one()))
        s += " / (" + scalar_string(x.denominator()) + ")";
    return s;
}

Json weights_json(const WeightCollection& w) {
    Json out = Json::array();
    for (const auto& v : w) out.push_back(v);
    return out;
}

Json filtration_json(const FiltrationSpec& f) {
    Json out;
    out["origin"] = f.origin;
    Json steps = Json::array();
    for (const auto& st : f.steps) {
        Json sel = Json::array();
        for (const auto& s : st.selections) sel.push_back(s);
        steps.push_back(std::move(sel));
    }
    out["steps"] = std::move(steps);
    return out;
}

Json stability_json(const StabilityReport& rep) {
    Json out;
    out["total_slope"] = to_string(rep.total_slope);
    Json subs = Json::array();
    for (const auto& s : rep.sub_slopes) {
        Json e;
        e["filtration"] = s.filtration;
        e["step"] = s.step;
        e["rank"] = s.rank;
        e["degree"] = s.degree.str();
        e["slope"] = to_string(s.slope);
        subs.push_back(std::move(e));
    }
    out["subbundles"] = std::move(subs);
    if (rep.mu_max) out["mu_max"] = to_string(*rep.mu_max);
    out["verdict"] = verdict_name(rep.verdict);
    if (!rep.pruned.empty()) {
        Json pr = Json::array();
        for (const auto& [fi, why] : rep.pruned) {
            Json e;
            e["filtration"] = fi;
            e["reason"] = why;
            pr.push_back(std::move(e));
        }
        out["pruned"] = std::move(pr);
    }
    return out;
}

struct Emitter {
    bool structured = false;
    Json doc;
    std::string text;

    void line(const std::string& s) { text += s + "\n"; }

    int finish(int code) {
        if (structured)
            std::cout << doc.dump(2) << "\n";
        else
            std::cout << text;
        return code;
    }
};

int run_validate(const std::string& path, Emitter& out) {
    ReducedDatum d = datum_from_json(load_json_file(path, "grh-datum/1"));
    ValidationReport rep = validate_datum(d);
    out.doc["schema"] = "grh-report/1";
    out.doc["command"] = "validate";
    out.doc["verdict"] = rep.valid() ? "VALID" : "INVALID";
    Json v = Json::array();
    for (const auto& violation : rep.violations) {
        Json e;
        e["code"] = violation.code;
        e["detail"] = violation.detail;
        if (violation.point >= 0) e["point"] = violation.point;
        v.push_back(std::move(e));
    }
    out.doc["violations"] = std::move(v);
    out.line(rep.valid() ? "VALID" : "INVALID");
    for (const auto& violation : rep.violations)
        out.line("  [" + violation.code + "]" +
                 (violation.point >= 0 ? " point " + std::to_string(violation.point) : "") +
                 ": " + violation.detail);
    return out.finish(rep.valid() ? 0 : 1);
}

int run_rays(const std::string& path, int point, Emitter& out) {
    ReducedDatum d = datum_from_json(load_json_file(path, "grh-datum/1"));
    if (point < 0) {
        for (size_t i = 0; i < d.locals.size(); ++i)
            if (d.locals[i].irregular()) {
                point = static_cast<int>(i);
                break;
            }
    }
    if (point < 0 || point >= static_cast<int>(d.locals.size()) ||
        !d.locals[static_cast<size_t>(point)].irregular())
        fail(errc::parse_error, "no irregular point to analyze (use --point)");
    const LocalDatum& loc = d.locals[static_cast<size_t>(point)];
    auto rays = singular_rays(*loc.exponential_part);
    out.doc["schema"] = "grh-report/1";
    out.doc["command"] = "rays";
    out.doc["point"] = point;
    Json list = Json::array();
    out.line("point " + std::to_string(point) + ": " + std::to_string(rays.size()) +
             " singular rays");
    for (size_t i = 0; i < rays.size(); ++i) {
        Json r;
        RInterval theta = rays[i].angle.theta(128);
        std::string approx = rational_decimal((theta.lo + theta.hi) / 2, 9);
        if (rays[i].angle.exact_t) r["angle_exact"] = to_string(*rays[i].angle.exact_t) + "*pi";
        r["angle_lo"] = rational_decimal(theta.lo, 12);
        r["angle_hi"] = rational_decimal(theta.hi, 12);
        r["level"] = rays[i].angle.degree;
        Json pairs = Json::array();
        for (const auto& [k, l] : rays[i].pairs) pairs.push_back({k, l});
        r["pairs"] = std::move(pairs);
        std::string pretty = rays[i].angle.exact_t
                                 ? "theta = (" + to_string(*rays[i].angle.exact_t) + ")*pi"
                                 : "theta ~ " + approx;
        std::string ps;
        for (const auto& [k, l] : rays[i].pairs)
            ps += " (" + std::to_string(k) + "," + std::to_string(l) + ")";
        out.line("  ray " + std::to_string(i) + ": " + pretty + ", level " +
                 std::to_string(rays[i].angle.degree) + ", pairs" + ps);
        list.push_back(std::move(r));
    }
    out.doc["rays"] = std::move(list);
    return out.finish(0);
}

int run_reduce(const std::string& path, const std::string& lemma, Emitter& out) {
    SeriesFile f = series_from_json(load_json_file(path, "grh-series/1"));
    out.doc["schema"] = "grh-report/1";
    out.doc["command"] = "reduce";
    out.doc["lemma"] = lemma;
    if (lemma == "sauvage") {
        SauvageResult r = sauvage_reduce(f.matrix);
        out.doc["gamma"] = series_to_json(r.gamma);
        out.doc["k"] = r.k;
        out.doc["f0"] = series_to_json(r.f0);
        std::string ks;
        for (long x : r.k) ks += (ks.empty() ? "" : ", ") + std::to_string(x);
        out.line("sauvage reduction: K = diag(" + ks + ")");
        out.line("gamma and F0 emitted (use --format structured for the series)");
    } else if (lemma == "permute") {
        if (f.k_diagonal.empty())
            fail(errc::parse_error, "the permutation lemma needs k_diagonal in the series file");
        PermutationResult r = permutation_reduce(f.k_diagonal, f.matrix);
        out.doc["t"] = series_to_json(r.t);
        out.doc["h"] = series_to_json(r.h);
        out.doc["d"] = r.d;
        std::string ds;
        for (long x : r.d) ds += (ds.empty() ? "" : ", ") + std::to_string(x);
        out.line("permutation lemma: D = diag(" + ds + ")");
    } else if (lemma == "holoclear") {
        if (f.top_rows <= 0 || f.top_rows >= static_cast<int>(f.matrix.rows()))
            fail(errc::parse_error, "the clearing lemma needs 0 < top_rows < rows");
        size_t p1 = static_cast<size_t>(f.top_rows), p2 = f.matrix.rows() - p1;
        LaurentMatrix top(p1, f.matrix.cols(), f.matrix.root_index(), f.matrix.lo(),
                          f.matrix.hi());
        LaurentMatrix bot(p2, f.matrix.cols(), f.matrix.root_index(), f.matrix.lo(),
                          f.matrix.hi());
        for (long e = f.matrix.lo(); e <= f.matrix.stored_top(); ++e) {
            Mat<Cyclotomic> c = f.matrix.coefficient(e);
            Mat<Cyclotomic> ct(p1, f.matrix.cols()), cb(p2, f.matrix.cols());
            for (size_t i = 0; i < p1; ++i)
                for (size_t j = 0; j < f.matrix.cols(); ++j) ct(i, j) = c(i, j);
            for (size_t i = 0; i < p2; ++i)
                for (size_t j = 0; j < f.matrix.cols(); ++j) cb(i, j) = c(p1 + i, j);
            if (!ct.is_zero()) top.add_term(e, ct);
            if (!cb.is_zero()) bot.add_term(e, cb);
        }
        BlockClearResult r = block_holo_clear(top, bot);
        out.doc["gamma"] = series_to_json(r.gamma);
        out.doc["top_clean"] = series_to_json(r.top_clean);
        out.line("block clearing: top block holomorphized");
    } else {
        fail(errc::parse_error, "unknown lemma '" + lemma + "'");
    }
    return out.finish(0);
}

int run_weights(const std::string& path, long scale, bool separate, bool stable_search,
                bool reducible, bool report, const Rational& margin, Emitter& out) {
    ReducedDatum d = datum_from_json(load_json_file(path, "grh-datum/1"));
    WeightCollection base = d.weights.empty() ? zero_weights(d) : d.weights;
    out.doc["schema"] = "grh-report/1";
    out.doc["command"] = "weights";
    std::vector<FiltrationSpec> filtrations = d.filtrations;
    if (stable_search || report || reducible)
        for (auto& c : filtration_candidates(d)) filtrations.push_back(std::move(c));

    if (scale > 0) {
        WeightCollection s = scale_weights(d, base, scale);
        out.doc["action"] = "scale";
        out.doc["weights"] = weights_json(s);
        out.line("scaled weights emitted");
        base = s;
    }
    if (separate) {
        int a1 = first_unramified_point(d);
        if (a1 < 0) fail(errc::recipe_unavailable, "no singularity without roots");
        long big_r = rank_sum(d);
        base[static_cast<size_t>(a1)] =
            separate_entries(base[static_cast<size_t>(a1)], static_cast<int>(big_r),
                             static_cast<int>(d.points.size()), d.dimension);
        out.doc["action"] = "separate";
        out.doc["weights"] = weights_json(base);
        out.line("entries separated at point " + std::to_string(a1));
    }
    if (stable_search) {
        auto res = find_stable_weights(d, filtrations, margin);
        out.doc["action"] = "stable-search";
        if (std::holds_alternative<StableWeightsResult>(res)) {
            const auto& r = std::get<StableWeightsResult>(res);
            out.doc["found"] = true;
            out.doc["scale"] = r.scale;
            out.doc["weights"] = weights_json(r.weights);
            out.doc["stability"] = stability_json(r.report);
            out.line("stable collection found at scale " + std::to_string(r.scale));
            return out.finish(0);
        }
        const auto& fl = std::get<StableWeightsFailure>(res);
        out.doc["found"] = false;
        out.doc["reason"] = fl.reason;
        out.line("NONE: " + fl.reason);
        return out.finish(1);
    }
    if (reducible) {
        RealizationPlan plan = reducible_realization_plan(d);
        out.doc["action"] = "reducible";
        out.doc["weights"] = weights_json(plan.weights);
        out.doc["witness"] = filtration_json(plan.witness);
        out.doc["proposition_path"] = plan.proposition_path;
        out.doc["scale"] = plan.scale_used;
        out.doc["script"] = plan.script;
        out.line(plan.proposition_path ? "degree-zero path: no scaling needed"
                                       : "reducible weights at scale " +
                                             std::to_string(plan.scale_used));
        return out.finish(0);
    }
    if (report || (!scale && !separate)) {
        StabilityReport rep = stability_check(d, base, filtrations);
        out.doc["action"] = "report";
        out.doc["weights"] = weights_json(base);
        out.doc["stability"] = stability_json(rep);
        out.line(std::string("stability: ") + verdict_name(rep.verdict));
        if (rep.mu_max) out.line("mu_max = " + to_string(*rep.mu_max));
    }
    return out.finish(0);
}

int run_rep(const std::string& path, bool want_irr, bool want_lines, bool want_filtr,
            Emitter& out) {
    ReducedDatum d = datum_from_json(load_json_file(path, "grh-datum/1"));
    if (!want_irr && !want_lines && !want_filtr) want_irr = want_lines = want_filtr = true;
    MonodromyTuple t = MonodromyTuple::from(d.monodromy, d.dimension);
    out.doc["schema"] = "grh-report/1";
    out.doc["command"] = "rep";
    if (want_irr) {
        int dim = algebra_dimension(t);
        out.doc["algebra_dimension"] = dim;
        out.doc["irreducible"] = (dim == d.dimension * d.dimension);
        out.line("algebra dimension " + std::to_string(dim) + " of " +
                 std::to_string(d.dimension * d.dimension) +
                 (dim == d.dimension * d.dimension ? " (irreducible)" : " (reducible)"));
    }
    if (want_lines) {
        auto lines = invariant_lines(t, d.declared_spectrum);
        Json lj = Json::array();
        for (const auto& l : lines) {
            Json e;
            Json basis = Json::array();
            for (size_t i = 0; i < l.basis.rows(); ++i)
                basis.push_back(pi_rational_string(l.basis(i, 0)));
            e["line"] = std::move(basis);
            e["scalar_family"] = l.scalar_family;
            lj.push_back(std::move(e));
        }
        out.doc["invariant_lines"] = std::move(lj);
        out.line(std::to_string(lines.size()) + " invariant line(s)");
    }
    if (want_filtr) {
        std::vector<std::string> dropped;
        auto cands = filtration_candidates(d, &dropped);
        Json fj = Json::array();
        for (const auto& c : cands) fj.push_back(filtration_json(c));
        out.doc["filtrations"] = std::move(fj);
        out.doc["dropped"] = dropped;
        out.line(std::to_string(cands.size()) + " compatible filtration candidate(s), " +
                 std::to_string(dropped.size()) + " dropped");
    }
    return out.finish(0);
}

int run_solve(const std::string& path, const Rational& margin, Emitter& out) {
    ReducedDatum d = datum_from_json(load_json_file(path, "grh-datum/1"));
    ValidationReport vr = validate_datum(d);
    out.doc["schema"] = "grh-report/1";
    out.doc["command"] = "solve";
    out.doc["class"] = datum_class_name(classify_datum(d));
    if (!vr.valid()) {
        out.doc["verdict"] = "INVALID";
        Json v = Json::array();
        for (const auto& violation : vr.violations) v.push_back(violation.code);
        out.doc["violations"] = std::move(v);
        out.line("INVALID: the datum fails validation; run `validate` for details");
        return out.finish(1);
    }
    SolvabilityVerdict v = solve(d, margin);
    out.doc["verdict"] = v.solvable ? "SOLVABLE" : "UNKNOWN";
    if (v.solvable) out.doc["certificate"] = v.certificate;
    if (v.case_label) out.doc["case"] = case_label_name(*v.case_label);
    if (v.weights) out.doc["weights"] = weights_json(*v.weights);
    if (v.report) out.doc["stability"] = stability_json(*v.report);
    if (!v.filtration_context.empty()) {
        Json fj = Json::array();
        for (const auto& c : v.filtration_context) fj.push_back(filtration_json(c));
        out.doc["filtrations"] = std::move(fj);
    }
    if (v.phi_table) {
        Json pj = Json::array();
        for (const auto& row : v.phi_table->phi) pj.push_back(row);
        out.doc["phi"] = std::move(pj);
    }
    out.doc["preconditions"] = v.preconditions;
    if (!v.solvable) out.doc["reasons"] = v.reasons;
    out.line(v.solvable ? "SOLVABLE (" + v.certificate + ")" : "UNKNOWN");
    if (!v.solvable)
        for (const auto& r : v.reasons) out.line("  reason: " + r);
    return out.finish(v.solvable ? 0 : 1);
}

int run_galois_rank(const std::string& path, MuRule rule, Emitter& out) {
    LocalGaloisStructure l = structure_from_json(load_json_file(path, "grh-structure/1"));
    RankResult r = katz_rank_galois(l, rule);
    out.doc["schema"] = "grh-report/1";
    out.doc["command"] = "galois-rank";
    Json blocks = Json::array();
    for (const auto& [nu, mu] : r.block_mu) {
        Json b;
        b["nu"] = nu;
        b["mu"] = mu;
        blocks.push_back(std::move(b));
    }
    out.doc["blocks"] = std::move(blocks);
    out.doc["katz_rank"] = to_string(r.rho);
    out.doc["poincare_rank"] = r.poincare_rank;
    Json wit = Json::array();
    for (const auto& b : r.witness.blocks) {
        Json bj;
        bj["ramification"] = b.ramification;
        bj["q_degree"] = b.q_degree();
        wit.push_back(std::move(bj));
    }
    out.doc["witness"] = std::move(wit);
    out.line("katz rank " + to_string(r.rho) + ", poincare rank " +
             std::to_string(r.poincare_rank));
    return out.finish(0);
}

int run_galois_report(const std::string& path, Emitter& out) {
    GaloisFacts f = facts_from_json(load_json_file(path, "grh-facts/1"));
    auto findings = realization_report(f);
    out.doc["schema"] = "grh-report/1";
    out.doc["command"] = "galois-report";
    Json fj = Json::array();
    for (const auto& r : findings) {
        Json e;
        e["rule"] = r.rule;
        e["applicable"] = r.applicable;
        e["unmet"] = r.unmet;
        if (r.applicable) e["conclusion"] = r.conclusion;
        fj.push_back(std::move(e));
        out.line((r.applicable ? "[applies] " : "[blocked] ") + r.rule +
                 (r.applicable ? ": " + r.conclusion : ""));
        for (const auto& u : r.unmet) out.line("    unmet: " + u);
    }
    out.doc["findings"] = std::move(fj);
    return out.finish(0);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact workbench for generalized monodromy data"};
    app.require_subcommand(1);

    std::string format = "text";
    app.add_option("--format", format, "output format")
        ->check(CLI::IsMember({"text", "structured"}))
        ->envname("GRH_FORMAT");
    std::string margin_text = "1";
    app.add_option("--margin", margin_text, "slack factor for the weight rescaling bound")
        ->envname("GRH_MARGIN");
    app.add_option("--max-conductor", options::max_conductor, "cyclotomic conductor cap")
        ->envname("GRH_MAX_CONDUCTOR");
    app.add_option("--truncation", options::default_truncation, "default series truncation")
        ->envname("GRH_TRUNCATION");
    std::string mu_rule_text = "conservative";
    app.add_option("--mu-rule", mu_rule_text, "root relevance rule for the Galois ranks")
        ->check(CLI::IsMember({"conservative", "iterative"}))
        ->envname("GRH_MU_RULE");

    std::string input;
    auto* validate = app.add_subcommand("validate", "check every law of a datum file");
    validate->add_option("input", input, "datum file")->required();

    auto* rays = app.add_subcommand("rays", "singular rays of an exponential part");
    rays->add_option("input", input, "datum file")->required();
    int ray_point = -1;
    rays->add_option("--point", ray_point, "point index (default: first irregular)");

    auto* reduce = app.add_subcommand("reduce", "formal matrix reductions");
    reduce->add_option("input", input, "series file")->required();
    std::string lemma = "sauvage";
    reduce->add_option("--lemma", lemma, "which reduction to run")
        ->check(CLI::IsMember({"sauvage", "permute", "holoclear"}));

    auto* weights = app.add_subcommand("weights", "weight recipes and stability reports");
    weights->add_option("input", input, "datum file")->required();
    long scale = 0;
    bool separate = false, stable_search = false, reducible = false, report = false;
    weights->add_option("--scale", scale, "rescale the weight collection by N");
    weights->add_flag("--separate", separate, "separate equal entries at the distinguished point");
    weights->add_flag("--stable-search", stable_search, "search for a stable collection");
    weights->add_flag("--reducible", reducible, "run the reducible-realization recipe");
    weights->add_flag("--report", report, "emit the stability report");

    auto* rep = app.add_subcommand("rep", "monodromy representation analysis");
    rep->add_option("input", input, "datum file")->required();
    bool want_irr = false, want_lines = false, want_filtr = false;
    rep->add_flag("--irreducible", want_irr, "algebra dimension and irreducibility");
    rep->add_flag("--lines", want_lines, "invariant lines");
    rep->add_flag("--filtrations", want_filtr, "locally compatible filtration candidates");

    auto* solve_cmd = app.add_subcommand("solve", "decide the sufficient conditions");
    solve_cmd->add_option("input", input, "datum file")->required();

    auto* grank = app.add_subcommand("galois-rank", "minimal Katz/Poincare rank of a structure");
    grank->add_option("input", input, "structure file")->required();

    auto* greport = app.add_subcommand("galois-report", "realization report from a facts file");
    greport->add_option("input", input, "facts file")->required();

    CLI11_PARSE(app, argc, argv);

    Emitter out;
    out.structured = format == "structured";
    MuRule rule = mu_rule_text == "iterative" ? MuRule::iterative : MuRule::conservative;

    try {
        Rational margin = parse_rational(margin_text);
        if (validate->parsed()) return run_validate(input, out);
        if (rays->parsed()) return run_rays(input, ray_point, out);
        if (reduce->parsed()) return run_reduce(input, lemma, out);
        if (weights->parsed())
            return run_weights(input, scale, separate, stable_search, reducible, report, margin,
                               out);
        if (rep->parsed()) return run_rep(input, want_irr, want_lines, want_filtr, out);
        if (solve_cmd->parsed()) return run_solve(input, margin, out);
        if (grank->parsed()) return run_galois_rank(input, rule, out);
        if (greport->parsed()) return run_galois_report(input, out);
    } catch (const error& e) {
        Json err;
        err["schema"] = "grh-report/1";
        err["command"] = "error";
        err["code"] = errc_name(e.code());
        err["message"] = e.what();
        if (out.structured)
            std::cout << err.dump(2) << "\n";
        else
            std::cerr << e.what() << "\n";
        return (e.code() == errc::parse_error || e.code() == errc::internal) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "INTERNAL: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
