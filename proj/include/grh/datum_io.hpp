#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "grh/galois.hpp"
#include "grh/laurent.hpp"
#include "grh/local_datum.hpp"
#include "grh/scalar_io.hpp"

namespace grh {

using Json = nlohmann::ordered_json;

// One schema family with a version header; unversioned files are rejected so
// every emitted certificate stays replayable.
inline Json load_json_file(const std::string& path, const std::string& expected_schema) {
    std::ifstream in(path);
    if (!in) fail(errc::parse_error, "cannot open '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail(errc::parse_error, std::string("invalid JSON in '") + path + "': " + e.what());
    }
    if (!j.contains("schema") || !j["schema"].is_string())
        fail(errc::parse_error, "'" + path + "' carries no schema header");
    if (j["schema"].get<std::string>() != expected_schema)
        fail(errc::parse_error, "'" + path + "' has schema '" +
                                    j["schema"].get<std::string>() + "', expected '" +
                                    expected_schema + "'");
    return j;
}

namespace io_detail {

inline SpherePoint parse_point(const std::string& s) {
    std::string t = detail::strip_spaces(s);
    if (t == "inf" || t == "infinity" || t == "oo") return SpherePoint::infinity();
    return SpherePoint::at(parse_complex(t));
}

inline std::string point_string(const SpherePoint& p) {
    return p.infinite ? "inf" : scalar_string(p.coord);
}

template <class T, class F>
Mat<T> matrix_from_json(const Json& j, F parse_entry) {
    if (!j.is_array() || j.empty())
        fail(errc::parse_error, "matrix must be a non-empty array of rows");
    size_t rows = j.size(), cols = j[0].size();
    Mat<T> m(rows, cols);
    for (size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            fail(errc::parse_error, "ragged matrix rows");
        for (size_t c = 0; c < cols; ++c)
            m(i, c) = parse_entry(j[i][c].get<std::string>());
    }
    return m;
}

template <class T, class F>
Json matrix_to_json(const Mat<T>& m, F entry_string) {
    Json rows = Json::array();
    for (size_t i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (size_t c = 0; c < m.cols(); ++c) row.push_back(entry_string(m(i, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace io_detail

inline LocalDatum local_from_json(const Json& j, int global_dimension) {
    LocalDatum d;
    std::string kind = j.value("kind", "fuchsian");
    if (kind == "fuchsian")
        d.kind = LocalKind::fuchsian;
    else if (kind == "regular_singular")
        d.kind = LocalKind::regular_singular;
    else if (kind == "irregular_unramified")
        d.kind = LocalKind::irregular_unramified;
    else if (kind == "irregular_ramified")
        d.kind = LocalKind::irregular_ramified;
    else
        fail(errc::parse_error, "unknown local kind '" + kind + "'");
    d.dimension = j.value("dimension", global_dimension);
    d.rank = j.value("rank", 0);
    d.divergent = j.value("divergent", false);
    if (j.contains("exponents"))
        d.exponent_matrix = io_detail::matrix_from_json<ComplexExact>(
            j["exponents"], [](const std::string& s) { return parse_complex(s); });
    if (j.contains("superblocks")) {
        ExponentialPart part;
        for (const auto& bj : j["superblocks"]) {
            Superblock b;
            b.ramification = bj.value("ramification", 1);
            b.multiplicity = bj.value("multiplicity", 1);
            if (b.ramification < 1 || b.multiplicity < 1)
                fail(errc::parse_error, "superblock sizes must be positive");
            // "q" lists the coefficients of t^1, t^2, ...
            b.q = {Cyclotomic::zero()};
            if (bj.contains("q"))
                for (const auto& qc : bj["q"])
                    b.q.push_back(parse_cyclotomic(qc.get<std::string>()));
            if (bj.contains("jordan")) {
                for (const auto& jb : bj["jordan"])
                    b.jordan.push_back({parse_complex(jb.value("rho", "0")),
                                        jb.value("size", 1)});
            } else {
                b.jordan = {{ComplexExact(Rational(0)), b.multiplicity}};
            }
            part.blocks.push_back(std::move(b));
        }
        d.exponential_part = std::move(part);
    }
    if (j.contains("stokes"))
        for (const auto& sj : j["stokes"])
            d.stokes.push_back(io_detail::matrix_from_json<Cyclotomic>(
                sj, [](const std::string& s) { return parse_cyclotomic(s); }));
    return d;
}

inline FiltrationSpec filtration_from_json(const Json& j) {
    FiltrationSpec f;
    f.origin = j.value("origin", "datum file");
    if (!j.contains("steps")) fail(errc::parse_error, "filtration without steps");
    for (const auto& st : j["steps"]) {
        FiltrationStep step;
        for (const auto& sel : st) step.selections.push_back(sel.get<std::vector<int>>());
        f.steps.push_back(std::move(step));
    }
    return f;
}

inline ReducedDatum datum_from_json(const Json& j) {
    ReducedDatum d;
    if (!j.contains("dimension") || !j.contains("points") || !j.contains("monodromy") ||
        !j.contains("locals"))
        fail(errc::parse_error, "datum needs dimension, points, monodromy and locals");
    d.dimension = j["dimension"].get<int>();
    if (d.dimension < 1) fail(errc::parse_error, "dimension must be positive");
    d.base_point = io_detail::parse_point(j.value("base_point", "2+3i"));
    for (const auto& pj : j["points"])
        d.points.push_back(io_detail::parse_point(pj.get<std::string>()));
    for (const auto& mj : j["monodromy"])
        d.monodromy.push_back(io_detail::matrix_from_json<PiPolynomial>(
            mj, [](const std::string& s) { return parse_pi_poly(s); }));
    size_t at = 0;
    for (const auto& lj : j["locals"]) {
        LocalDatum loc = local_from_json(lj, d.dimension);
        if (loc.exponential_part && at < d.points.size())
            loc.exponential_part->center = d.points[at];
        d.locals.push_back(std::move(loc));
        ++at;
    }
    if (j.contains("weights"))
        for (const auto& wj : j["weights"]) d.weights.push_back(wj.get<std::vector<long>>());
    if (j.contains("filtrations"))
        for (const auto& fj : j["filtrations"]) d.filtrations.push_back(filtration_from_json(fj));
    if (j.contains("declared_spectrum"))
        for (const auto& sj : j["declared_spectrum"])
            d.declared_spectrum.push_back(parse_cyclotomic(sj.get<std::string>()));
    d.formally_fuchsian = j.value("formally_fuchsian", false);
    return d;
}

struct SeriesFile {
    LaurentMatrix matrix;
    std::vector<long> k_diagonal;  // for the permutation lemma
    int top_rows = 0;              // for the block clearing lemma
};

inline SeriesFile series_from_json(const Json& j) {
    SeriesFile out;
    int root = j.value("root", 1);
    if (!j.contains("terms") || j["terms"].empty())
        fail(errc::parse_error, "series file needs a non-empty terms list");
    long lo = 0;
    bool first = true;
    for (const auto& t : j["terms"]) {
        long e = t.at("order").get<long>();
        lo = first ? e : std::min(lo, e);
        first = false;
    }
    long truncation = j.value("truncation", static_cast<long>(options::default_truncation));
    Mat<Cyclotomic> probe = io_detail::matrix_from_json<Cyclotomic>(
        j["terms"][0]["matrix"], [](const std::string& s) { return parse_cyclotomic(s); });
    out.matrix = LaurentMatrix(probe.rows(), probe.cols(), root, lo, lo + truncation);
    for (const auto& t : j["terms"]) {
        long e = t.at("order").get<long>();
        Mat<Cyclotomic> m = io_detail::matrix_from_json<Cyclotomic>(
            t["matrix"], [](const std::string& s) { return parse_cyclotomic(s); });
        if (e <= lo + truncation) out.matrix.add_term(e, m);
    }
    if (j.contains("k_diagonal")) out.k_diagonal = j["k_diagonal"].get<std::vector<long>>();
    out.top_rows = j.value("top_rows", 0);
    return out;
}

// Serialize as the list of (order, matrix) pairs.
inline Json series_to_json(const LaurentMatrix& m) {
    Json out;
    out["root"] = m.root_index();
    if (!m.exact()) out["truncation"] = m.hi() - m.lo();
    Json terms = Json::array();
    for (long e = m.lo(); e <= m.stored_top(); ++e) {
        Mat<Cyclotomic> c = m.coefficient(e);
        if (c.is_zero()) continue;
        Json t;
        t["order"] = e;
        t["matrix"] = io_detail::matrix_to_json(c, [](const Cyclotomic& x) {
            return scalar_string(x);
        });
        terms.push_back(std::move(t));
    }
    out["terms"] = std::move(terms);
    return out;
}

inline LocalGaloisStructure structure_from_json(const Json& j) {
    LocalGaloisStructure l;
    l.name = j.value("name", "structure");
    l.lattice_rank = j.value("lattice_rank", 1);
    l.order = j.value("order", 1);
    if (!j.contains("delta")) fail(errc::parse_error, "structure needs the delta matrix");
    {
        const Json& dj = j["delta"];
        size_t rows = dj.size(), cols = dj[0].size();
        Mat<Rational> m(rows, cols);
        for (size_t r = 0; r < rows; ++r)
            for (size_t c = 0; c < cols; ++c) m(r, c) = Rational(dj[r][c].get<long>());
        l.delta = m;
    }
    if (j.contains("weights"))
        for (const auto& w : j["weights"]) l.weights.push_back(w.get<std::vector<long>>());
    if (j.contains("roots"))
        for (const auto& r : j["roots"])
            l.roots.push_back({r.at("root").get<std::vector<long>>(), r.value("dim", 1)});
    l.formal_galois = j.value("formal_galois", false);
    l.connected = j.value("connected", false);
    return l;
}

inline GaloisFacts facts_from_json(const Json& j) {
    GaloisFacts f;
    f.dimension = j.value("dimension", 0);
    f.representation_irreducible = j.value("irreducible", false);
    f.representation_faithful = j.value("faithful", false);
    f.subgroups_generate = j.value("subgroups_generate", false);
    f.subgroups_connected = j.value("subgroups_connected", false);
    f.s_count = j.value("s", 0);
    f.sbar_count = j.value("sbar", 0);
    f.stable_pair_conditions = j.value("stable_pair_conditions", false);
    std::string rule = j.value("mu_rule", "conservative");
    f.mu_rule = rule == "iterative" ? MuRule::iterative : MuRule::conservative;
    if (j.contains("candidates"))
        for (const auto& c : j["candidates"]) {
            GaloisCandidateFacts cf;
            cf.name = c.value("name", "candidate");
            if (c.contains("structure")) cf.structure = structure_from_json(c["structure"]);
            if (c.contains("rank")) cf.declared_rank = c["rank"].get<long>();
            cf.in_minimal_family = c.value("in_minimal_family", false);
            f.candidates.push_back(std::move(cf));
        }
    return f;
}

}  // namespace grh
