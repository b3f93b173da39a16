#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "grh/formal_local.hpp"
#include "grh/rays.hpp"
#include "ray_oracle.hpp"

using grh_test::circ_dist;
using grh_test::oracle_decay_angles;
using grh_test::to_double;

using namespace grh;

namespace {

Cyclotomic cy(long n) { return Cyclotomic(Rational(n)); }
Cyclotomic cyq(long n, long d) { return Cyclotomic(Rational(n, d)); }

Superblock simple_block(std::vector<Cyclotomic> q, ComplexExact rho = ComplexExact(Rational(0)),
                        int p = 1, int s = 1) {
    Superblock b;
    b.ramification = p;
    b.multiplicity = s;
    b.q = std::move(q);
    b.jordan = {{rho, s}};
    return b;
}

double theta_mid(const RayAngle& a) {
    RInterval t = a.theta(96);
    return to_double((t.lo + t.hi) / 2);
}

LocalDatum irregular_datum(std::vector<Superblock> blocks,
                           std::vector<Mat<Cyclotomic>> stokes = {}) {
    LocalDatum d;
    ExponentialPart part;
    part.center = SpherePoint::at(ComplexExact(Rational(0)));
    part.blocks = std::move(blocks);
    d.dimension = part.dimension();
    bool ram = false;
    for (const auto& b : part.blocks) ram = ram || b.ramification > 1;
    d.kind = ram ? LocalKind::irregular_ramified : LocalKind::irregular_unramified;
    d.rank = static_cast<int>(ceil_rank(katz_rank(part)).convert_to<long>());
    d.exponential_part = std::move(part);
    d.stokes = std::move(stokes);
    return d;
}



}  // namespace

TEST_CASE("katz and true rank") {
    SECTION("half-integer degree") {
        // q = t^3 with t = (z-a)^{-1/2}
        ExponentialPart part;
        part.blocks = {simple_block({cy(0), cy(0), cy(0), cy(1)}, ComplexExact(Rational(0)), 2)};
        CHECK(katz_rank(part) == Rational(3, 2));
        CHECK(true_rank(part) == 2);
    }
    SECTION("plain pole") {
        ExponentialPart part;
        part.blocks = {simple_block({cy(0), cy(1)})};
        CHECK(katz_rank(part) == Rational(1));
        CHECK(true_rank(part) == 1);
    }
    SECTION("max rule over blocks") {
        ExponentialPart part;
        part.blocks = {simple_block({cy(0), cy(0), cy(1)}), simple_block({cy(0), cy(1)})};
        CHECK(katz_rank(part) == Rational(2));
    }
}

TEST_CASE("formal monodromy of basic data") {
    SECTION("trivial") {
        LocalDatum d = irregular_datum({simple_block({cy(0), cy(1)})});
        Mat<PiPolynomial> g = formal_monodromy(d);
        CHECK(g.is_identity());
    }
    SECTION("eigenvalue one third") {
        LocalDatum d = irregular_datum({simple_block({cy(0), cy(1)}, ComplexExact(Rational(1, 3)))});
        Mat<PiPolynomial> g = formal_monodromy(d);
        CHECK(g(0, 0) == PiPolynomial(Cyclotomic::root_of_unity(3)));
    }
    SECTION("ramified superblock gives the swap") {
        LocalDatum d = irregular_datum({simple_block({cy(0), cy(1)}, ComplexExact(Rational(0)), 2)});
        Mat<PiPolynomial> g = formal_monodromy(d);
        REQUIRE(g.rows() == 2);
        CHECK(g(0, 0).is_zero());
        CHECK(g(1, 1).is_zero());
        CHECK(g(0, 1) == PiPolynomial::one());
        CHECK(g(1, 0) == PiPolynomial::one());
    }
    SECTION("unipotent part contributes Pi monomials") {
        LocalDatum d;
        d.kind = LocalKind::regular_singular;
        d.dimension = 2;
        Mat<ComplexExact> e(2, 2);
        e(0, 1) = ComplexExact(Rational(1));
        d.exponent_matrix = e;
        Mat<PiPolynomial> g = formal_monodromy(d);
        CHECK(g(0, 0) == PiPolynomial::one());
        CHECK(g(0, 1) == PiPolynomial::pi_power(1));
    }
    SECTION("determinant equals exp of the trace") {
        LocalDatum d = irregular_datum(
            {simple_block({cy(0), cy(1)}, ComplexExact(Rational(1, 4))),
             simple_block({cy(0), cy(2)}, ComplexExact(Rational(1, 3)))});
        Mat<PiPolynomial> g = formal_monodromy(d);
        PiPolynomial det = leibniz_det(g);
        ComplexExact tr = d.exponent_trace();
        CHECK(det == PiPolynomial(exp_two_pi_i(tr)));
    }
}

TEST_CASE("singular rays of simple exponential parts") {
    SECTION("two opposite rays") {
        ExponentialPart part;
        part.blocks = {simple_block({cy(0), cy(1)}), simple_block({cy(0)})};
        auto rays = singular_rays(part);
        REQUIRE(rays.size() == 2);
        REQUIRE(rays[0].angle.exact_t.has_value());
        CHECK(rays[0].angle.exact_t == Rational(0));
        CHECK(rays[0].pairs == std::vector<std::pair<int, int>>{{1, 0}});
        CHECK(rays[1].angle.exact_t == Rational(1));
        CHECK(rays[1].pairs == std::vector<std::pair<int, int>>{{0, 1}});
    }
    SECTION("degree two gives four rays") {
        ExponentialPart part;
        part.blocks = {simple_block({cy(0), cy(0), cy(1)}), simple_block({cy(0)})};
        auto rays = singular_rays(part);
        REQUIRE(rays.size() == 4);
        std::vector<Rational> ts;
        for (const auto& r : rays) {
            REQUIRE(r.angle.exact_t.has_value());
            ts.push_back(*r.angle.exact_t);
        }
        CHECK(ts == std::vector<Rational>{Rational(0), Rational(1, 2), Rational(1),
                                          Rational(3, 2)});
    }
    SECTION("scalar part has no rays") {
        ExponentialPart part;
        part.blocks = {simple_block({cy(0), cy(3)}, ComplexExact(Rational(0)), 1, 2)};
        CHECK(singular_rays(part).empty());
    }
}

TEST_CASE("ray oracle on random unramified parts") {
    std::mt19937 rng(5150);
    std::uniform_int_distribution<int> dim_d(2, 3), deg_d(1, 3), coef_d(-4, 4);
    for (int trial = 0; trial < 12; ++trial) {
        int p = dim_d(rng);
        ExponentialPart part;
        for (int i = 0; i < p; ++i) {
            int deg = deg_d(rng);
            std::vector<Cyclotomic> q(static_cast<size_t>(deg) + 1);
            for (int e = 1; e <= deg; ++e) {
                q[static_cast<size_t>(e)] = cy(coef_d(rng));
                if (trial % 3 == 0 && e == deg)
                    q[static_cast<size_t>(e)] += Cyclotomic::root_of_unity(4) * cyq(1, 2);
            }
            // keep the leading term nonzero
            if (q[static_cast<size_t>(deg)].is_zero()) q[static_cast<size_t>(deg)] = cy(1);
            part.blocks.push_back(simple_block(std::move(q)));
        }
        auto positions = expand(part);
        auto rays = singular_rays(part);
        for (int k = 0; k < p; ++k)
            for (int l = 0; l < p; ++l) {
                if (k == l) continue;
                std::vector<Cyclotomic> diff = positions[k].q_u;
                const auto& ql = positions[l].q_u;
                if (diff.size() < ql.size()) diff.resize(ql.size());
                for (size_t e = 0; e < ql.size(); ++e) diff[e] -= ql[e];
                int d = 0;
                for (int e = static_cast<int>(diff.size()) - 1; e >= 1; --e)
                    if (!diff[e].is_zero()) {
                        d = e;
                        break;
                    }
                if (d == 0) continue;
                std::vector<double> expected = oracle_decay_angles(diff);
                std::vector<double> got;
                for (const auto& ray : rays)
                    for (const auto& pr : ray.pairs)
                        if (pr == std::make_pair(k, l)) got.push_back(theta_mid(ray.angle));
                std::sort(got.begin(), got.end());
                REQUIRE(got.size() == static_cast<size_t>(d));  // ray count equals the degree
                REQUIRE(expected.size() == got.size());
                for (size_t i = 0; i < got.size(); ++i)
                    CHECK(circ_dist(got[i], expected[i]) < 1e-6);
            }
    }
}

TEST_CASE("opposite pairs shift rays by pi over the degree") {
    ExponentialPart part;
    part.blocks = {simple_block({cy(0), cy(2), cy(3)}),
                   simple_block({cy(0), cy(-1), cy(0)})};
    auto rays = singular_rays(part);
    std::vector<double> fwd, bwd;
    for (const auto& r : rays)
        for (const auto& pr : r.pairs) {
            if (pr == std::make_pair(0, 1)) fwd.push_back(theta_mid(r.angle));
            if (pr == std::make_pair(1, 0)) bwd.push_back(theta_mid(r.angle));
        }
    REQUIRE(fwd.size() == 2);
    REQUIRE(bwd.size() == 2);
    for (double th : fwd) {
        double shifted = std::fmod(th + M_PI / 2, 2 * M_PI);
        bool found = false;
        for (double other : bwd) found = found || circ_dist(shifted, other) < 1e-9;
        CHECK(found);
    }
}

TEST_CASE("validate_local accepts the one-dimensional pole") {
    // q = -1/z, rho = 0, no rays from a single exponential
    LocalDatum d = irregular_datum({simple_block({cy(0), cy(-1)})});
    CHECK(validate_local(d).valid());
}

TEST_CASE("validate_local flags the normalization and rank laws") {
    SECTION("rho out of range") {
        LocalDatum d = irregular_datum(
            {simple_block({cy(0), cy(1)}, ComplexExact(Rational(3, 2))),
             simple_block({cy(0)})});
        ValidationReport r = validate_local(d);
        CHECK(r.has("rho_normalization"));
    }
    SECTION("declared rank differs from the forced ceiling") {
        LocalDatum d = irregular_datum(
            {simple_block({cy(0), cy(0), cy(0), cy(1)}, ComplexExact(Rational(0)), 2)});
        d.rank = 1;  // fractional degree 3/2 forces 2
        ValidationReport r = validate_local(d);
        CHECK(r.has("rank_mismatch"));
    }
    SECTION("constant term in q") {
        LocalDatum d = irregular_datum({simple_block({cy(1), cy(1)}), simple_block({cy(0)})});
        ValidationReport r = validate_local(d);
        CHECK(r.has("q_constant_term"));
    }
}

TEST_CASE("validate_local checks stokes support and unipotence") {
    // q1 = 1/z, q2 = 0: rays at 0 (pair (1,0)) and pi (pair (0,1))
    auto make = [&](Mat<Cyclotomic> c0, Mat<Cyclotomic> c1) {
        return irregular_datum({simple_block({cy(0), cy(1)}), simple_block({cy(0)})},
                               {std::move(c0), std::move(c1)});
    };
    Mat<Cyclotomic> lower = Mat<Cyclotomic>::identity(2);
    lower(1, 0) = cy(3);
    Mat<Cyclotomic> upper = Mat<Cyclotomic>::identity(2);
    upper(0, 1) = cy(-2);

    CHECK(validate_local(make(lower, upper)).valid());

    SECTION("support violation") {
        ValidationReport r = validate_local(make(upper, lower));
        CHECK(r.has("stokes_support"));
    }
    SECTION("count violation") {
        LocalDatum d = irregular_datum({simple_block({cy(0), cy(1)}), simple_block({cy(0)})},
                                       {lower});
        CHECK(validate_local(d).has("stokes_count"));
    }
    SECTION("non-unipotent diagonal") {
        Mat<Cyclotomic> bad = lower;
        bad(0, 0) = cy(2);
        ValidationReport r = validate_local(make(bad, upper));
        CHECK((r.has("stokes_unipotent") || r.has("stokes_support")));
    }
    SECTION("divergence needs a nontrivial stokes matrix") {
        LocalDatum d = make(Mat<Cyclotomic>::identity(2), Mat<Cyclotomic>::identity(2));
        d.divergent = true;
        CHECK(validate_local(d).has("divergence_unsupported"));
    }
}

TEST_CASE("cyclic relation") {
    LocalDatum d = irregular_datum({simple_block({cy(0), cy(1)}), simple_block({cy(0)})});
    Mat<Cyclotomic> c0 = Mat<Cyclotomic>::identity(2);
    c0(1, 0) = cy(1);
    Mat<Cyclotomic> c1 = Mat<Cyclotomic>::identity(2);
    c1(0, 1) = cy(1);
    d.stokes = {c0, c1};

    auto to_pi = [](const Mat<Cyclotomic>& m) {
        return m.map<PiPolynomial>([](const Cyclotomic& x) { return PiPolynomial(x); });
    };
    Mat<PiPolynomial> g = to_pi(c0) * to_pi(c1);  // formal monodromy is I
    CyclicCheck ok = validate_cyclic(d, g);
    CHECK(ok.holds);

    CyclicCheck bad = validate_cyclic(d, Mat<PiPolynomial>::identity(2));
    CHECK(!bad.holds);
    CHECK(bad.row >= 0);
}

TEST_CASE("validate_datum global laws") {
    // two fuchsian points with inverse monodromies
    Mat<PiPolynomial> m = Mat<PiPolynomial>::identity(2);
    m(0, 1) = PiPolynomial(cy(2));
    Mat<PiPolynomial> minv = Mat<PiPolynomial>::identity(2);
    minv(0, 1) = PiPolynomial(cy(-2));

    ReducedDatum d;
    d.dimension = 2;
    d.base_point = SpherePoint::at(ComplexExact(Rational(1), Rational(1)));
    d.points = {SpherePoint::at(ComplexExact(Rational(0))), SpherePoint::infinity()};
    d.monodromy = {m, minv};
    LocalDatum f;
    f.kind = LocalKind::fuchsian;
    f.dimension = 2;
    d.locals = {f, f};
    CHECK(validate_datum(d).valid());

    SECTION("broken product relation") {
        ReducedDatum bad = d;
        bad.monodromy[1] = m;
        CHECK(validate_datum(bad).has("global_relation"));
    }
    SECTION("coincident points") {
        ReducedDatum bad = d;
        bad.points[1] = bad.points[0];
        CHECK(validate_datum(bad).has("points_distinct"));
    }
    SECTION("non-integer exponent traces") {
        ReducedDatum bad = d;
        Mat<ComplexExact> e(2, 2);
        e(0, 0) = ComplexExact(Rational(1, 2));
        bad.locals[0].exponent_matrix = e;
        bad.monodromy = {Mat<PiPolynomial>::identity(2), Mat<PiPolynomial>::identity(2)};
        // exp(2 pi i E) = diag(-1, 1) != I, so fix the monodromy to match
        Mat<PiPolynomial> g0(2, 2);
        g0(0, 0) = PiPolynomial(cy(-1));
        g0(1, 1) = PiPolynomial::one();
        bad.monodromy[0] = g0;
        Mat<PiPolynomial> g1(2, 2);
        g1(0, 0) = PiPolynomial(cy(-1));
        g1(1, 1) = PiPolynomial::one();
        bad.monodromy[1] = g1;
        ValidationReport r = validate_datum(bad);
        CHECK(r.has("degree_integrality"));
    }
}
