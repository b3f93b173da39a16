#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "grh/laurent.hpp"
#include "grh/reduction.hpp"

using namespace grh;

namespace {

Mat<Cyclotomic> cmat(std::initializer_list<std::initializer_list<long>> init) {
    Mat<Cyclotomic> m(init.size(), init.begin()->size());
    size_t i = 0;
    for (const auto& row : init) {
        size_t j = 0;
        for (long v : row) m(i, j++) = Cyclotomic(Rational(v));
        ++i;
    }
    return m;
}

// Verifies every contract of a Sauvage factorization against the input.
void check_sauvage(const LaurentMatrix& f, const SauvageResult& r) {
    LaurentMatrix lhs = r.gamma * f;
    LaurentMatrix rhs = LaurentMatrix::power_diagonal(r.k, f.root_index()) * r.f0;
    CHECK(equal_on_common_window(lhs, rhs));
    // gamma: polynomial in 1/sigma with constant determinant
    CHECK(r.gamma.exact());
    CHECK(r.gamma.stored_top() <= 0);
    LaurentMatrix det = laurent_det(r.gamma);
    CHECK(det.valuation());
    CHECK(*det.valuation() == 0);
    CHECK(det.entry(0, 0, 0) == Cyclotomic::one());
    // F0 invertible at order zero
    REQUIRE(r.f0.valuation());
    CHECK(*r.f0.valuation() == 0);
    CHECK_NOTHROW(inverse(r.f0.coefficient(0)));
    // conservation of the determinant valuation
    long sum = 0;
    for (long x : r.k) sum += x;
    CHECK(sum == det_valuation(f));
}

void check_permutation(const std::vector<long>& k, const LaurentMatrix& f,
                       const PermutationResult& r) {
    LaurentMatrix lhs = r.t * LaurentMatrix::power_diagonal(k, f.root_index()) * f;
    LaurentMatrix rhs = r.h * LaurentMatrix::power_diagonal(r.d, f.root_index());
    CHECK(equal_on_common_window(lhs, rhs));
    std::vector<long> a = k, b = r.d;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    REQUIRE(r.h.valuation());
    CHECK(*r.h.valuation() == 0);
    CHECK_NOTHROW(inverse(r.h.coefficient(0)));
    CHECK(r.t.exact());
    CHECK(r.t.stored_top() <= 0);
}

// Random Laurent polynomial matrix guaranteed invertible: a diagonal power
// shift times (constant invertible + sigma * polynomial).
LaurentMatrix random_invertible(std::mt19937& rng, size_t p, bool truncate) {
    std::uniform_int_distribution<long> val(-3, 3), coef(-3, 3);
    Mat<Cyclotomic> c(p, p);
    while (true) {
        for (size_t i = 0; i < p; ++i)
            for (size_t j = 0; j < p; ++j) c(i, j) = Cyclotomic(Rational(coef(rng)));
        if (!leibniz_det(c).is_zero()) break;
    }
    LaurentMatrix unit = LaurentMatrix::from_constant(c);
    for (int d = 1; d <= 3; ++d) {
        Mat<Cyclotomic> t(p, p);
        for (size_t i = 0; i < p; ++i)
            for (size_t j = 0; j < p; ++j) t(i, j) = Cyclotomic(Rational(coef(rng)));
        unit.add_term(d, t);
    }
    std::vector<long> shifts(p);
    for (auto& s : shifts) s = val(rng);
    LaurentMatrix f = LaurentMatrix::power_diagonal(shifts) * unit;
    if (truncate) f = f.truncated(f.lo() + 12);
    return f;
}

}  // namespace

TEST_CASE("sauvage reduction on the diagonal example") {
    LaurentMatrix f = LaurentMatrix::power_diagonal({-1, 0});
    SauvageResult r = sauvage_reduce(f);
    CHECK(r.k == std::vector<long>{-1, 0});
    CHECK(equal_on_common_window(r.gamma, LaurentMatrix::identity(2)));
    CHECK(equal_on_common_window(r.f0, LaurentMatrix::identity(2)));
    check_sauvage(f, r);
}

TEST_CASE("sauvage reduction clears a dependent leading row") {
    // F = [[1, s^-1], [1, 0]]
    LaurentMatrix f = LaurentMatrix::exact_zero(2, 2);
    f.add_term(-1, cmat({{0, 1}, {0, 0}}));
    f.add_term(0, cmat({{1, 0}, {1, 0}}));
    SauvageResult r = sauvage_reduce(f);
    check_sauvage(f, r);
    long sum = r.k[0] + r.k[1];
    CHECK(sum == -1);
}

TEST_CASE("sauvage reduction on random truncated matrices") {
    std::mt19937 rng(424242);
    for (int trial = 0; trial < 40; ++trial) {
        size_t p = 2 + trial % 2;
        LaurentMatrix f = random_invertible(rng, p, trial % 2 == 0);
        SauvageResult r = sauvage_reduce(f);
        check_sauvage(f, r);
    }
}

TEST_CASE("sauvage singular input is rejected") {
    LaurentMatrix f = LaurentMatrix::exact_zero(2, 2);
    f.add_term(0, cmat({{1, 1}, {1, 1}}));
    CHECK_THROWS_AS(sauvage_reduce(f), error);
}

TEST_CASE("permutation lemma trivial cases") {
    LaurentMatrix id = LaurentMatrix::identity(2);
    PermutationResult r = permutation_reduce({1, 0}, id);
    CHECK(r.d == std::vector<long>{1, 0});
    CHECK(equal_on_common_window(r.t, id));
    CHECK(equal_on_common_window(r.h, id));

    // K = 0 leaves any invertible matrix untouched
    LaurentMatrix f = LaurentMatrix::from_constant(cmat({{2, 1}, {1, 1}}));
    f.add_term(1, cmat({{0, 1}, {0, 0}}));
    PermutationResult rz = permutation_reduce({0, 0}, f);
    CHECK(rz.d == std::vector<long>{0, 0});
    CHECK(equal_on_common_window(rz.t, LaurentMatrix::identity(2)));
    CHECK(equal_on_common_window(rz.h, f));
}

TEST_CASE("permutation lemma on the 2x2 example") {
    LaurentMatrix f = LaurentMatrix::from_constant(cmat({{1, 0}, {1, 1}}));
    PermutationResult r = permutation_reduce({2, 0}, f);
    check_permutation({2, 0}, f, r);
}

TEST_CASE("permutation lemma on random inputs") {
    std::mt19937 rng(777);
    std::uniform_int_distribution<long> kv(-3, 3);
    std::uniform_int_distribution<long> coef(-3, 3);
    for (int trial = 0; trial < 30; ++trial) {
        size_t p = 2 + trial % 2;
        Mat<Cyclotomic> c(p, p);
        while (true) {
            for (size_t i = 0; i < p; ++i)
                for (size_t j = 0; j < p; ++j) c(i, j) = Cyclotomic(Rational(coef(rng)));
            bool unit_ok = true;
            try {
                (void)inverse(c);
            } catch (const error&) {
                unit_ok = false;
            }
            if (unit_ok) break;
        }
        LaurentMatrix f = LaurentMatrix::from_constant(c);
        for (int d = 1; d <= 2; ++d) {
            Mat<Cyclotomic> t(p, p);
            for (size_t i = 0; i < p; ++i)
                for (size_t j = 0; j < p; ++j) t(i, j) = Cyclotomic(Rational(coef(rng)));
            f.add_term(d, t);
        }
        f = f.truncated(12);
        std::vector<long> k(p);
        for (auto& x : k) x = kv(rng);
        PermutationResult r = permutation_reduce(k, f);
        check_permutation(k, f, r);
    }
}

TEST_CASE("round trip: sauvage then permutation on a shifted unit") {
    std::mt19937 rng(2025);
    std::uniform_int_distribution<long> coef(-2, 2);
    std::vector<long> k{2, -1, 0};
    Mat<Cyclotomic> c(3, 3);
    while (true) {
        for (size_t i = 0; i < 3; ++i)
            for (size_t j = 0; j < 3; ++j) c(i, j) = Cyclotomic(Rational(coef(rng)));
        if (!leibniz_det(c).is_zero()) break;
    }
    LaurentMatrix u = LaurentMatrix::from_constant(c);
    u.add_term(1, cmat({{1, 0, 0}, {0, 0, 1}, {0, 0, 0}}));
    std::vector<long> neg_k{-2, 1, 0};
    LaurentMatrix f = LaurentMatrix::power_diagonal(neg_k) * u;
    SauvageResult s = sauvage_reduce(f);
    check_sauvage(f, s);
    PermutationResult r = permutation_reduce(s.k, s.f0);
    check_permutation(s.k, s.f0, r);
    std::vector<long> want = neg_k, got = r.d;
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    CHECK(want == got);
}

TEST_CASE("block pole clearing") {
    SECTION("already holomorphic top") {
        LaurentMatrix top = LaurentMatrix::from_constant(cmat({{3, 1}}));
        LaurentMatrix bot = LaurentMatrix::identity(2);
        BlockClearResult r = block_holo_clear(top, bot);
        CHECK(equal_on_common_window(r.gamma, LaurentMatrix::identity(3)));
        CHECK(equal_on_common_window(r.top_clean, top));
    }
    SECTION("simple pole against scalar bottom") {
        LaurentMatrix top = LaurentMatrix::monomial(cmat({{1}}), -1);
        LaurentMatrix bot = LaurentMatrix::identity(1);
        BlockClearResult r = block_holo_clear(top, bot);
        CHECK(r.top_clean.valuation() == std::nullopt);  // exact zero
        LaurentMatrix lhs = r.gamma * stack_blocks(top, bot);
        CHECK(equal_on_common_window(lhs, stack_blocks(r.top_clean, bot)));
    }
    SECTION("double pole in a 1+2 stack") {
        LaurentMatrix top = LaurentMatrix::monomial(cmat({{1, 0}}), -2);
        LaurentMatrix bot = LaurentMatrix::identity(2);
        BlockClearResult r = block_holo_clear(top, bot);
        CHECK(r.top_clean.valuation() == std::nullopt);
        LaurentMatrix lhs = r.gamma * stack_blocks(top, bot);
        CHECK(equal_on_common_window(lhs, stack_blocks(r.top_clean, bot)));
    }
    SECTION("random stacks") {
        std::mt19937 rng(31415);
        std::uniform_int_distribution<long> coef(-3, 3);
        for (int trial = 0; trial < 25; ++trial) {
            size_t p2 = 1 + trial % 2, p1 = 1 + (trial / 2) % 2;
            Mat<Cyclotomic> c(p2, p2);
            while (true) {
                for (size_t i = 0; i < p2; ++i)
                    for (size_t j = 0; j < p2; ++j) c(i, j) = Cyclotomic(Rational(coef(rng)));
                if (!leibniz_det(c).is_zero()) break;
            }
            LaurentMatrix bot = LaurentMatrix::from_constant(c);
            bot.add_term(1, [&] {
                Mat<Cyclotomic> t(p2, p2);
                for (size_t i = 0; i < p2; ++i)
                    for (size_t j = 0; j < p2; ++j) t(i, j) = Cyclotomic(Rational(coef(rng)));
                return t;
            }());
            bot = bot.truncated(12);
            LaurentMatrix top(p1, p2, 1, -3, 12);
            for (long e = -3; e <= 2; ++e) {
                Mat<Cyclotomic> t(p1, p2);
                for (size_t i = 0; i < p1; ++i)
                    for (size_t j = 0; j < p2; ++j) t(i, j) = Cyclotomic(Rational(coef(rng)));
                top.add_term(e, t);
            }
            BlockClearResult r = block_holo_clear(top, bot);
            if (auto v = r.top_clean.valuation()) CHECK(*v >= 0);
            LaurentMatrix lhs = r.gamma * stack_blocks(top, bot);
            CHECK(equal_on_common_window(lhs, stack_blocks(r.top_clean, bot)));
        }
    }
}

TEST_CASE("truncation exhaustion is loud") {
    // all visible orders vanish: valuation undetectable
    LaurentMatrix f(2, 2, 1, 0, 3);
    CHECK_THROWS_AS(sauvage_reduce(f), error);
    try {
        sauvage_reduce(f);
    } catch (const error& e) {
        CHECK(e.code() == errc::singular_input);
    }
}
