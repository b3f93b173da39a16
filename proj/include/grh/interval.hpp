#pragma once

#include <array>
#include <map>
#include <shared_mutex>
#include <utility>
#include <vector>

#include "grh/cyclotomic.hpp"
#include "grh/rational.hpp"

namespace grh {

// Rounds q outward to a dyadic rational with denominator 2^bits, so interval
// endpoints never accumulate huge denominators.
inline Rational dyadic_down(const Rational& q, int bits) {
    Integer scaled = floor_div(num(q) << bits, den(q));
    return Rational(scaled, Integer(1) << bits);
}

inline Rational dyadic_up(const Rational& q, int bits) {
    Integer scaled = -floor_div(-(num(q) << bits), den(q));
    return Rational(scaled, Integer(1) << bits);
}

// A closed interval with exact rational endpoints certified to contain the
// true value.
struct RInterval {
    Rational lo, hi;

    static RInterval exact(const Rational& q) { return {q, q}; }
    static RInterval bounds(const Rational& a, const Rational& b) { return {a, b}; }

    Rational width() const { return hi - lo; }
    bool contains_zero() const { return lo <= 0 && 0 <= hi; }
    bool is_positive() const { return lo > 0; }
    bool is_negative() const { return hi < 0; }
    bool contains(const Rational& q) const { return lo <= q && q <= hi; }

    RInterval rounded(int bits) const { return {dyadic_down(lo, bits), dyadic_up(hi, bits)}; }

    friend RInterval operator+(const RInterval& a, const RInterval& b) {
        return {a.lo + b.lo, a.hi + b.hi};
    }
    friend RInterval operator-(const RInterval& a, const RInterval& b) {
        return {a.lo - b.hi, a.hi - b.lo};
    }
    RInterval operator-() const { return {-hi, -lo}; }

    friend RInterval operator*(const RInterval& a, const RInterval& b) {
        Rational p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
        Rational lo = std::min(std::min(p1, p2), std::min(p3, p4));
        Rational hi = std::max(std::max(p1, p2), std::max(p3, p4));
        return {lo, hi};
    }

    friend RInterval operator*(const Rational& c, const RInterval& a) {
        if (c >= 0) return {c * a.lo, c * a.hi};
        return {c * a.hi, c * a.lo};
    }

    friend bool overlap(const RInterval& a, const RInterval& b) {
        return a.lo <= b.hi && b.lo <= a.hi;
    }
};

// Axis-aligned box around a complex value.
struct CInterval {
    RInterval re, im;

    static CInterval exact(const Rational& x, const Rational& y) {
        return {RInterval::exact(x), RInterval::exact(y)};
    }

    Rational width() const { return std::max(re.width(), im.width()); }
    bool contains_zero() const { return re.contains_zero() && im.contains_zero(); }

    CInterval rounded(int bits) const { return {re.rounded(bits), im.rounded(bits)}; }

    friend CInterval operator+(const CInterval& a, const CInterval& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend CInterval operator-(const CInterval& a, const CInterval& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend CInterval operator*(const CInterval& a, const CInterval& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    CInterval operator-() const { return {-re, -im}; }
    CInterval conj() const { return {re, -im}; }
};

namespace detail {

// arctan(x) for |x| <= 1/2 by its alternating Taylor series. Terms decrease
// monotonically there, so consecutive partial sums bracket the limit.
inline RInterval arctan_small(const Rational& x, int bits) {
    Rational eps(Integer(1), Integer(1) << (bits + 4));
    Rational x2 = x * x, term = x, sum = 0;
    long k = 0;
    while (true) {
        Rational contrib = term / Rational(2 * k + 1);
        Rational mag = contrib < 0 ? -contrib : contrib;
        if (mag < eps) {
            RInterval r{sum - mag, sum + mag};
            return r.rounded(bits + 2);
        }
        sum += (k % 2 == 0) ? contrib : -contrib;
        term *= x2;
        ++k;
    }
}

inline const RInterval& pi_interval(int bits) {
    static std::map<int, RInterval> cache;
    static std::shared_mutex mtx;
    {
        std::shared_lock lock(mtx);
        auto it = cache.find(bits);
        if (it != cache.end()) return it->second;
    }
    // Machin: pi = 16 arctan(1/5) - 4 arctan(1/239).
    RInterval a = arctan_small(Rational(1, 5), bits + 8);
    RInterval b = arctan_small(Rational(1, 239), bits + 8);
    RInterval pi = (Rational(16) * a - Rational(4) * b).rounded(bits);
    std::unique_lock lock(mtx);
    return cache.emplace(bits, pi).first->second;
}

// cos/sin of a small interval argument (|phi| <= 1/2) with an explicit tail
// bound added after N terms.
inline std::pair<RInterval, RInterval> cos_sin_small(const RInterval& phi, int bits) {
    int terms = bits / 2 + 8;
    RInterval phi2 = phi * phi;
    RInterval c = RInterval::exact(1), s = phi;
    RInterval cpow = RInterval::exact(1), spow = phi;
    Rational cfact = 1, sfact = 1;
    for (int k = 1; k <= terms; ++k) {
        cpow = (cpow * phi2).rounded(bits + 8);
        cfact *= Rational((2 * k - 1) * 2 * k);
        c = c + Rational((k % 2) ? -1 : 1) / cfact * cpow;
        spow = (spow * phi2).rounded(bits + 8);
        sfact *= Rational(2 * k * (2 * k + 1));
        s = s + Rational((k % 2) ? -1 : 1) / sfact * spow;
        c = c.rounded(bits + 8);
        s = s.rounded(bits + 8);
    }
    // |tail| <= 2 * |phi|^(2 terms + 1) / (2 terms + 1)! <= 2^-(2 terms)
    Rational tail(Integer(1), Integer(1) << (2 * terms - 1));
    RInterval pad{-tail, tail};
    return {(c + pad).rounded(bits), (s + pad).rounded(bits)};
}

// e^{i t} for an interval argument by range reduction and squaring.
inline CInterval unit_exp(RInterval t, int bits) {
    int halvings = 0;
    Rational bound = std::max(t.hi < 0 ? -t.hi : t.hi, t.lo < 0 ? -t.lo : t.lo);
    while (bound > Rational(1, 2)) {
        bound /= 2;
        ++halvings;
    }
    int work = bits + 2 * halvings + 16;
    RInterval phi = Rational(1, Integer(1) << halvings) * t;
    auto [c, s] = cos_sin_small(phi, work);
    CInterval z{c, s};
    for (int i = 0; i < halvings; ++i) z = (z * z).rounded(work);
    return z.rounded(bits);
}

// e^{2 pi i k / m}, cached per (m, k, bits).
inline CInterval unit_root_interval(int m, long k, int bits) {
    static std::map<std::tuple<int, long, int>, CInterval> cache;
    static std::shared_mutex mtx;
    k = ((k % m) + m) % m;
    if (k == 0) return CInterval::exact(1, 0);
    if (2 * k == m) return CInterval::exact(-1, 0);
    if (4 * k == m) return CInterval::exact(0, 1);
    if (4 * k == 3 * m) return CInterval::exact(0, -1);
    {
        std::shared_lock lock(mtx);
        auto it = cache.find({m, k, bits});
        if (it != cache.end()) return it->second;
    }
    CInterval z = unit_exp(Rational(2 * k, m) * pi_interval(bits + 16), bits);
    std::unique_lock lock(mtx);
    return cache.emplace(std::make_tuple(m, k, bits), z).first->second;
}

// Power table of e^{2 pi i j/m} with endpoints integerized at scale 2^bits,
// so the embedding accumulates in plain integer arithmetic.
inline const std::vector<std::array<Integer, 4>>& unit_root_fixed_table(int m, int bits) {
    static std::map<std::pair<int, int>, std::vector<std::array<Integer, 4>>> cache;
    static std::shared_mutex mtx;
    {
        std::shared_lock lock(mtx);
        auto it = cache.find({m, bits});
        if (it != cache.end()) return it->second;
    }
    std::vector<std::array<Integer, 4>> table(static_cast<size_t>(euler_phi(m)));
    Integer scale = Integer(1) << bits;
    for (size_t j = 0; j < table.size(); ++j) {
        CInterval z = unit_root_interval(m, static_cast<long>(j), bits + 4);
        table[j] = {floor_div(num(z.re.lo) << bits, den(z.re.lo)),
                    -floor_div(-(num(z.re.hi) << bits), den(z.re.hi)),
                    floor_div(num(z.im.lo) << bits, den(z.im.lo)),
                    -floor_div(-(num(z.im.hi) << bits), den(z.im.hi))};
    }
    std::unique_lock lock(mtx);
    return cache.emplace(std::make_pair(m, bits), std::move(table)).first->second;
}

}  // namespace detail

// Certified box around the canonical complex value (zeta_m -> e^{2 pi i/m}).
inline CInterval embed_at_bits(const Cyclotomic& a, int bits) {
    if (a.is_rational()) return CInterval::exact(a.rational_value(), 0);
    const auto& c = a.coefficients();
    const int work = bits + 8;
    const auto& table = detail::unit_root_fixed_table(a.conductor(), work);
    Integer denl = 1;
    for (const auto& x : c)
        if (x != 0) denl = denl / boost::multiprecision::gcd(denl, den(x)) * den(x);
    Integer re_lo = 0, re_hi = 0, im_lo = 0, im_hi = 0;
    for (size_t j = 0; j < c.size(); ++j) {
        if (c[j] == 0) continue;
        Integer p = num(c[j]) * (denl / den(c[j]));
        const auto& [zrl, zrh, zil, zih] = table[j];
        if (p >= 0) {
            re_lo += p * zrl;
            re_hi += p * zrh;
            im_lo += p * zil;
            im_hi += p * zih;
        } else {
            re_lo += p * zrh;
            re_hi += p * zrl;
            im_lo += p * zih;
            im_hi += p * zil;
        }
    }
    Integer scale = denl << work;
    CInterval out{{Rational(re_lo, scale), Rational(re_hi, scale)},
                  {Rational(im_lo, scale), Rational(im_hi, scale)}};
    return out.rounded(bits);
}

inline CInterval embed(const Cyclotomic& a, const Rational& target_width) {
    if (target_width <= 0) fail(errc::parse_error, "embed target width must be positive");
    if (a.is_rational()) return CInterval::exact(a.rational_value(), 0);
    for (int bits = 64;; bits *= 2) {
        CInterval box = embed_at_bits(a, bits);
        if (box.width() <= target_width) return box;
        if (bits > (1 << 22)) fail(errc::internal, "embed failed to converge");
    }
}

enum class Sign { negative = -1, zero = 0, positive = 1 };

// Exact: a symbolic zero test on a + conj(a) first, then interval refinement
// of the real part until it excludes zero.
inline Sign sign_of_real(const Cyclotomic& a) {
    Cyclotomic twice_re = a + a.conj();
    if (twice_re.is_zero()) return Sign::zero;
    if (twice_re.is_rational())
        return twice_re.rational_value() > 0 ? Sign::positive : Sign::negative;
    for (int bits = 64;; bits *= 2) {
        RInterval r = embed_at_bits(twice_re, bits).re;
        if (r.is_positive()) return Sign::positive;
        if (r.is_negative()) return Sign::negative;
        if (bits > (1 << 22)) fail(errc::internal, "sign refinement failed to converge");
    }
}

inline Sign sign_of_imag(const Cyclotomic& a) {
    // Re(-i a) = Im(a)
    return sign_of_real(Cyclotomic::root_of_unity(4, 3) * a);
}

inline bool is_real(const Cyclotomic& a) { return a == a.conj(); }

}  // namespace grh
