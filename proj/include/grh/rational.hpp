#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "grh/errors.hpp"

namespace grh {

using Integer = boost::multiprecision::cpp_int;

// Always stored in lowest terms with a positive denominator; cpp_rational
// maintains that canonical form for us.
using Rational = boost::multiprecision::cpp_rational;

inline Integer num(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Integer den(const Rational& q) { return boost::multiprecision::denominator(q); }

inline bool is_integer(const Rational& q) { return den(q) == 1; }

// floor(a/b) for integers, rounding toward minus infinity.
inline Integer floor_div(const Integer& a, const Integer& b) {
    Integer q = a / b, r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) --q;
    return q;
}

inline Integer rfloor(const Rational& q) { return floor_div(num(q), den(q)); }
inline Integer rceil(const Rational& q) { return -floor_div(-num(q), den(q)); }

// Smallest integer >= q, as in the ceiling r = -[-s] of a fractional rank.
inline Integer ceil_rank(const Rational& s) { return rceil(s); }

inline int gcd_int(int a, int b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) {
        int t = a % b;
        a = b;
        b = t;
    }
    return a;
}

inline long lcm_long(long a, long b) {
    if (a == 0 || b == 0) return 0;
    return a / gcd_int(static_cast<int>(a), static_cast<int>(b)) * b;
}

inline std::string to_string(const Rational& q) {
    std::string s = num(q).str();
    if (den(q) != 1) s += "/" + den(q).str();
    return s;
}

// Accepts "p", "-p", "p/q" with optional whitespace around tokens.
inline Rational parse_rational(const std::string& text) {
    auto bad = [&]() { fail(errc::parse_error, "not a rational: '" + text + "'"); };
    std::string s;
    for (char c : text)
        if (!isspace(static_cast<unsigned char>(c))) s += c;
    if (!s.empty() && s[0] == '+') s = s.substr(1);
    if (s.empty()) bad();
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(Integer(s));
        Integer n(s.substr(0, slash)), d(s.substr(slash + 1));
        if (d == 0) bad();
        return Rational(n, d);
    } catch (const std::exception&) {
        bad();
    }
    return Rational();
}

}  // namespace grh
