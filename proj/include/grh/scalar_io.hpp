#pragma once

#include <string>
#include <vector>

#include "grh/complex_exact.hpp"
#include "grh/cyclotomic.hpp"
#include "grh/pi_poly.hpp"

namespace grh {

// Textual scalar syntax shared by every file format:
//   rationals        "p/q"
//   cyclotomics      "cyc(m)[c0,c1,...]"   (coefficients of 1, zeta, ...)
//   Pi-polynomials   "pi[a0,a1,...]"       (coefficients of 1, Pi, ...)
//   exact complex    "a+bi" / "a-bi"

inline std::string scalar_string(const Cyclotomic& c) {
    if (c.is_rational()) return to_string(c.rational_value());
    std::string s = "cyc(" + std::to_string(c.conductor()) + ")[";
    const auto& v = c.coefficients();
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += to_string(v[i]);
    }
    return s + "]";
}

inline std::string scalar_string(const PiPolynomial& p) {
    if (p.is_constant()) return scalar_string(p.constant_value());
    std::string s = "pi[";
    const auto& v = p.coefficients();
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += scalar_string(v[i]);
    }
    return s + "]";
}

inline std::string scalar_string(const ComplexExact& z) {
    if (z.im == 0) return to_string(z.re);
    std::string s = to_string(z.re);
    if (z.im < 0)
        s += "-" + to_string(-z.im) + "i";
    else
        s += "+" + to_string(z.im) + "i";
    return s;
}

namespace detail {

inline std::string strip_spaces(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!isspace(static_cast<unsigned char>(c))) s += c;
    return s;
}

// split on commas at bracket depth zero
inline std::vector<std::string> split_args(const std::string& body) {
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (char c : body) {
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (c == ',' && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty() || !parts.empty()) parts.push_back(cur);
    return parts;
}

}  // namespace detail

inline Cyclotomic parse_cyclotomic(const std::string& text) {
    std::string s = detail::strip_spaces(text);
    if (s.rfind("cyc(", 0) == 0) {
        auto close = s.find(')');
        if (close == std::string::npos || s.size() < close + 3 || s[close + 1] != '[' ||
            s.back() != ']')
            fail(errc::parse_error, "malformed cyclotomic: '" + text + "'");
        int m = 0;
        try {
            m = std::stoi(s.substr(4, close - 4));
        } catch (const std::exception&) {
            fail(errc::parse_error, "bad conductor in '" + text + "'");
        }
        if (m < 1) fail(errc::parse_error, "conductor must be positive in '" + text + "'");
        std::string body = s.substr(close + 2, s.size() - close - 3);
        std::vector<Rational> coeffs;
        if (!body.empty())
            for (const auto& part : detail::split_args(body)) coeffs.push_back(parse_rational(part));
        int phi = euler_phi(m);
        if (static_cast<int>(coeffs.size()) > phi)
            fail(errc::parse_error, "coefficient list longer than phi(" + std::to_string(m) +
                                        ") in '" + text + "'");
        coeffs.resize(static_cast<size_t>(phi), Rational(0));
        return Cyclotomic(m, std::move(coeffs));
    }
    return Cyclotomic(parse_rational(s));
}

inline PiPolynomial parse_pi_poly(const std::string& text) {
    std::string s = detail::strip_spaces(text);
    if (s.rfind("pi[", 0) == 0) {
        if (s.back() != ']') fail(errc::parse_error, "malformed pi polynomial: '" + text + "'");
        std::string body = s.substr(3, s.size() - 4);
        std::vector<Cyclotomic> coeffs;
        if (!body.empty())
            for (const auto& part : detail::split_args(body))
                coeffs.push_back(parse_cyclotomic(part));
        return PiPolynomial(std::move(coeffs));
    }
    return PiPolynomial(parse_cyclotomic(s));
}

inline ComplexExact parse_complex(const std::string& text) {
    std::string s = detail::strip_spaces(text);
    if (s.empty()) fail(errc::parse_error, "empty complex literal");
    if (s.back() == 'i') {
        std::string body = s.substr(0, s.size() - 1);
        // find the split sign separating real and imaginary parts: the last
        // + or - that is not a leading sign and not right after '/'
        size_t split = std::string::npos;
        for (size_t i = body.size(); i-- > 1;) {
            if ((body[i] == '+' || body[i] == '-') && body[i - 1] != '/') {
                split = i;
                break;
            }
        }
        if (split == std::string::npos) {
            // pure imaginary "bi", with "i" and "-i" meaning b = 1, -1
            if (body.empty() || body == "+") return ComplexExact(Rational(0), Rational(1));
            if (body == "-") return ComplexExact(Rational(0), Rational(-1));
            return ComplexExact(Rational(0), parse_rational(body));
        }
        Rational re = parse_rational(body.substr(0, split));
        std::string imtxt = body.substr(split);
        if (imtxt == "+") return ComplexExact(re, Rational(1));
        if (imtxt == "-") return ComplexExact(re, Rational(-1));
        return ComplexExact(re, parse_rational(imtxt));
    }
    return ComplexExact(parse_rational(s));
}

}  // namespace grh
