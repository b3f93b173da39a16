#pragma once

#include "grh/cyclotomic.hpp"
#include "grh/rational.hpp"

namespace grh {

// Exact complex number with rational real and imaginary parts. Eigenvalue
// slots (the rho data) are restricted to this type so exp(2 pi i rho) stays
// inside the cyclotomic tower whenever it is needed.
struct ComplexExact {
    Rational re, im;

    ComplexExact() = default;
    ComplexExact(Rational r, Rational i = Rational(0)) : re(std::move(r)), im(std::move(i)) {}

    bool is_real() const { return im == 0; }
    bool is_zero() const { return re == 0 && im == 0; }
    bool is_integer() const { return im == 0 && grh::is_integer(re); }

    friend ComplexExact operator+(const ComplexExact& a, const ComplexExact& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend ComplexExact operator-(const ComplexExact& a, const ComplexExact& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend ComplexExact operator*(const ComplexExact& a, const ComplexExact& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    ComplexExact operator-() const { return {-re, -im}; }
    friend bool operator==(const ComplexExact& a, const ComplexExact& b) {
        return a.re == b.re && a.im == b.im;
    }
    friend bool operator!=(const ComplexExact& a, const ComplexExact& b) { return !(a == b); }

    ComplexExact& operator+=(const ComplexExact& o) { return *this = *this + o; }
};

// exp(2 pi i rho) for rational real rho as an exact root of unity times 1.
// Nonreal rho leaves the tower (it would contribute e^{-2 pi Im rho}).
inline Cyclotomic exp_two_pi_i(const ComplexExact& rho) {
    if (rho.im != 0)
        fail(errc::unsupported_eigenvalue,
             "exp(2 pi i rho) with Im(rho) != 0 is outside the cyclotomic tower");
    Integer d = den(rho.re), n = num(rho.re);
    if (d > options::max_conductor)
        fail(errc::conductor_limit, "eigenvalue denominator exceeds conductor limit");
    long dl = d.convert_to<long>();
    long nl = (n % d).convert_to<long>();
    return Cyclotomic::root_of_unity(static_cast<int>(dl), nl);
}

}  // namespace grh
