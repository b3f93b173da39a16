#pragma once

#include <vector>

#include "grh/cyclotomic.hpp"
#include "grh/interval.hpp"

namespace grh {

// Polynomial in the symbol Pi = 2*pi*i with cyclotomic coefficients. Pi is
// treated as a free transcendental, so equality is coefficient-wise; that is
// sound for identities (a polynomial identity implies the numeric one) and
// the numeric cross-check lives in evaluate().
class PiPolynomial {
  public:
    PiPolynomial() = default;
    explicit PiPolynomial(Cyclotomic constant) {
        if (!constant.is_zero()) c_.push_back(std::move(constant));
    }
    explicit PiPolynomial(const Rational& r) : PiPolynomial(Cyclotomic(r)) {}

    static PiPolynomial pi_power(int k, Cyclotomic coeff = Cyclotomic::one()) {
        PiPolynomial p;
        if (coeff.is_zero()) return p;
        p.c_.assign(static_cast<size_t>(k) + 1, Cyclotomic::zero());
        p.c_[static_cast<size_t>(k)] = std::move(coeff);
        return p;
    }

    static PiPolynomial zero() { return PiPolynomial(); }
    static PiPolynomial one() { return PiPolynomial(Cyclotomic::one()); }

    explicit PiPolynomial(std::vector<Cyclotomic> coeffs) : c_(std::move(coeffs)) { trim(); }

    const std::vector<Cyclotomic>& coefficients() const { return c_; }
    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }

    bool is_constant() const { return c_.size() <= 1; }
    Cyclotomic constant_value() const { return c_.empty() ? Cyclotomic::zero() : c_[0]; }

    friend PiPolynomial operator+(const PiPolynomial& a, const PiPolynomial& b) {
        PiPolynomial r;
        r.c_.resize(std::max(a.c_.size(), b.c_.size()), Cyclotomic::zero());
        for (size_t i = 0; i < a.c_.size(); ++i) r.c_[i] += a.c_[i];
        for (size_t i = 0; i < b.c_.size(); ++i) r.c_[i] += b.c_[i];
        r.trim();
        return r;
    }

    friend PiPolynomial operator-(const PiPolynomial& a, const PiPolynomial& b) {
        return a + (-b);
    }

    PiPolynomial operator-() const {
        PiPolynomial r = *this;
        for (auto& x : r.c_) x = -x;
        return r;
    }

    friend PiPolynomial operator*(const PiPolynomial& a, const PiPolynomial& b) {
        if (a.is_zero() || b.is_zero()) return {};
        PiPolynomial r;
        r.c_.assign(a.c_.size() + b.c_.size() - 1, Cyclotomic::zero());
        for (size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i].is_zero()) continue;
            for (size_t j = 0; j < b.c_.size(); ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
        }
        r.trim();
        return r;
    }

    PiPolynomial& operator+=(const PiPolynomial& o) { return *this = *this + o; }
    PiPolynomial& operator-=(const PiPolynomial& o) { return *this = *this - o; }
    PiPolynomial& operator*=(const PiPolynomial& o) { return *this = *this * o; }

    friend bool operator==(const PiPolynomial& a, const PiPolynomial& b) {
        if (a.c_.size() != b.c_.size()) return false;
        for (size_t i = 0; i < a.c_.size(); ++i)
            if (a.c_[i] != b.c_[i]) return false;
        return true;
    }
    friend bool operator!=(const PiPolynomial& a, const PiPolynomial& b) { return !(a == b); }

    // Numeric value at Pi = 2*pi*i, certified.
    CInterval evaluate(int bits) const {
        CInterval pi2{RInterval::exact(0), Rational(2) * detail::pi_interval(bits + 16)};
        CInterval acc = CInterval::exact(0, 0);
        for (size_t i = c_.size(); i-- > 0;) {
            acc = (acc * pi2 + embed_at_bits(c_[i], bits + 16)).rounded(bits + 16);
        }
        return acc.rounded(bits);
    }

  private:
    void trim() {
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }

    std::vector<Cyclotomic> c_;
};

namespace detail {

inline PiPolynomial poly_scale(const PiPolynomial& p, const Cyclotomic& c) {
    std::vector<Cyclotomic> out = p.coefficients();
    for (auto& x : out) x *= c;
    return PiPolynomial(std::move(out));
}

inline std::pair<PiPolynomial, PiPolynomial> poly_divmod(const PiPolynomial& a,
                                                         const PiPolynomial& b) {
    if (b.is_zero()) fail(errc::division_by_zero, "polynomial division by zero");
    std::vector<Cyclotomic> rem = a.coefficients();
    const auto& bc = b.coefficients();
    Cyclotomic lead_inv = bc.back().inv();
    std::vector<Cyclotomic> quot;
    if (rem.size() >= bc.size()) quot.assign(rem.size() - bc.size() + 1, Cyclotomic::zero());
    while (rem.size() >= bc.size()) {
        Cyclotomic c = rem.back() * lead_inv;
        size_t shift = rem.size() - bc.size();
        quot[shift] = c;
        for (size_t j = 0; j < bc.size(); ++j) rem[shift + j] -= c * bc[j];
        while (!rem.empty() && rem.back().is_zero()) rem.pop_back();
        if (!rem.empty() && rem.size() >= bc.size() && rem.back().is_zero())
            fail(errc::internal, "divmod failed to shrink");
    }
    return {PiPolynomial(std::move(quot)), PiPolynomial(std::move(rem))};
}

inline PiPolynomial poly_gcd(PiPolynomial a, PiPolynomial b) {
    while (!b.is_zero()) {
        auto [q, r] = poly_divmod(a, b);
        (void)q;
        a = std::move(b);
        b = std::move(r);
    }
    if (a.is_zero()) return a;
    // monic normalization
    return poly_scale(a, a.coefficients().back().inv());
}

}  // namespace detail

// Fraction field of PiPolynomial; the base field for exact linear algebra on
// monodromy matrices whose entries carry Pi-monomials.
class PiRational {
  public:
    PiRational() : num_(), den_(PiPolynomial::one()) {}
    PiRational(PiPolynomial n) : num_(std::move(n)), den_(PiPolynomial::one()) {}
    PiRational(PiPolynomial n, PiPolynomial d) : num_(std::move(n)), den_(std::move(d)) {
        normalize();
    }
    explicit PiRational(const Cyclotomic& c) : PiRational(PiPolynomial(c)) {}
    explicit PiRational(const Rational& r) : PiRational(PiPolynomial(r)) {}

    static PiRational zero() { return PiRational(); }
    static PiRational one() { return PiRational(PiPolynomial::one()); }

    const PiPolynomial& numerator() const { return num_; }
    const PiPolynomial& denominator() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }

    friend PiRational operator+(const PiRational& a, const PiRational& b) {
        return PiRational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend PiRational operator-(const PiRational& a, const PiRational& b) {
        return PiRational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend PiRational operator*(const PiRational& a, const PiRational& b) {
        return PiRational(a.num_ * b.num_, a.den_ * b.den_);
    }
    PiRational operator-() const { return PiRational(-num_, den_); }

    PiRational inv() const {
        if (is_zero()) fail(errc::division_by_zero, "inverse of zero");
        return PiRational(den_, num_);
    }
    friend PiRational operator/(const PiRational& a, const PiRational& b) { return a * b.inv(); }

    PiRational& operator+=(const PiRational& o) { return *this = *this + o; }
    PiRational& operator-=(const PiRational& o) { return *this = *this - o; }
    PiRational& operator*=(const PiRational& o) { return *this = *this * o; }

    friend bool operator==(const PiRational& a, const PiRational& b) {
        return (a - b).is_zero();
    }
    friend bool operator!=(const PiRational& a, const PiRational& b) { return !(a == b); }

  private:
    void normalize() {
        if (den_.is_zero()) fail(errc::division_by_zero, "zero denominator");
        if (num_.is_zero()) {
            den_ = PiPolynomial::one();
            return;
        }
        PiPolynomial g = detail::poly_gcd(num_, den_);
        if (g.degree() > 0) {
            num_ = detail::poly_divmod(num_, g).first;
            den_ = detail::poly_divmod(den_, g).first;
        }
        Cyclotomic lead = den_.coefficients().back();
        if (!(lead == Cyclotomic::one())) {
            num_ = detail::poly_scale(num_, lead.inv());
            den_ = detail::poly_scale(den_, lead.inv());
        }
    }

    PiPolynomial num_, den_;
};

}  // namespace grh
