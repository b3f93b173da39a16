#pragma once

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <vector>

#include "grh/rational.hpp"

namespace grh {

inline int euler_phi(int m) {
    int result = m, n = m;
    for (int p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            result -= result / p;
            while (n % p == 0) n /= p;
        }
    }
    if (n > 1) result -= result / n;
    return result;
}

namespace detail {

// Dense integer polynomials, index = exponent.
using IPoly = std::vector<Integer>;

inline IPoly ipoly_div_exact(const IPoly& a, const IPoly& b) {
    // Exact division of monic-divisor integer polynomials.
    IPoly r = a, q(a.size() - b.size() + 1, Integer(0));
    for (int i = static_cast<int>(q.size()) - 1; i >= 0; --i) {
        Integer c = r[i + b.size() - 1];
        q[i] = c;
        if (c == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) r[i + j] -= c * b[j];
    }
    return q;
}

// x^m - 1 divided by the cyclotomic polynomials of all proper divisors.
// Map nodes are stable, so returned references stay valid after later inserts.
inline const IPoly& cyclotomic_polynomial(int m) {
    static std::map<int, IPoly> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    for (int d = 1; d <= m; ++d) {
        if (m % d != 0 || cache.count(d)) continue;
        IPoly acc(d + 1, Integer(0));
        acc[0] = -1;
        acc[d] = 1;
        for (int e = 1; e < d; ++e)
            if (d % e == 0) acc = ipoly_div_exact(acc, cache.at(e));
        cache.emplace(d, std::move(acc));
    }
    return cache.at(m);
}

}  // namespace detail

// An element of the cyclotomic field Q(zeta_m), stored as the coefficient
// vector of a polynomial in zeta_m reduced modulo the m-th cyclotomic
// polynomial. The coefficient vector always has length phi(m).
class Cyclotomic {
  public:
    Cyclotomic() : m_(1), c_(1, Rational(0)) {}

    explicit Cyclotomic(const Rational& r) : m_(1), c_(1, r) {}
    explicit Cyclotomic(long n) : m_(1), c_(1, Rational(n)) {}

    // zeta_m^k (k may be any integer).
    static Cyclotomic root_of_unity(int m, long k = 1) {
        check_conductor(m);
        long kk = ((k % m) + m) % m;
        std::vector<Rational> powers(static_cast<size_t>(m), Rational(0));
        powers[static_cast<size_t>(kk)] = 1;
        return Cyclotomic(m, reduce_mod_phi(std::move(powers), m));
    }

    static Cyclotomic zero() { return Cyclotomic(); }
    static Cyclotomic one() { return Cyclotomic(Rational(1)); }

    int conductor() const { return m_; }
    const std::vector<Rational>& coefficients() const { return c_; }

    bool is_zero() const {
        return std::all_of(c_.begin(), c_.end(), [](const Rational& x) { return x == 0; });
    }

    bool is_rational() const {
        for (size_t i = 1; i < c_.size(); ++i)
            if (c_[i] != 0) return false;
        return true;
    }

    // Valid only when is_rational().
    Rational rational_value() const { return c_[0]; }

    Cyclotomic lifted_to(int M) const {
        if (M == m_) return *this;
        if (M % m_ != 0) fail(errc::internal, "conductor lift requires divisibility");
        check_conductor(M);
        int stride = M / m_;
        std::vector<Rational> raw(static_cast<size_t>(c_.size() - 1) * stride + 1, Rational(0));
        for (size_t i = 0; i < c_.size(); ++i) raw[i * stride] = c_[i];
        return Cyclotomic(M, reduce_mod_phi(std::move(raw), M));
    }

    friend Cyclotomic operator+(const Cyclotomic& a, const Cyclotomic& b) {
        auto [x, y] = common(a, b);
        for (size_t i = 0; i < x.c_.size(); ++i) x.c_[i] += y.c_[i];
        return x;
    }

    friend Cyclotomic operator-(const Cyclotomic& a, const Cyclotomic& b) {
        auto [x, y] = common(a, b);
        for (size_t i = 0; i < x.c_.size(); ++i) x.c_[i] -= y.c_[i];
        return x;
    }

    Cyclotomic operator-() const {
        Cyclotomic r = *this;
        for (auto& x : r.c_) x = -x;
        return r;
    }

    // Product via integer convolution on denominator-cleared vectors; one
    // rational normalization per output coefficient instead of one per term.
    friend Cyclotomic operator*(const Cyclotomic& a, const Cyclotomic& b) {
        auto [x, y] = common(a, b);
        Integer dx = 1, dy = 1;
        for (const auto& v : x.c_) dx = dx / boost::multiprecision::gcd(dx, den(v)) * den(v);
        for (const auto& v : y.c_) dy = dy / boost::multiprecision::gcd(dy, den(v)) * den(v);
        std::vector<Integer> ix(x.c_.size()), iy(y.c_.size());
        for (size_t i = 0; i < x.c_.size(); ++i) ix[i] = num(x.c_[i]) * (dx / den(x.c_[i]));
        for (size_t j = 0; j < y.c_.size(); ++j) iy[j] = num(y.c_[j]) * (dy / den(y.c_[j]));
        std::vector<Integer> prod(x.c_.size() + y.c_.size() - 1, Integer(0));
        for (size_t i = 0; i < ix.size(); ++i) {
            if (ix[i] == 0) continue;
            for (size_t j = 0; j < iy.size(); ++j) {
                if (iy[j] == 0) continue;
                prod[i + j] += ix[i] * iy[j];
            }
        }
        // reduce mod the minimal polynomial in integers (it is monic)
        const auto& phi_int = detail::cyclotomic_polynomial(x.m_);
        size_t deg = phi_int.size() - 1;
        while (prod.size() > deg) {
            Integer top = prod.back();
            prod.pop_back();
            if (top == 0) continue;
            size_t base = prod.size() - deg;
            for (size_t j = 0; j < deg; ++j) prod[base + j] -= top * phi_int[j];
        }
        Integer d = dx * dy;
        std::vector<Rational> out(deg, Rational(0));
        for (size_t i = 0; i < prod.size(); ++i)
            if (prod[i] != 0) out[i] = Rational(prod[i], d);
        return Cyclotomic(x.m_, std::move(out));
    }

    friend Cyclotomic operator*(const Rational& r, const Cyclotomic& a) {
        Cyclotomic x = a;
        for (auto& v : x.c_) v *= r;
        return x;
    }

    Cyclotomic& operator+=(const Cyclotomic& o) { return *this = *this + o; }
    Cyclotomic& operator-=(const Cyclotomic& o) { return *this = *this - o; }
    Cyclotomic& operator*=(const Cyclotomic& o) { return *this = *this * o; }

    // Inverse by solving the multiplication-matrix system with fraction-free
    // elimination; integer arithmetic throughout, so coefficient growth stays
    // bounded where a rational Euclid would explode.
    Cyclotomic inv() const {
        if (is_zero()) fail(errc::division_by_zero, "inverse of zero cyclotomic number");
        if (is_rational()) return Cyclotomic(Rational(1) / c_[0]);
        const int phi = static_cast<int>(c_.size());
        Integer denl = 1;
        for (const auto& x : c_) denl = denl / boost::multiprecision::gcd(denl, den(x)) * den(x);
        std::vector<Integer> cur(static_cast<size_t>(phi));
        for (int i = 0; i < phi; ++i)
            cur[static_cast<size_t>(i)] = num(c_[static_cast<size_t>(i)]) *
                                          (denl / den(c_[static_cast<size_t>(i)]));
        const auto& phi_poly = detail::cyclotomic_polynomial(m_);
        // augmented system M x = denl * e0, M column j = this * zeta^j
        std::vector<std::vector<Integer>> m(static_cast<size_t>(phi),
                                            std::vector<Integer>(static_cast<size_t>(phi) + 1));
        for (int j = 0; j < phi; ++j) {
            for (int i = 0; i < phi; ++i)
                m[static_cast<size_t>(i)][static_cast<size_t>(j)] = cur[static_cast<size_t>(i)];
            if (j + 1 < phi) {
                Integer top = cur[static_cast<size_t>(phi - 1)];
                for (int i = phi - 1; i > 0; --i)
                    cur[static_cast<size_t>(i)] = cur[static_cast<size_t>(i - 1)];
                cur[0] = 0;
                if (top != 0)
                    for (int i = 0; i < phi; ++i)
                        cur[static_cast<size_t>(i)] -= top * phi_poly[static_cast<size_t>(i)];
            }
        }
        m[0][static_cast<size_t>(phi)] = denl;
        // Bareiss elimination
        Integer prev = 1;
        for (int k = 0; k < phi; ++k) {
            int piv = -1;
            for (int i = k; i < phi && piv < 0; ++i)
                if (m[static_cast<size_t>(i)][static_cast<size_t>(k)] != 0) piv = i;
            if (piv < 0) fail(errc::internal, "cyclotomic inverse: singular system");
            if (piv != k) std::swap(m[static_cast<size_t>(piv)], m[static_cast<size_t>(k)]);
            for (int i = k + 1; i < phi; ++i) {
                for (int j = k + 1; j <= phi; ++j)
                    m[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                        (m[static_cast<size_t>(i)][static_cast<size_t>(j)] *
                             m[static_cast<size_t>(k)][static_cast<size_t>(k)] -
                         m[static_cast<size_t>(i)][static_cast<size_t>(k)] *
                             m[static_cast<size_t>(k)][static_cast<size_t>(j)]) /
                        prev;
                m[static_cast<size_t>(i)][static_cast<size_t>(k)] = 0;
            }
            prev = m[static_cast<size_t>(k)][static_cast<size_t>(k)];
        }
        std::vector<Rational> x(static_cast<size_t>(phi));
        for (int i = phi - 1; i >= 0; --i) {
            Rational acc(m[static_cast<size_t>(i)][static_cast<size_t>(phi)]);
            for (int j = i + 1; j < phi; ++j)
                acc -= Rational(m[static_cast<size_t>(i)][static_cast<size_t>(j)]) *
                       x[static_cast<size_t>(j)];
            x[static_cast<size_t>(i)] =
                acc / Rational(m[static_cast<size_t>(i)][static_cast<size_t>(i)]);
        }
        return Cyclotomic(m_, std::move(x));
    }

    friend Cyclotomic operator/(const Cyclotomic& a, const Cyclotomic& b) { return a * b.inv(); }

    // Galois action zeta -> zeta^k, gcd(k, m) = 1. Complex conjugation is k = -1.
    Cyclotomic galois(long k) const {
        long kk = ((k % m_) + m_) % m_;
        if (gcd_int(static_cast<int>(kk), m_) != 1)
            fail(errc::internal, "galois exponent not coprime to conductor");
        std::vector<Rational> raw(static_cast<size_t>(c_.size() - 1) * kk + 1, Rational(0));
        for (size_t i = 0; i < c_.size(); ++i) raw[i * kk] += c_[i];
        return Cyclotomic(m_, reduce_mod_phi(std::move(raw), m_));
    }

    Cyclotomic conj() const { return m_ == 1 ? *this : galois(m_ - 1); }

    Cyclotomic pow(long e) const {
        if (e < 0) return inv().pow(-e);
        Cyclotomic base = *this, acc = Cyclotomic::one();
        while (e) {
            if (e & 1) acc *= base;
            base *= base;
            e >>= 1;
        }
        return acc;
    }

    friend bool operator==(const Cyclotomic& a, const Cyclotomic& b) {
        auto [x, y] = common(a, b);
        return x.c_ == y.c_;
    }
    friend bool operator!=(const Cyclotomic& a, const Cyclotomic& b) { return !(a == b); }

    // Lift a pair to the least common conductor.
    static std::pair<Cyclotomic, Cyclotomic> common(const Cyclotomic& a, const Cyclotomic& b) {
        if (a.m_ == b.m_) return {a, b};
        long M = lcm_long(a.m_, b.m_);
        check_conductor(static_cast<int>(M));
        return {a.lifted_to(static_cast<int>(M)), b.lifted_to(static_cast<int>(M))};
    }

    Cyclotomic(int m, std::vector<Rational> reduced) : m_(m), c_(std::move(reduced)) {
        c_.resize(static_cast<size_t>(euler_phi(m_)), Rational(0));
    }

  private:
    static void check_conductor(int m) {
        if (m < 1) fail(errc::parse_error, "conductor must be positive");
        if (m > options::max_conductor)
            fail(errc::conductor_limit,
                 "conductor " + std::to_string(m) + " exceeds limit " +
                     std::to_string(options::max_conductor));
    }

    static void trim(std::vector<Rational>& p) {
        while (!p.empty() && p.back() == 0) p.pop_back();
    }

    static int poly_deg(const std::vector<Rational>& p) {
        for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i)
            if (p[i] != 0) return i;
        return -1;
    }

    static std::vector<Rational> poly_mul(const std::vector<Rational>& a,
                                          const std::vector<Rational>& b) {
        if (a.empty() || b.empty()) return {};
        std::vector<Rational> r(a.size() + b.size() - 1, Rational(0));
        for (size_t i = 0; i < a.size(); ++i)
            for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
        return r;
    }

    static std::vector<Rational> poly_sub(const std::vector<Rational>& a,
                                          const std::vector<Rational>& b) {
        std::vector<Rational> r = a;
        if (r.size() < b.size()) r.resize(b.size(), Rational(0));
        for (size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
        trim(r);
        return r;
    }

    static std::pair<std::vector<Rational>, std::vector<Rational>> poly_divmod(
        std::vector<Rational> a, const std::vector<Rational>& b) {
        int db = poly_deg(b);
        std::vector<Rational> q;
        int da = poly_deg(a);
        if (da >= db) q.assign(static_cast<size_t>(da - db + 1), Rational(0));
        while ((da = poly_deg(a)) >= db) {
            Rational c = a[da] / b[db];
            q[da - db] = c;
            for (int j = 0; j <= db; ++j) a[da - db + j] -= c * b[j];
        }
        trim(a);
        return {q, a};
    }

    static std::vector<Rational> reduce_mod_phi(std::vector<Rational> p, int m) {
        const auto& phi_int = detail::cyclotomic_polynomial(m);
        size_t deg = phi_int.size() - 1;
        while (p.size() > deg) {
            size_t top = p.size() - 1;
            Rational c = p[top];
            p.pop_back();
            if (c == 0) continue;
            // subtract c * x^(top-deg) * (phi - x^deg); phi is monic
            for (size_t j = 0; j < deg; ++j) p[top - deg + j] -= c * Rational(phi_int[j]);
        }
        p.resize(deg, Rational(0));
        return p;
    }

    int m_;
    std::vector<Rational> c_;
};

enum class arith_op { add, mul, inv };

// Three-way entry point used by the CLI; library code calls operators directly.
inline Cyclotomic field_arith(const Cyclotomic& a, const Cyclotomic& b, arith_op op) {
    switch (op) {
        case arith_op::add: return a + b;
        case arith_op::mul: return a * b;
        case arith_op::inv: return a.inv();
    }
    fail(errc::internal, "bad arith op");
}

}  // namespace grh
