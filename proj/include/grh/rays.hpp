#pragma once

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "grh/interval.hpp"
#include "grh/local_datum.hpp"

namespace grh {

namespace detail {

// Certified arctan for any rational, via argument reduction into |x| <= 1/2.
inline RInterval arctan_cert(const Rational& x, int bits) {
    if (x < 0) return -arctan_cert(-x, bits);
    if (x <= Rational(1, 2)) return arctan_small(x, bits);
    if (x <= 1) {
        // arctan x = pi/4 + arctan((x-1)/(x+1)), reduced argument in (-1/3, 0]
        RInterval quarter_pi = Rational(1, 4) * pi_interval(bits + 4);
        return (quarter_pi + arctan_cert((x - 1) / (x + 1), bits + 4)).rounded(bits);
    }
    RInterval half_pi = Rational(1, 2) * pi_interval(bits + 4);
    return (half_pi - arctan_cert(Rational(1) / x, bits + 4)).rounded(bits);
}

}  // namespace detail

// arg(c) = t * pi with rational t, when detectable: exact axis tests first,
// then the torsion candidates filtered by a coarse numeric angle.
inline std::optional<Rational> exact_arg_t(const Cyclotomic& c);

// Axis-only exact angles (no torsion scan); keeps arg_interval free of
// mutual recursion with the full detector.
inline std::optional<Rational> exact_arg_t_axis_only(const Cyclotomic& c) {
    if (c.is_zero()) fail(errc::internal, "arg of zero");
    if (is_real(c)) return sign_of_real(c) == Sign::positive ? Rational(0) : Rational(1);
    if ((c + c.conj()).is_zero())
        return sign_of_imag(c) == Sign::positive ? Rational(1, 2) : Rational(3, 2);
    return std::nullopt;
}

// Certified enclosure of arg(c) in [0, 2 pi), c != 0.
inline RInterval arg_interval(const Cyclotomic& c, int bits);

// A candidate maximal-decay direction theta = (arg c - pi + 2 pi j)/d.
struct RayAngle {
    Cyclotomic lead;   // leading coefficient c of q_k - q_l in the fractional variable
    int degree = 1;    // d >= 1
    int branch = 0;    // j, chosen so theta lies in [0, 2 pi)
    std::optional<Rational> exact_t;  // theta = exact_t * pi when known

    RInterval theta(int bits) const {
        if (exact_t) return (*exact_t * detail::pi_interval(bits)).rounded(bits);
        RInterval arg = arg_interval(lead, bits);
        RInterval pi = detail::pi_interval(bits);
        RInterval num = arg - pi + Rational(2 * branch) * pi;
        return (Rational(1, degree) * num).rounded(bits);
    }
};

struct StokesRay {
    RayAngle angle;
    std::vector<std::pair<int, int>> pairs;  // ordered index pairs (k, l), 0-based
};

inline std::optional<Rational> exact_arg_t(const Cyclotomic& c) {
    if (auto axis = exact_arg_t_axis_only(c)) return axis;
    // torsion scan, prefiltered numerically
    long L = lcm_long(2 * c.conductor(), 24);
    if (L > options::max_conductor) L = lcm_long(2 * c.conductor(), 8);
    if (L > options::max_conductor) L = 2 * c.conductor();
    if (L > options::max_conductor) L = c.conductor();
    RInterval arg_box = arg_interval(c, 96);
    RInterval pi = detail::pi_interval(96);
    for (long k = 0; k < L; ++k) {
        Rational t(2 * k, L);
        RInterval tpi = (t * pi).rounded(96);
        if (tpi.hi < arg_box.lo - arg_box.width() || tpi.lo > arg_box.hi + arg_box.width())
            continue;
        Cyclotomic u = Cyclotomic::root_of_unity(static_cast<int>(L), k);
        Cyclotomic w = c * u.conj();
        if (is_real(w) && sign_of_real(w) == Sign::positive) return t;
    }
    return std::nullopt;
}

inline RInterval arg_interval(const Cyclotomic& c, int bits) {
    if (auto t = exact_arg_t_axis_only(c)) {
        return (*t * detail::pi_interval(bits)).rounded(bits);
    }
    // refine until the box avoids both axes, then atan2 per quadrant
    for (int b = std::max(bits, 64);; b *= 2) {
        CInterval box = embed_at_bits(c, b);
        bool re_def = box.re.is_positive() || box.re.is_negative();
        bool im_def = box.im.is_positive() || box.im.is_negative();
        if (!re_def || !im_def) {
            if (b > (1 << 20)) fail(errc::internal, "axis separation failed");
            continue;
        }
        RInterval pi = detail::pi_interval(bits + 8);
        auto atan_ratio = [&](const RInterval& ynum, const RInterval& xden) {
            // both strictly positive; arctan(y/x) monotone: bounds from corners
            RInterval lo_b = detail::arctan_cert(ynum.lo / xden.hi, bits + 8);
            RInterval hi_b = detail::arctan_cert(ynum.hi / xden.lo, bits + 8);
            return RInterval{lo_b.lo, hi_b.hi};
        };
        RInterval theta;
        if (box.re.is_positive() && box.im.is_positive()) {
            theta = atan_ratio(box.im, box.re);
        } else if (box.re.is_negative() && box.im.is_positive()) {
            RInterval phi = atan_ratio(box.im, -box.re);
            theta = pi - phi;
        } else if (box.re.is_negative() && box.im.is_negative()) {
            RInterval phi = atan_ratio(-box.im, -box.re);
            theta = pi + phi;
        } else {
            RInterval phi = atan_ratio(-box.im, box.re);
            theta = Rational(2) * pi - phi;
        }
        return theta.rounded(bits);
    }
}

namespace detail {

inline bool arg_less_than_pi(const Cyclotomic& c) {
    Sign im = sign_of_imag(c);
    if (im == Sign::positive) return true;
    if (im == Sign::negative) return false;
    return sign_of_real(c) == Sign::positive;  // arg 0 vs arg pi; pi is not < pi
}

// Exact test: does angle a equal the rational angle t*pi?
inline bool equals_exact_angle(const RayAngle& a, const Rational& t) {
    if (a.exact_t) return *a.exact_t == t;
    // arg(c) must equal pi * s with s = t*d + 1 - 2 j, reduced mod 2
    Rational s = t * a.degree + 1 - 2 * a.branch;
    Integer twos = rfloor(s / 2);
    s -= 2 * Rational(twos);
    Integer b = den(s), amod = num(s);
    if (2 * b > options::max_conductor) return false;  // cannot certify; refinement decides
    Cyclotomic u = Cyclotomic::root_of_unity(static_cast<int>(2 * b.convert_to<long>()),
                                             amod.convert_to<long>());
    Cyclotomic w = a.lead * u.conj();
    return is_real(w) && sign_of_real(w) == Sign::positive;
}

// Exact equality of two interval-backed angles via the cross power test.
inline bool equals_cross_test(const RayAngle& a, const RayAngle& b) {
    Cyclotomic v = a.lead.pow(b.degree) * b.lead.conj().pow(a.degree);
    long m = (b.degree - a.degree) +
             2L * (static_cast<long>(b.degree) * a.branch - static_cast<long>(a.degree) * b.branch);
    if (!is_real(v)) return false;
    Sign want = (m % 2 == 0) ? Sign::positive : Sign::negative;
    return sign_of_real(v) == want;
}

}  // namespace detail

// Total comparison of ray angles in [0, 2 pi): -1, 0, +1. Exactness decides
// equality; interval refinement decides order. AMBIGUOUS_ANGLE only fires at
// the precision cap, which no algebraic input should reach.
inline int compare_angles(const RayAngle& a, const RayAngle& b) {
    if (a.exact_t && b.exact_t) {
        if (*a.exact_t == *b.exact_t) return 0;
        return *a.exact_t < *b.exact_t ? -1 : 1;
    }
    for (int bits = 128; bits <= (1 << 16); bits *= 2) {
        RInterval ia = a.theta(bits), ib = b.theta(bits);
        if (ia.hi < ib.lo) return -1;
        if (ib.hi < ia.lo) return 1;
        // overlapping: try to certify equality exactly
        bool equal = false;
        if (a.exact_t) {
            equal = detail::equals_exact_angle(b, *a.exact_t);
        } else if (b.exact_t) {
            equal = detail::equals_exact_angle(a, *b.exact_t);
        } else {
            Rational gap = std::max(ia.hi, ib.hi) - std::min(ia.lo, ib.lo);
            if (gap < Rational(6, static_cast<long>(a.degree) * b.degree)) {
                equal = detail::equals_cross_test(a, b);
            } else {
                continue;
            }
        }
        if (equal) return 0;
        // provably distinct: keep refining until the intervals separate
    }
    fail(errc::ambiguous_angle, "angles not separable at maximum precision");
}

// All singular (anti-Stokes) rays of the exponential part: directions of
// maximal decay of e^{q_k - q_l} over all ordered pairs of distinct diagonal
// exponentials, merged when directions coincide at the same level and sorted
// counterclockwise from angle 0. Coinciding directions from different levels
// stay distinct, deeper level first.
inline std::vector<StokesRay> singular_rays(const ExponentialPart& part) {
    auto positions = expand(part);
    const int n = static_cast<int>(positions.size());
    struct Item {
        RayAngle angle;
        std::pair<int, int> pair;
    };
    std::vector<Item> items;
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            if (k == l) continue;
            // q_k - q_l in u-units
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
            if (d == 0) continue;  // same exponential: no decay pair
            Cyclotomic c = diff[d];
            int jmin = detail::arg_less_than_pi(c) ? 1 : 0;
            std::optional<Rational> arg_t = exact_arg_t(c);
            for (int j = jmin; j < jmin + d; ++j) {
                RayAngle ang;
                ang.lead = c;
                ang.degree = d;
                ang.branch = j;
                if (arg_t) {
                    Rational t = (*arg_t - 1 + Rational(2 * j)) / d;
                    // normalize into [0, 2)
                    Integer twos = rfloor(t / 2);
                    t -= 2 * Rational(twos);
                    ang.exact_t = t;
                }
                items.push_back({std::move(ang), {k, l}});
            }
        }
    }
    // group equal (angle, level) items
    std::vector<StokesRay> rays;
    for (auto& it : items) {
        bool merged = false;
        for (auto& ray : rays) {
            if (ray.angle.degree != it.angle.degree) continue;
            if (compare_angles(ray.angle, it.angle) == 0) {
                ray.pairs.push_back(it.pair);
                merged = true;
                break;
            }
        }
        if (!merged) rays.push_back({it.angle, {it.pair}});
    }
    for (auto& ray : rays) {
        std::sort(ray.pairs.begin(), ray.pairs.end());
        ray.pairs.erase(std::unique(ray.pairs.begin(), ray.pairs.end()), ray.pairs.end());
    }
    std::sort(rays.begin(), rays.end(), [](const StokesRay& x, const StokesRay& y) {
        int c = compare_angles(x.angle, y.angle);
        if (c != 0) return c < 0;
        return x.angle.degree > y.angle.degree;  // deeper level first
    });
    return rays;
}

}  // namespace grh
