#pragma once

// Brute-force decay oracle shared by the unit and acceptance suites: find the
// maximal-decay directions of e^{q_k - q_l} by dense theta-grid minimization
// of Re((q_k - q_l)(eps e^{i theta})) followed by ternary refinement.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "grh/interval.hpp"
#include "grh/local_datum.hpp"

namespace grh_test {

inline double to_double(const grh::Rational& q) {
    return grh::num(q).convert_to<double>() / grh::den(q).convert_to<double>();
}

inline std::complex<double> to_complexd(const grh::Cyclotomic& c) {
    grh::CInterval b = grh::embed_at_bits(c, 64);
    return {to_double((b.re.lo + b.re.hi) / 2), to_double((b.im.lo + b.im.hi) / 2)};
}

inline std::vector<double> oracle_decay_angles(const std::vector<grh::Cyclotomic>& diff_u) {
    std::vector<std::complex<double>> coef(diff_u.size());
    for (size_t e = 0; e < diff_u.size(); ++e) coef[e] = to_complexd(diff_u[e]);
    const double eps = 1e-8;
    auto value = [&](double theta) {
        std::complex<double> u = std::polar(1.0 / eps, -theta);
        std::complex<double> acc = 0, pw = 1;
        for (size_t e = 1; e < coef.size(); ++e) {
            pw *= u;
            acc += coef[e] * pw;
        }
        return acc.real();
    };
    const int grid = 40000;
    std::vector<double> vals(grid);
    double vmin = 1e300;
    for (int i = 0; i < grid; ++i) {
        vals[i] = value(2 * M_PI * i / grid);
        vmin = std::min(vmin, vals[i]);
    }
    std::vector<double> angles;
    double cutoff = vmin * 0.5;  // all true wells share the leading depth
    for (int i = 0; i < grid; ++i) {
        double prev = vals[(i + grid - 1) % grid], next = vals[(i + 1) % grid];
        if (vals[i] <= prev && vals[i] < next && vals[i] < cutoff) {
            double a = 2 * M_PI * (i - 1) / grid, b = 2 * M_PI * (i + 1) / grid;
            for (int it = 0; it < 120; ++it) {
                double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
                if (value(m1) < value(m2))
                    b = m2;
                else
                    a = m1;
            }
            angles.push_back(std::fmod((a + b) / 2 + 2 * M_PI, 2 * M_PI));
        }
    }
    std::sort(angles.begin(), angles.end());
    return angles;
}

inline double circ_dist(double a, double b) {
    double d = std::fabs(a - b);
    return std::min(d, 2 * M_PI - d);
}

}  // namespace grh_test
