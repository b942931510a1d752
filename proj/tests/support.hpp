#pragma once

// Oracles shared by the unit tests and the acceptance runner. They are
// deliberately naive: brute-force loops, quadrature and bisection.

#include "lacuna/bigint.hpp"
#include "lacuna/observables.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using lacuna::BigInt;
using lacuna::Rational;

inline long floor_div_ll(long a, long b) {
    long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline long brute_floor_sum(long n, long a, long b, long c) {
    long s = 0;
    for (long j = 0; j < n; ++j) s += floor_div_ll(a * j + b, c);
    return s;
}

/// Rational bracket [lo, hi] around sqrt(2) by bisection; width below 2^-bits.
inline std::pair<Rational, Rational> sqrt2_bracket(unsigned bits) {
    Rational lo = 1, hi = 2;
    for (unsigned i = 0; i < bits; ++i) {
        Rational mid = (lo + hi) / 2;
        if (mid * mid < 2) lo = mid;
        else hi = mid;
    }
    return {lo, hi};
}

/// Fourier coefficient c_r = int_0^1 f(x) e^{-2 pi i r x} dx by Gauss-Legendre
/// on every piece between breakpoints, each piece cut into short panels.
inline std::complex<double> quadrature_coefficient(const lacuna::StepFunction& f, long r) {
    static const double nodes[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                    0.7966664774136267,  0.9602898564975363};
    static const double weights[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                      0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                      0.2223810344533745, 0.1012285362903763};
    std::vector<double> cuts{0.0};
    for (const auto& b : f.breakpoints()) {
        if (b != 0) cuts.push_back(b.get_d());
    }
    cuts.push_back(1.0);
    std::complex<double> acc = 0;
    const int panels = 8 + 4 * static_cast<int>(std::labs(r));
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double lo = cuts[i], hi = cuts[i + 1];
        double mid_value = f.evaluate(0.5 * (lo + hi));
        double slope = f.slope().get_d();
        for (int p = 0; p < panels; ++p) {
            double a = lo + (hi - lo) * p / panels;
            double b = lo + (hi - lo) * (p + 1) / panels;
            for (int k = 0; k < 8; ++k) {
                double x = 0.5 * (a + b) + 0.5 * (b - a) * nodes[k];
                // Linear on the piece: evaluate from the midpoint to avoid breakpoint ambiguity.
                double fx = mid_value + slope * (x - 0.5 * (lo + hi));
                acc += 0.5 * (b - a) * weights[k] * fx * std::polar(1.0, -2 * std::numbers::pi * r * x);
            }
        }
    }
    return acc;
}

/// Direct ergodic sum in double precision.
inline double direct_sum_double(const lacuna::StepFunction& f, double x, long n, double alpha) {
    double s = 0;
    for (long j = 0; j < n; ++j) s += f.evaluate(x + j * alpha);
    return s;
}

inline Rational random_rational(std::mt19937_64& rng, std::uint64_t den) {
    std::uniform_int_distribution<std::uint64_t> d(0, den - 1);
    return lacuna::ratio(lacuna::from_u64(d(rng)), lacuna::from_u64(den));
}

}  // namespace oracle
