#pragma once

// Ergodic sums S_N f(x) = sum_{j<N} f(x + j alpha) for StepFunction f.
//
// The floor-sum engine counts orbit points left of each breakpoint with one
// Euclid-style floor sum, so N may have thousands of digits. The direct engine
// walks the orbit with integer numerators and serves as the oracle.

#include "lacuna/bigint.hpp"
#include "lacuna/contfrac.hpp"
#include "lacuna/floorsum.hpp"
#include "lacuna/observables.hpp"
#include "lacuna/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace lacuna {

enum class Engine { direct, floorsum };

struct ErgodicSumResult {
    Rational value;
    BigInt n;
    Engine engine;
    bool exact = true;
};

namespace detail {

/// sum_{j<N} floor(x - c + j alpha), alpha = num/den.
inline BigInt orbit_floor_sum(const Rational& x, const Rational& c, const BigInt& n, const BigInt& num,
                              const BigInt& den) {
    Rational shift = x - c;
    const BigInt& a = shift.get_num();
    const BigInt& e = shift.get_den();
    // floor((a*den + j*num*e) / (e*den))
    return floor_sum(n, num * e, a * den, e * den);
}

}  // namespace detail

/// #{0 <= j < N : {x + j alpha} in [u, w)} where alpha = num/den. A wrapped
/// interval (u > w) means [u, 1) U [0, w).
inline BigInt count_visits_rational(const Rational& x, const Rational& u, const Rational& w, const BigInt& n,
                                    const BigInt& num, const BigInt& den) {
    if (n < 0) throw DomainError("count_visits needs N >= 0");
    Rational uu = frac(u), ww = frac(w);
    if (uu == ww) return (u == w) ? BigInt(0) : n;
    BigInt count = detail::orbit_floor_sum(x, uu, n, num, den) - detail::orbit_floor_sum(x, ww, n, num, den);
    if (uu > ww) count += n;
    return count;
}

inline BigInt count_visits(const Rational& x, const Rational& u, const Rational& w, const BigInt& n,
                           const RationalTruncation& trunc) {
    trunc.require_in_window(n, "N");
    return count_visits_rational(x, u, w, n, trunc.alpha_num(), trunc.alpha_den());
}

/// Floor-sum engine for alpha = num/den with no window check.
inline Rational ergodic_sum_rational(const StepFunction& f, const Rational& x, const BigInt& n, const BigInt& num,
                                     const BigInt& den) {
    if (n < 0) throw DomainError("ergodic_sum needs N >= 0");
    if (n == 0) return 0;
    Rational alpha = ratio(num, den);
    BigInt f0 = detail::orbit_floor_sum(x, 0, n, num, den);
    Rational out = 0;
    if (f.slope() != 0) {
        // sum {y_j} = N x + alpha N (N - 1) / 2 - sum floor(y_j)
        Rational frac_sum = Rational(n) * x + alpha * Rational(n * (n - 1)) / 2 - Rational(f0);
        out += f.slope() * (frac_sum - Rational(n) / 2);
    }
    const auto& breaks = f.breakpoints();
    const auto& values = f.values();
    if (!breaks.empty()) {
        // g({y}) = v_last + sum_i D_i [{y} >= b_i] and [{y} >= b] = 1 + floor(y - b) - floor(y).
        const std::size_t m = breaks.size();
        out += Rational(n) * values[m - 1];
        for (std::size_t i = 0; i < m; ++i) {
            Rational jump = values[i] - values[(i + m - 1) % m];
            BigInt fb = breaks[i] == 0 ? f0 : detail::orbit_floor_sum(x, breaks[i], n, num, den);
            out += jump * Rational(n + fb - f0);
        }
    }
    return out;
}

/// f(y) = slope * y + intercept on [start, end); a list of pieces covers [0, 1).
struct LinearPiece {
    Rational start;
    Rational end;
    Rational slope;
    Rational intercept;
};

/// sum_{j<N} f({x + j alpha}) for piecewise-linear f, alpha = num/den.
///
/// With F_b(j) = floor(y_j - b), [{y} >= b] = 1 + F_b - F_0 and, because
/// F_0 - F_b is 0 or 1, F_0 F_b = (F_0^2 + F_b^2 - F_0 + F_b) / 2. So the sums
/// of [{y} >= b] and {y}[{y} >= b] reduce to floor moments.
inline Rational ergodic_sum_piecewise_linear(const std::vector<LinearPiece>& f, const Rational& x, const BigInt& n,
                                             const BigInt& num, const BigInt& den) {
    if (n < 0) throw DomainError("ergodic_sum needs N >= 0");
    if (n == 0) return 0;
    const Rational alpha = ratio(num, den);
    const Rational N(n);
    const Rational sum_y = N * x + alpha * Rational(n * (n - 1)) / 2;
    auto moments_at = [&](const Rational& b) {
        Rational shift = x - b;
        return floor_moments(n, num * shift.get_den(), shift.get_num() * den, shift.get_den() * den);
    };
    const FloorMoments m0 = moments_at(0);
    auto count_above = [&](const FloorMoments& mb) -> Rational { return N + Rational(mb.f - m0.f); };
    auto frac_above = [&](const FloorMoments& mb) -> Rational {
        Rational y_fb = x * Rational(mb.f) + alpha * Rational(mb.g);
        Rational y_f0 = x * Rational(m0.f) + alpha * Rational(m0.g);
        return sum_y + y_fb - y_f0 + Rational(m0.h - m0.f - mb.h - mb.f) / 2;
    };
    Rational out = 0;
    for (const auto& p : f) {
        if (p.end <= p.start) continue;
        FloorMoments ms = p.start == 0 ? m0 : moments_at(p.start);
        Rational c_lo = count_above(ms), g_lo = frac_above(ms);
        Rational c_hi = 0, g_hi = 0;
        if (p.end < 1) {
            FloorMoments me = moments_at(p.end);
            c_hi = count_above(me);
            g_hi = frac_above(me);
        }
        out += p.slope * (g_lo - g_hi) + p.intercept * (c_lo - c_hi);
    }
    return out;
}

inline ErgodicSumResult ergodic_sum(const StepFunction& f, const Rational& x, const BigInt& n,
                                    const RationalTruncation& trunc) {
    trunc.require_in_window(n, "N");
    return {ergodic_sum_rational(f, x, n, trunc.alpha_num(), trunc.alpha_den()), n, Engine::floorsum, true};
}

/// Orbit walk with integer numerators over a common denominator. O(N log #pieces).
inline ErgodicSumResult ergodic_sum_direct(const StepFunction& f, const Rational& x, const BigInt& n,
                                           const Rational& alpha) {
    if (n < 0) throw DomainError("ergodic_sum needs N >= 0");
    BigInt den = lcm(x.get_den(), alpha.get_den());
    for (const auto& b : f.breakpoints()) den = lcm(den, b.get_den());
    auto scaled = [&](const Rational& r) { return BigInt(r.get_num() * (den / r.get_den())); };
    BigInt y = scaled(frac(x));
    BigInt step = scaled(frac(alpha));
    std::vector<BigInt> cuts;
    for (const auto& b : f.breakpoints()) cuts.push_back(scaled(b));

    const std::size_t m = cuts.size();
    std::vector<unsigned long> hits(std::max<std::size_t>(m, 1), 0);
    BigInt numer_total = 0;
    for (BigInt j = 0; j < n; ++j) {
        numer_total += y;
        if (m > 0) {
            auto it = std::upper_bound(cuts.begin(), cuts.end(), y);
            std::size_t idx = it == cuts.begin() ? m - 1 : static_cast<std::size_t>(it - cuts.begin()) - 1;
            ++hits[idx];
        }
        y += step;
        if (y >= den) y -= den;
    }
    Rational out = f.slope() * (ratio(numer_total, den) - Rational(n) / 2);
    for (std::size_t i = 0; i < m; ++i) out += f.values()[i] * hits[i];
    out.canonicalize();
    return {out, n, Engine::direct, true};
}

/// x + N alpha mod 1.
inline Rational rotate(const Rational& x, const BigInt& n, const RationalTruncation& trunc) {
    return frac(x + Rational(n) * trunc.value());
}

struct OstrowskiBound {
    Rational lhs;  // |S_N f(x)|
    Rational rhs;  // V(f) * sum_k b_k
    bool holds;
};

/// |S_N f(x)| <= V(f) * sum_{k=0}^{m} b_k, one Denjoy-Koksma block per digit.
inline OstrowskiBound ostrowski_bound_check(const StepFunction& f, const Rational& x, const BigInt& n,
                                            const RationalTruncation& trunc) {
    Rational lhs = abs(ergodic_sum(f, x, n, trunc).value);
    Rational rhs = 0;
    if (n > 0) rhs = f.variation() * Rational(ostrowski_digits(n, trunc).digit_sum());
    return {lhs, rhs, lhs <= rhs};
}

/// S_N f as a function of x: slope N s and the jumps of f moved to u - j alpha.
inline UniformSlopeFunction ergodic_sum_function(const StepFunction& f, long n, const Rational& alpha) {
    if (n < 0) throw DomainError("ergodic_sum_function needs N >= 0");
    UniformSlopeFunction out{f.slope() * n, {}};
    auto jumps = f.jumps();
    out.jumps.reserve(jumps.size() * static_cast<std::size_t>(n));
    for (long j = 0; j < n; ++j) {
        Rational shift = frac(alpha * j);
        for (const auto& jp : jumps) out.jumps.push_back({frac(jp.at - shift), jp.size});
    }
    return out;
}

/// f_q - f_hat_q(q .): identical slopes cancel; jumps of f at u are moved to
/// u - j alpha (positive) and u - j/q (negative), j < q.
inline UniformSlopeFunction approximation_error_function(const StepFunction& f, long q, const Rational& alpha) {
    UniformSlopeFunction out{0, {}};
    for (long j = 0; j < q; ++j) {
        Rational a_shift = frac(alpha * j);
        Rational q_shift = ratio(j, q);
        for (const auto& jp : f.jumps()) {
            out.jumps.push_back({frac(jp.at - a_shift), jp.size});
            out.jumps.push_back({frac(jp.at - q_shift), -jp.size});
        }
    }
    return out;
}

struct ApproxError {
    double value;
    double tail_bound;  // zero for the exact computation
    double bound;       // (4 pi K)^2 / a_{n+1}
    double phi0_bound;  // 4 / a_{n+1}
};

/// ||f_{q_n} - f_hat_{q_n}(q_n .)||_2^2 by exact piecewise integration.
inline ApproxError approx_error_sq(const StepFunction& f, std::size_t n, const RationalTruncation& trunc,
                                   long cap = 2'000'000) {
    trunc.require_trusted_index(n);
    const BigInt& qn = trunc.q(n);
    if (qn * BigInt(static_cast<unsigned long>(f.jumps().size())) > cap) {
        throw DomainError("q_n * #jumps exceeds the enumeration cap; use approx_error_sq_series");
    }
    long q = qn.get_si();
    Rational v = l2_norm_sq(approximation_error_function(f, q, trunc.value()));
    double a = static_cast<double>(trunc.a(n + 1));
    double k = f.fourier_bound();
    return {v.get_d(), 0.0, std::pow(4 * std::numbers::pi * k, 2) / a, 4.0 / a};
}

/// The same quantity from its Fourier expansion truncated at |r| <= R.
inline ApproxError approx_error_sq_series(const StepFunction& f, std::size_t n, const RationalTruncation& trunc,
                                          long r_max) {
    trunc.require_trusted_index(n);
    const BigInt& qn = trunc.q(n);
    const Rational& alpha = trunc.value();
    auto jumps = f.jumps();
    std::vector<detail::PhaseWalker> w_r, w_qr;
    for (const auto& j : jumps) {
        w_r.emplace_back(j.at);
        w_qr.emplace_back(frac(Rational(qn) * j.at));
    }
    detail::PhaseWalker ra(frac(alpha));
    detail::PhaseWalker qra(frac(Rational(qn) * alpha));
    detail::PhaseWalker q2ra(frac(Rational(qn * qn) * alpha));
    std::vector<double> ph(jumps.size()), phq(jumps.size());
    const double pi = std::numbers::pi;
    const double qd = qn.get_d();
    double acc = 0;
    for (long r = 1; r <= r_max; ++r) {
        for (std::size_t k = 0; k < jumps.size(); ++k) {
            ph[k] = w_r[k].next();
            phq[k] = w_qr[k].next();
        }
        double t_r = ra.next(), t_qr = qra.next(), t_q2r = q2ra.next();
        double r2 = static_cast<double>(r) * static_cast<double>(r);
        auto unit = [&](double t) { return std::polar(1.0, 2 * pi * t) - 1.0; };
        // Resonant part: e^{pi i (q-1) Y} sin(pi q Y) / (q sin(pi Y)) with Y = q r alpha
        // is the Dirichlet mean (1/q) sum_{j<q} e^{2 pi i j Y}.
        double g_qr = std::norm(detail::gamma_from_phases(jumps, phq));
        std::complex<double> den_q = qd * unit(t_qr);
        std::complex<double> mean = std::abs(den_q) < 1e-300 ? std::complex<double>(1.0) : unit(t_q2r) / den_q;
        acc += 2 * g_qr / r2 * std::norm(mean - 1.0);
        // Non-resonant part: r not divisible by q_n.
        if (BigInt(r) % qn != 0) {
            double g_r = std::norm(detail::gamma_from_phases(jumps, ph));
            double den_r = std::norm(unit(t_r));
            double kern = den_r < 1e-300 ? qd * qd : std::norm(unit(t_qr)) / den_r;
            acc += 2 * g_r / r2 * kern;
        }
    }
    double k = f.fourier_bound();
    double a = static_cast<double>(trunc.a(n + 1));
    // Both kernels are bounded by max(4, q_n^2).
    double tail = 2 * k * k * std::max(4.0, qd * qd) / static_cast<double>(r_max);
    return {acc, tail, std::pow(4 * pi * k, 2) / a, 4.0 / a};
}

}  // namespace lacuna
