#pragma once

// Variance of ergodic sums on the Fourier side:
//   ||f_n||^2 = sum_r |gamma_r|^2 / r^2 G_n(r alpha),  G_n(t) = sin^2(n pi t) / sin^2(pi t),
// its Cesaro mean, and the bounds and sum inequalities built on them.

#include "lacuna/contfrac.hpp"
#include "lacuna/ergosum.hpp"
#include "lacuna/observables.hpp"
#include "lacuna/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace lacuna {

inline double gn_kernel(long n, double t) {
    if (n < 1) throw DomainError("gn_kernel needs n >= 1");
    double s = std::sin(std::numbers::pi * t);
    if (std::abs(s) < 1e-12) return static_cast<double>(n) * static_cast<double>(n);
    double v = std::sin(std::numbers::pi * static_cast<double>(n) * t);
    return v * v / (s * s);
}

/// <G_n>(t) = (1/n) sum_{k<n} G_k(t) in closed form,
/// (1 / sin^2 pi t) [1/2 - (1 / 4n)(1 + sin((2n-1) pi t) / sin(pi t))].
/// Near integer t the bracket cancels, so the kernel sum is taken directly.
inline double mean_gn_kernel(long n, double t) {
    if (n < 1) throw DomainError("mean_gn_kernel needs n >= 1");
    const double pi = std::numbers::pi;
    double tt = t - std::floor(t);
    double dist = std::min(tt, 1 - tt);
    const double nd = static_cast<double>(n);
    if (nd * dist < 1e-2) {
        double acc = 0;
        for (long k = 1; k < n; ++k) acc += gn_kernel(k, dist);
        return acc / nd;
    }
    double s = std::sin(pi * dist);
    return (0.5 - (1 + std::sin((2 * nd - 1) * pi * dist) / s) / (4 * nd)) / (s * s);
}

/// Default Fourier truncation: the series tail is about 2 K^2 n / R on
/// average, so R has to grow with n.
inline long default_r_max(long n) { return std::max<long>(200'000, 2'000 * n); }

/// ||f_n||^2 from the Fourier series truncated at |r| <= R. The reported tail
/// bound 2 K^2 n^2 / R uses G_n <= n^2.
inline SeriesValue norm_sq_fourier(const StepFunction& f, long n, const RationalTruncation& trunc, long r_max = 0) {
    if (n < 0) throw DomainError("norm_sq needs n >= 0");
    if (n == 0) return {0.0, 0.0};
    if (r_max <= 0) r_max = default_r_max(n);
    const Rational& alpha = trunc.value();
    auto jumps = f.jumps();
    std::vector<detail::PhaseWalker> w;
    for (const auto& j : jumps) w.emplace_back(j.at);
    detail::PhaseWalker ra(frac(alpha)), nra(frac(Rational(n) * alpha));
    std::vector<double> ph(jumps.size());
    const double two_pi = 2 * std::numbers::pi;
    const double nd = static_cast<double>(n);
    double acc = 0;
    for (long r = 1; r <= r_max; ++r) {
        for (std::size_t k = 0; k < jumps.size(); ++k) ph[k] = w[k].next();
        double t1 = ra.next(), tn = nra.next();
        double den = std::norm(std::polar(1.0, two_pi * t1) - 1.0);
        double g = den < 1e-300 ? nd * nd : std::norm(std::polar(1.0, two_pi * tn) - 1.0) / den;
        double rr = static_cast<double>(r);
        acc += 2 * std::norm(detail::gamma_from_phases(jumps, ph)) / (rr * rr) * g;
    }
    double k = f.fourier_bound();
    return {acc, 2 * k * k * nd * nd / static_cast<double>(r_max)};
}

/// ||f_n||^2 by exact piecewise integration of S_n f; the oracle of record.
inline Rational norm_sq_exact(const StepFunction& f, long n, const RationalTruncation& trunc, long cap = 2'000'000) {
    if (n < 0) throw DomainError("norm_sq needs n >= 0");
    if (static_cast<double>(n) * static_cast<double>(f.jumps().size()) > static_cast<double>(cap)) {
        throw DomainError("n * #jumps exceeds the enumeration cap; use the Fourier mode");
    }
    return l2_norm_sq(ergodic_sum_function(f, n, trunc.value()));
}

/// Autocorrelations C(d) = <f, f(. + d alpha)> for d = 0..d_max, exact.
inline std::vector<Rational> autocorrelations(const StepFunction& f, long d_max, const Rational& alpha) {
    auto base = f.as_uniform_slope();
    std::vector<Rational> out;
    out.reserve(static_cast<std::size_t>(d_max) + 1);
    for (long d = 0; d <= d_max; ++d) {
        UniformSlopeFunction shifted{base.slope, {}};
        Rational shift = frac(alpha * d);
        for (const auto& j : base.jumps) shifted.jumps.push_back({frac(j.at - shift), j.size});
        out.push_back(inner_product(base, shifted));
    }
    return out;
}

/// ||f_n||^2 for n = 0..n_max from ||f_n||^2 = n C(0) + 2 sum_{d<n} (n - d) C(d).
inline std::vector<Rational> norm_sq_profile(const StepFunction& f, long n_max, const RationalTruncation& trunc) {
    auto c = autocorrelations(f, std::max<long>(n_max - 1, 0), trunc.value());
    std::vector<Rational> out(static_cast<std::size_t>(n_max) + 1, Rational(0));
    // Running sums: A_n = sum_{d=1}^{n-1} C(d), B_n = sum_{d=1}^{n-1} d C(d).
    Rational a = 0, b = 0;
    for (long n = 1; n <= n_max; ++n) {
        if (n >= 2) {
            a += c[n - 1];
            b += c[n - 1] * (n - 1);
        }
        out[n] = Rational(n) * c[0] + 2 * (Rational(n) * a - b);
    }
    return out;
}

/// <D f>_n = (1/n) sum_{k<n} ||f_k||^2 = sum_r |gamma_r|^2 / r^2 <G_n>(||r alpha||).
inline SeriesValue mean_variance(const StepFunction& f, long n, const RationalTruncation& trunc, long r_max = 0) {
    if (n < 1) throw DomainError("mean_variance needs n >= 1");
    if (r_max <= 0) r_max = default_r_max(n);
    auto jumps = f.jumps();
    std::vector<detail::PhaseWalker> w;
    for (const auto& j : jumps) w.emplace_back(j.at);
    detail::PhaseWalker ra(frac(trunc.value()));
    std::vector<double> ph(jumps.size());
    double acc = 0;
    for (long r = 1; r <= r_max; ++r) {
        for (std::size_t k = 0; k < jumps.size(); ++k) ph[k] = w[k].next();
        double rr = static_cast<double>(r);
        acc += 2 * std::norm(detail::gamma_from_phases(jumps, ph)) / (rr * rr) * mean_gn_kernel(n, ra.next());
    }
    double k = f.fourier_bound();
    const double nd = static_cast<double>(n);
    return {acc, 2 * k * k * nd * nd / static_cast<double>(r_max)};
}

struct BoundSeries {
    double lower;  // sum_{j<l} |gamma_{q_j}|^2 a_{j+1}^2
    double upper;  // K^2 sum_{j<=l} a_{j+1}^2
};

inline BoundSeries bound_series(const StepFunction& f, std::size_t ell, const RationalTruncation& trunc) {
    trunc.require_trusted_index(ell);
    double k = f.fourier_bound();
    BoundSeries out{0, 0};
    for (std::size_t j = 0; j <= ell; ++j) {
        double a = static_cast<double>(trunc.a(j + 1));
        if (j < ell) out.lower += std::norm(fourier_gamma(f, trunc.q(j))) * a * a;
        out.upper += k * k * a * a;
    }
    return out;
}

/// Index l with q_l <= n < q_{l+1}.
inline std::size_t denominator_index(const BigInt& n, const RationalTruncation& trunc) {
    if (n < 1) throw DomainError("denominator_index needs n >= 1");
    trunc.require_in_window(n, "n");
    std::size_t l = 0;
    while (l + 1 <= trunc.level() && trunc.q(l + 1) <= n) ++l;
    return l;
}

/// Constant-free lower bound for <D f>_n obtained from the Fourier form of the mean and the
/// kernel bound <G_n>(t) >= 1 / (8 pi^2 t^2) for t >= 1/(2n), keeping only
/// r = +-q_j (distinct denominators below the window).
inline double mean_variance_lower_bound(const StepFunction& f, long n, const RationalTruncation& trunc) {
    if (n < 1) throw DomainError("mean_variance_lower_bound needs n >= 1");
    const double pi = std::numbers::pi;
    double acc = 0;
    BigInt last = 0;
    for (std::size_t j = 0; j <= trunc.max_trusted_index(); ++j) {
        const BigInt& q = trunc.q(j);
        if (q == last) continue;
        last = q;
        double d = nearest_integer_distance(q, trunc).get_d();
        if (d < 1.0 / (2.0 * static_cast<double>(n))) continue;
        double qd = q.get_d();
        acc += 2 * std::norm(fourier_gamma(f, q)) / (8 * pi * pi * qd * qd * d * d);
    }
    return acc;
}

struct InequalityCheck {
    double lhs;
    double rhs;
    bool holds;
};

struct DiagnosticReport {
    InequalityCheck sum_small_distance;  // sum_{k>=q_n, ||k a||<=1/m} 1/k^2
    InequalityCheck sum_large_distance;  // sum_{k>=q_n, ||k a||>=1/m} 1/(k ||k a||)^2
    InequalityCheck below_denominator;   // sum_{k<q_n} 1/(k ||k a||)^2 <= 6 sum (q_{j+1}/q_j)^2
};

/// Sum inequalities at denominator q_n. The two tail sums are summed
/// directly up to the first denominator Q above k_max and the remainder is
/// bounded by sum_{k>=Q} f(k alpha)/k^2 <= (pi^2/6)(mu(f)/Q + V(f)/Q^2), the
/// same estimate that yields the explicit constants on the right-hand sides.
inline DiagnosticReport diagnostic_inequalities(const RationalTruncation& trunc, std::size_t n, long m,
                                                long k_max = 100'000) {
    if (m < 1) throw DomainError("diagnostic_inequalities needs m >= 1");
    trunc.require_trusted_index(n);
    const double pi2_6 = std::numbers::pi * std::numbers::pi / 6;
    const BigInt& qn = trunc.q(n);
    const double md = static_cast<double>(m);
    // Mean and variation of 1_{||x|| <= 1/m} and of ||x||^-2 1_{||x|| >= 1/m}.
    double mu1 = m == 1 ? 1.0 : 2.0 / md, v1 = m == 1 ? 0.0 : 2.0;
    double mu2 = m <= 2 ? 0.0 : 2.0 * (md - 2.0), v2 = m == 1 ? 0.0 : 4.0 * md * md - 8.0;
    auto maj1 = [&](double q, double mu, double v) { return pi2_6 * (mu / q + v / (q * q)); };

    std::size_t stop = n;
    while (stop < trunc.max_trusted_index() && trunc.q(stop) <= qn + k_max) ++stop;
    const BigInt& big_q = trunc.q(stop);
    double s1 = 0, s2 = 0;
    const BigInt& num = trunc.alpha_num();
    const BigInt& den = trunc.alpha_den();
    const Rational inv_m = ratio(1, m);
    for (BigInt k = qn; k < big_q; ++k) {
        BigInt r = floor_mod(k * num, den);
        BigInt s = den - r;
        Rational d = ratio(r < s ? r : s, den);
        double kd = k.get_d();
        if (d <= inv_m) s1 += 1 / (kd * kd);
        if (d >= inv_m) {
            double dd = d.get_d();
            s2 += 1 / (kd * kd * dd * dd);
        }
    }
    double bq = big_q.get_d();
    double qd = qn.get_d();
    DiagnosticReport out{};
    double lhs1 = s1 + (big_q > qn ? maj1(bq, mu1, v1) : 0.0);
    double lhs2 = s2 + (big_q > qn ? maj1(bq, mu2, v2) : 0.0);
    out.sum_small_distance = {lhs1, maj1(qd, mu1, v1), lhs1 <= maj1(qd, mu1, v1)};
    out.sum_large_distance = {lhs2, maj1(qd, mu2, v2), lhs2 <= maj1(qd, mu2, v2)};

    double below = 0;
    for (BigInt k = 1; k < qn; ++k) {
        double d = nearest_integer_distance(k, trunc).get_d();
        double kd = k.get_d();
        below += 1 / (kd * kd * d * d);
    }
    double rhs = 0;
    for (std::size_t j = 0; j < n; ++j) {
        double ratio_j = trunc.q(j + 1).get_d() / trunc.q(j).get_d();
        rhs += 6 * ratio_j * ratio_j;
    }
    out.below_denominator = {below, rhs, below <= rhs};
    return out;
}

struct VarianceRow {
    long n;
    double norm_sq;
    double mean_variance;
    double lower_series;
    double upper_series;
};

/// Rows for n = 1..n_max: exact ||f_n||^2, its Cesaro mean, and the bound
/// series at the index l(n) with q_l <= n < q_{l+1}.
inline std::vector<VarianceRow> variance_profile(const StepFunction& f, long n_max, const RationalTruncation& trunc) {
    auto prof = norm_sq_profile(f, n_max, trunc);
    std::vector<VarianceRow> out;
    Rational running = 0;
    for (long n = 1; n <= n_max; ++n) {
        running += prof[n - 1];
        std::size_t l = denominator_index(n, trunc);
        auto b = bound_series(f, l, trunc);
        out.push_back({n, prof[n].get_d(), Rational(running / n).get_d(), b.lower, b.upper});
    }
    return out;
}

}  // namespace lacuna
