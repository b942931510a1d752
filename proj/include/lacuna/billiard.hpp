#pragma once

// Rectangular Lorenz gas at direction pi/4. Obstacles are a x b rectangles
// (width a, height b) centred on the points of Z^2, with a + b <= 1.
//
// A state leaving an obstacle with velocity +-(1, 1) is encoded by x in [0, 1).
// Write s = a + b and u = (y - j) - (x - i) for the offset of the exit point
// from the centre (i, j), measured along the anti-diagonal. Then
//   velocity (1, 1):   x = 1/2 - (u + s/2) / (2s),
//   velocity (-1, -1): x = 1/2 - (3s/2 - u) / (2s)   (mod 1).
// Two collisions act on x as the rotation by alpha = a / (a + b), and move the
// obstacle centre by 2 Psi(x).

#include "lacuna/bigint.hpp"
#include "lacuna/contfrac.hpp"
#include "lacuna/ergosum.hpp"
#include "lacuna/observables.hpp"
#include "lacuna/parallel.hpp"
#include "lacuna/report.hpp"
#include "lacuna/sequences.hpp"
#include "lacuna/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace lacuna {

struct SingularOrbit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ObstacleParams {
    Rational a;
    Rational b;

    Rational scale() const { return a + b; }
    Rational alpha() const { return a / (a + b); }

    void validate() const {
        if (a <= 0 || a >= 1 || b <= 0 || b >= 1) throw DomainError("obstacle sides must lie in (0, 1)");
        if (a + b > 1) throw DomainError("small-obstacle condition a + b <= 1 violated");
    }

    /// a = alpha s, b = (1 - alpha) s.
    static ObstacleParams from_alpha(const Rational& alpha, const Rational& s) {
        if (alpha <= 0 || alpha >= 1) throw DomainError("alpha must lie in (0, 1)");
        ObstacleParams p{alpha * s, (1 - alpha) * s};
        p.a.canonicalize();
        p.b.canonicalize();
        p.validate();
        return p;
    }
};

struct Cell {
    BigInt i = 0;
    BigInt j = 0;
    bool operator==(const Cell&) const = default;
};

struct LatticeState {
    Rational x;
    Cell z;
};

/// Psi(x): (0, 1) on (0, 1/2 - alpha/2), (1, 0) on (1/2 - alpha/2, 1/2),
/// (0, -1) on (1/2, 1 - alpha/2), (-1, 0) on (1 - alpha/2, 1).
inline Cell displacement(const Rational& x, const Rational& alpha) {
    Rational y = frac(x);
    Rational u = Rational(1, 2) - alpha / 2, h(1, 2), w = 1 - alpha / 2;
    if (y == 0 || y == u || y == h || y == w) throw DomainError("displacement: x = " + to_string(y) + " is a boundary point");
    if (y < u) return {0, 1};
    if (y < h) return {1, 0};
    if (y < w) return {0, -1};
    return {-1, 0};
}

/// Half-open version used by the skew product: the intervals are closed on
/// the left, matching the step functions of billiard_displacement.
inline Cell displacement_half_open(const Rational& x, const Rational& alpha) {
    Rational y = frac(x);
    if (y < Rational(1, 2) - alpha / 2) return {0, 1};
    if (y < Rational(1, 2)) return {1, 0};
    if (y < 1 - alpha / 2) return {0, -1};
    return {-1, 0};
}

/// S(n, Psi)(x) for rational alpha = num/den, by two floor-sum ergodic sums.
inline Cell cell_after_rational(const BigInt& n, const Rational& x, const Rational& alpha) {
    auto psi = billiard_displacement(alpha);
    const BigInt& num = alpha.get_num();
    const BigInt& den = alpha.get_den();
    Rational c1 = ergodic_sum_rational(psi.first, x, n, num, den);
    Rational c2 = ergodic_sum_rational(psi.second, x, n, num, den);
    return {BigInt(c1.get_num()), BigInt(c2.get_num())};
}

inline Cell cell_after(const BigInt& n, const Rational& x, const ObstacleParams& params) {
    return cell_after_rational(n, x, params.alpha());
}

inline Cell cell_after(const BigInt& n, const Rational& x, const RationalTruncation& trunc) {
    trunc.require_in_window(n, "n");
    return cell_after_rational(n, x, trunc.value());
}

/// (x, z) -> (x + alpha, z + Psi(x)), n times.
inline LatticeState skew_product_iterate(LatticeState s, const BigInt& n, const Rational& alpha) {
    for (BigInt k = 0; k < n; ++k) {
        Cell d = displacement_half_open(s.x, alpha);
        s.z.i += d.i;
        s.z.j += d.j;
        s.x = frac(s.x + alpha);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Hitting time

namespace detail {

/// Parameter length of the flight from offset u to the next obstacle along
/// (1, 1); the Euclidean length is sqrt(2) times this.
inline Rational flight(const Rational& u, const ObstacleParams& p) {
    Rational start = u >= (p.b - p.a) / 2 ? Rational(p.b / 2 - u) : Rational(p.a / 2);
    Rational end = u <= (p.a - p.b) / 2 ? Rational(1 - p.b / 2 - u) : Rational(1 - p.a / 2);
    return end - start;
}

inline Rational first_offset(const Rational& x, const ObstacleParams& p) {
    const Rational s = p.scale();
    return s / 2 - s * frac(2 * x);
}

inline Rational second_offset(const Rational& u1, const ObstacleParams& p) {
    return u1 < (p.a - p.b) / 2 ? Rational(u1 + p.b) : Rational(u1 - p.a);
}

}  // namespace detail

/// psi(x) / sqrt(2): parameter time up to the second collision.
inline Rational hitting_time_scaled(const Rational& x, const ObstacleParams& p) {
    Rational u1 = detail::first_offset(x, p);
    return detail::flight(u1, p) + detail::flight(detail::second_offset(u1, p), p);
}

inline double hitting_time(const Rational& x, const ObstacleParams& p) {
    return std::numbers::sqrt2 * hitting_time_scaled(x, p).get_d();
}

/// psi / sqrt(2) as linear pieces covering [0, 1).
inline std::vector<LinearPiece> hitting_time_pieces(const ObstacleParams& p) {
    const Rational s = p.scale();
    const Rational d = (p.a - p.b) / 2;
    std::vector<Rational> cuts{Rational(0), Rational(1, 2)};
    for (const Rational& v : {d, Rational(-d), Rational(d - p.b), Rational(-d - p.b), Rational(d + p.a),
                              Rational(-d + p.a)}) {
        if (v < -s / 2 || v > s / 2) continue;
        Rational t = (s / 2 - v) / s;  // {2x}
        for (Rational x : {Rational(t / 2), Rational(t / 2 + Rational(1, 2))}) {
            x.canonicalize();
            if (x >= 0 && x < 1) cuts.push_back(x);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.push_back(1);
    std::vector<LinearPiece> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const Rational& lo = cuts[i];
        const Rational& hi = cuts[i + 1];
        Rational x1 = lo + (hi - lo) / 3, x2 = lo + 2 * (hi - lo) / 3;
        Rational y1 = hitting_time_scaled(x1, p), y2 = hitting_time_scaled(x2, p);
        Rational slope = (y2 - y1) / (x2 - x1);
        Rational intercept = y1 - slope * x1;
        slope.canonicalize();
        intercept.canonicalize();
        out.push_back({lo, hi, slope, intercept});
    }
    return out;
}

/// int_0^1 psi / sqrt(2), exactly.
inline Rational mean_hitting_time_scaled(const ObstacleParams& p) {
    Rational total = 0;
    for (const auto& piece : hitting_time_pieces(p)) {
        Rational len = piece.end - piece.start;
        total += len * (piece.slope * (piece.start + piece.end) / 2 + piece.intercept);
    }
    total.canonicalize();
    return total;
}

/// c = int psi.
inline double mean_hitting_time(const ObstacleParams& p) {
    return std::numbers::sqrt2 * mean_hitting_time_scaled(p).get_d();
}

// ---------------------------------------------------------------------------
// Ray tracing

struct PathEvent {
    double time = 0;  // Euclidean time since the start
    double x = 0;
    double y = 0;
    long cell_i = 0;  // centre of the obstacle hit
    long cell_j = 0;
    int vx = 0;  // outgoing velocity signs
    int vy = 0;
};

struct RayState {
    double x = 0, y = 0;
    long cell_i = 0, cell_j = 0;
    int vx = 1, vy = 1;
};

/// Exit point and velocity of the state encoded by x, leaving the obstacle at
/// the origin.
inline RayState encode_state(const Rational& x, const ObstacleParams& p) {
    const Rational s = p.scale();
    Rational theta = 2 * s * frac(Rational(1, 2) - x);
    RayState st;
    const Rational half_gap = (p.b - p.a) / 2;
    if (theta < s) {
        Rational u = theta - s / 2;
        st.vx = st.vy = 1;
        if (u >= half_gap) {
            st.x = Rational(p.b / 2 - u).get_d();
            st.y = Rational(p.b / 2).get_d();
        } else {
            st.x = Rational(p.a / 2).get_d();
            st.y = Rational(u + p.a / 2).get_d();
        }
    } else {
        Rational u = 3 * s / 2 - theta;
        st.vx = st.vy = -1;
        if (u <= -half_gap) {
            st.x = Rational(-p.b / 2 - u).get_d();
            st.y = Rational(-p.b / 2).get_d();
        } else {
            st.x = Rational(-p.a / 2).get_d();
            st.y = Rational(u - p.a / 2).get_d();
        }
    }
    return st;
}

/// Circle coordinate of a state leaving with velocity +-(1, 1).
inline double decode_state(const RayState& st, double a, double b) {
    if (st.vx != st.vy) throw DomainError("decode_state needs velocity +-(1, 1)");
    const double s = a + b;
    double u = (st.y - static_cast<double>(st.cell_j)) - (st.x - static_cast<double>(st.cell_i));
    double theta = st.vx > 0 ? u + s / 2 : 3 * s / 2 - u;
    double x = 0.5 - theta / (2 * s);
    return x - std::floor(x);
}

namespace detail {

struct Hit {
    double t = 0;
    long i = 0, j = 0;
    bool vertical = false;
};

/// First obstacle hit by the ray, scanning columns in the direction of travel.
inline Hit next_hit(const RayState& st, double a, double b, long max_columns) {
    const double tol = 1e-12 * std::max(1.0, std::max(std::abs(st.x), std::abs(st.y)));
    const double vx = st.vx, vy = st.vy;
    for (long k = 0; k <= max_columns; ++k) {
        const long col = st.cell_i + k * st.vx;
        const double left = static_cast<double>(col) - a / 2, right = static_cast<double>(col) + a / 2;
        double t0 = (left - st.x) / vx, t1 = (right - st.x) / vx;
        if (t0 > t1) std::swap(t0, t1);
        if (t1 <= tol) continue;
        double ya = st.y + vy * t0, yb = st.y + vy * t1;
        long row_lo = static_cast<long>(std::ceil(std::min(ya, yb) - b / 2 - tol));
        long row_hi = static_cast<long>(std::floor(std::max(ya, yb) + b / 2 + tol));
        bool found = false;
        Hit best;
        for (long row = row_lo; row <= row_hi; ++row) {
            if (col == st.cell_i && row == st.cell_j) continue;
            const double bottom = static_cast<double>(row) - b / 2, top = static_cast<double>(row) + b / 2;
            double s0 = (bottom - st.y) / vy, s1 = (top - st.y) / vy;
            if (s0 > s1) std::swap(s0, s1);
            double enter = std::max(t0, s0), leave = std::min(t1, s1);
            if (enter > leave + tol || enter <= tol) continue;
            if (leave - enter <= tol || std::abs(t0 - s0) <= tol) {
                throw SingularOrbit("singular orbit: corner hit at obstacle (" + std::to_string(col) + ", " +
                                    std::to_string(row) + ")");
            }
            if (!found || enter < best.t) {
                best = {enter, col, row, t0 > s0};
                found = true;
            }
        }
        if (found) return best;
    }
    throw SingularOrbit("no obstacle within " + std::to_string(max_columns) + " columns");
}

}  // namespace detail

/// Event-driven flight with specular reflection; one event per collision.
inline std::vector<PathEvent> ray_trace(RayState st, const ObstacleParams& p, std::size_t collisions,
                                        long max_columns = 1000) {
    const double a = p.a.get_d(), b = p.b.get_d();
    std::vector<PathEvent> out;
    out.reserve(collisions);
    double time = 0;
    for (std::size_t c = 0; c < collisions; ++c) {
        auto hit = detail::next_hit(st, a, b, max_columns);
        st.x += st.vx * hit.t;
        st.y += st.vy * hit.t;
        st.cell_i = hit.i;
        st.cell_j = hit.j;
        if (hit.vertical) st.vx = -st.vx;
        else st.vy = -st.vy;
        time += std::numbers::sqrt2 * hit.t;
        out.push_back({time, st.x, st.y, st.cell_i, st.cell_j, st.vx, st.vy});
    }
    return out;
}

inline std::vector<PathEvent> ray_trace(const Rational& x, const ObstacleParams& p, std::size_t collisions) {
    return ray_trace(encode_state(x, p), p, collisions);
}

inline RayState state_after(const PathEvent& e) { return {e.x, e.y, e.cell_i, e.cell_j, e.vx, e.vy}; }

// ---------------------------------------------------------------------------
// CLT along a plan

/// n^{-1/2} sum_{j=1}^{[ln n]} a_{j+1}.
inline double quotient_window_sum(const PartialQuotientSpec& spec, double n) {
    auto terms = static_cast<std::size_t>(std::floor(std::log(n)));
    double sum = 0;
    for (std::size_t j = 1; j <= terms; ++j) sum += static_cast<double>(spec.a(j + 1));
    return sum / std::sqrt(n);
}

/// The value at n = 10^1, ..., 10^max_exponent.
inline std::vector<double> quotient_window_table(const PartialQuotientSpec& spec, int max_exponent) {
    std::vector<double> out;
    for (int k = 1; k <= max_exponent; ++k) out.push_back(quotient_window_sum(spec, std::pow(10.0, k)));
    return out;
}

struct DriftPoint {
    std::size_t terms = 0;
    double variance = 0;  // empirical variance of S_{L_n} psi
    double ratio = 0;     // variance / n
};

/// Empirical variance of S_{L_n} psi along the plan for each n in `terms`.
inline std::vector<DriftPoint> hitting_time_drift(const SubsequencePlan& plan, const ObstacleParams& params,
                                                  const RationalTruncation& trunc, const Sampler& sampler,
                                                  const std::vector<std::size_t>& terms) {
    if (params.alpha() != trunc.value()) throw DomainError("obstacle alpha differs from the truncation value");
    const auto pieces = hitting_time_pieces(params);
    const Rational c = mean_hitting_time_scaled(params);
    std::vector<DriftPoint> out;
    for (std::size_t n : terms) {
        if (n == 0 || n > plan.size()) throw DomainError("drift terms must lie in 1..plan size");
        const BigInt end = plan.partial_sum(n);
        trunc.require_in_window(end, "L_n");
        std::vector<double> v(sampler.count);
        parallel_for(sampler.count, [&](std::size_t i) {
            Rational x = sample_point(sampler, i);
            // Centre exactly: S_L psi is of size L c, far beyond double precision.
            Rational sum = ergodic_sum_piecewise_linear(pieces, x, end, trunc.alpha_num(), trunc.alpha_den());
            v[i] = Rational(sum - Rational(end) * c).get_d();
        });
        double var = 2 * moments(v).variance;  // psi = sqrt(2) * pieces
        out.push_back({n, var, var / static_cast<double>(n)});
    }
    return out;
}

/// Cell CLT via covariance_2d on the components of Psi, plus the check that
/// the variance of the hitting-time sums grows at most linearly: the last
/// ratio variance / n may exceed the first by at most `drift_slack`.
inline ExperimentReport billiard_clt_experiment(const ObstacleParams& params, const SubsequencePlan& plan,
                                                const RationalTruncation& trunc, const Sampler& sampler,
                                                std::size_t n, const Sampler& drift_sampler,
                                                const std::vector<std::size_t>& drift_terms = {10, 20, 40},
                                                double drift_slack = 1.5) {
    params.validate();
    if (params.alpha() != trunc.value()) throw DomainError("obstacle alpha differs from the truncation value");
    auto r = covariance_2d(plan, billiard_displacement(params.alpha()), trunc, sampler, n);
    r.name = "billiard-clt";
    auto drift = hitting_time_drift(plan, params, trunc, drift_sampler, drift_terms);
    bool drift_ok = drift.back().ratio <= drift_slack * drift.front().ratio;
    for (const auto& d : drift) r.extra["psi_variance_ratio_" + std::to_string(d.terms)] = d.ratio;
    r.extra["psi_drift_bounded"] = drift_ok;
    r.extra["a"] = to_string(params.a);
    r.extra["b"] = to_string(params.b);
    r.extra["mean_hitting_time"] = mean_hitting_time(params);
    r.extra["cell_clt_pass"] = r.pass;
    r.pass = r.pass && drift_ok;
    return r;
}

}  // namespace lacuna
