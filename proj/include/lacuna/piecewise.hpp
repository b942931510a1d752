#pragma once

// Exact integration of zero-mean 1-periodic functions that are linear with one
// common slope between finitely many jumps. Ergodic sums, dilations and the
// periodic approximants of catalog observables all have this shape, so their
// L2 norms and inner products can be computed without quadrature error.

#include "lacuna/bigint.hpp"

#include <algorithm>
#include <utility>
#include <vector>

namespace lacuna {

struct Jump {
    Rational at;    // position in [0, 1)
    Rational size;  // f(at+) - f(at-)
};

/// f(y) = slope * y + c_i between consecutive jumps on [0, 1), normalized to
/// mean zero. Periodicity forces slope + sum(sizes) = 0.
struct UniformSlopeFunction {
    Rational slope;
    std::vector<Jump> jumps;
};

namespace detail {

/// Sorts, merges coincident positions and drops zero jumps.
inline std::vector<Jump> normalize_jumps(std::vector<Jump> jumps) {
    for (auto& j : jumps) j.at = frac(j.at);
    std::sort(jumps.begin(), jumps.end(), [](const Jump& a, const Jump& b) { return a.at < b.at; });
    std::vector<Jump> out;
    out.reserve(jumps.size());
    for (auto& j : jumps) {
        if (!out.empty() && out.back().at == j.at) {
            out.back().size += j.size;
        } else {
            out.push_back(std::move(j));
        }
    }
    std::erase_if(out, [](const Jump& j) { return j.size == 0; });
    return out;
}

/// Pieces [start_i, end_i) with offsets c_i such that f = slope*y + c_i there.
struct Piece {
    Rational start;
    Rational end;
    Rational offset;
};

inline std::vector<Piece> pieces_of(const UniformSlopeFunction& f) {
    std::vector<Jump> jumps = normalize_jumps(f.jumps);
    Rational total = f.slope;
    for (const auto& j : jumps) total += j.size;
    if (total != 0) throw DomainError("slope and jumps are not consistent with periodicity");

    // Offsets before fixing the constant: prefix sums of jumps strictly inside (0, 1).
    std::vector<Piece> out;
    Rational prefix = 0;
    Rational start = 0;
    for (const auto& j : jumps) {
        if (j.at == 0) continue;
        out.push_back({start, j.at, prefix});
        prefix += j.size;
        start = j.at;
    }
    out.push_back({start, Rational(1), prefix});

    // Mean zero: slope/2 + C + sum len_i * prefix_i = 0.
    Rational weighted = f.slope / 2;
    for (const auto& p : out) weighted += (p.end - p.start) * p.offset;
    for (auto& p : out) p.offset -= weighted;
    return out;
}

/// Integral over [a, b) of (s1 y + c1)(s2 y + c2).
inline Rational integrate_product(const Rational& a, const Rational& b, const Rational& s1,
                                  const Rational& c1, const Rational& s2, const Rational& c2) {
    Rational d1 = b - a;
    Rational d2 = b * b - a * a;
    Rational d3 = b * b * b - a * a * a;
    return s1 * s2 * d3 / 3 + (s1 * c2 + s2 * c1) * d2 / 2 + c1 * c2 * d1;
}

}  // namespace detail

inline Rational l2_norm_sq(const UniformSlopeFunction& f) {
    Rational acc = 0;
    for (const auto& p : detail::pieces_of(f)) {
        acc += detail::integrate_product(p.start, p.end, f.slope, p.offset, f.slope, p.offset);
    }
    return acc;
}

/// Integral over [0, 1) of f * g, both real-valued.
inline Rational inner_product(const UniformSlopeFunction& f, const UniformSlopeFunction& g) {
    auto pf = detail::pieces_of(f);
    auto pg = detail::pieces_of(g);
    Rational acc = 0;
    std::size_t i = 0, k = 0;
    Rational start = 0;
    while (i < pf.size() && k < pg.size()) {
        const Rational& end = pf[i].end < pg[k].end ? pf[i].end : pg[k].end;
        if (end > start) {
            acc += detail::integrate_product(start, end, f.slope, pf[i].offset, g.slope, pg[k].offset);
        }
        start = end;
        if (pf[i].end == end) ++i;
        if (pg[k].end == end) ++k;
    }
    return acc;
}

/// Value at y in [0, 1) (left-closed pieces).
inline Rational evaluate(const UniformSlopeFunction& f, const Rational& y) {
    Rational t = frac(y);
    for (const auto& p : detail::pieces_of(f)) {
        if (t >= p.start && t < p.end) return f.slope * t + p.offset;
    }
    throw DomainError("point outside [0, 1)");
}

}  // namespace lacuna
