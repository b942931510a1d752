#pragma once

// Euclid-style floor sums. These make orbit counting for a rational rotation
// cost O(log max(a, c)) big-integer steps instead of O(n).

#include "lacuna/bigint.hpp"

#include <utility>

namespace lacuna {

/// sum_{j=0}^{n-1} floor((a*j + b) / c) for any signs of a and b, c >= 1.
inline BigInt floor_sum(BigInt n, BigInt a, BigInt b, BigInt c) {
    if (c <= 0) throw DomainError("floor_sum needs c >= 1");
    if (n < 0) throw DomainError("floor_sum needs n >= 0");
    BigInt ans = 0;
    if (n == 0) return ans;
    // Bring a and b into [0, c).
    {
        BigInt qa = floor_div(a, c);
        BigInt qb = floor_div(b, c);
        ans += qa * (n * (n - 1) / 2) + qb * n;
        a -= qa * c;
        b -= qb * c;
    }
    for (;;) {
        if (a >= c) {
            ans += (n * (n - 1) / 2) * (a / c);
            a %= c;
        }
        if (b >= c) {
            ans += n * (b / c);
            b %= c;
        }
        BigInt y_max = a * n + b;
        if (y_max < c) break;
        n = y_max / c;
        b = y_max % c;
        std::swap(c, a);
    }
    return ans;
}

/// The three moments f = sum floor(y_j), g = sum j floor(y_j),
/// h = sum floor(y_j)^2 over j = 0..n-1 with y_j = (a*j + b)/c.
struct FloorMoments {
    BigInt f = 0;
    BigInt g = 0;
    BigInt h = 0;
};

namespace detail {

// Inclusive upper index `last`, 0 <= a, 0 <= b. Recursion depth is O(log c).
inline FloorMoments floor_moments_inclusive(const BigInt& a, const BigInt& b, const BigInt& c,
                                            const BigInt& last) {
    const BigInt& n = last;
    BigInt s1 = n * (n + 1) / 2;
    BigInt s2 = n * (n + 1) * (2 * n + 1) / 6;
    FloorMoments out;
    if (a == 0) {
        BigInt bc = b / c;
        out.f = (n + 1) * bc;
        out.g = bc * s1;
        out.h = (n + 1) * bc * bc;
        return out;
    }
    if (a >= c || b >= c) {
        BigInt qa = a / c, qb = b / c;
        FloorMoments r = floor_moments_inclusive(a % c, b % c, c, n);
        out.f = r.f + qa * s1 + qb * (n + 1);
        out.g = r.g + qa * s2 + qb * s1;
        out.h = r.h + 2 * qb * r.f + 2 * qa * r.g + qa * qa * s2 + qb * qb * (n + 1) +
                2 * qa * qb * s1;
        return out;
    }
    BigInt m = (a * n + b) / c;
    if (m == 0) return out;
    FloorMoments r = floor_moments_inclusive(c, c - b - 1, a, m - 1);
    out.f = n * m - r.f;
    out.g = (m * n * (n + 1) - r.h - r.f) / 2;
    out.h = n * m * (m + 1) - 2 * r.g - 2 * r.f - out.f;
    return out;
}

}  // namespace detail

/// Moments over j = 0..n-1; a and b may be negative, c >= 1.
inline FloorMoments floor_moments(const BigInt& n, const BigInt& a, const BigInt& b, const BigInt& c) {
    if (c <= 0) throw DomainError("floor_moments needs c >= 1");
    if (n < 0) throw DomainError("floor_moments needs n >= 0");
    FloorMoments out;
    if (n == 0) return out;
    BigInt qa = floor_div(a, c), qb = floor_div(b, c);
    BigInt ra = a - qa * c, rb = b - qb * c;
    BigInt last = n - 1;
    FloorMoments r = detail::floor_moments_inclusive(ra, rb, c, last);
    BigInt s1 = last * n / 2;
    BigInt s2 = last * n * (2 * last + 1) / 6;
    out.f = r.f + qa * s1 + qb * n;
    out.g = r.g + qa * s2 + qb * s1;
    out.h = r.h + 2 * qb * r.f + 2 * qa * r.g + qa * qa * s2 + qb * qb * n + 2 * qa * qb * s1;
    return out;
}

}  // namespace lacuna
