#pragma once

// Exact integer and rational helpers on top of GMP's C++ bindings.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lacuna {

using BigInt = mpz_class;
using Rational = mpq_class;

/// Thrown when a query falls outside the range where a rational truncation of
/// alpha is guaranteed to behave like alpha itself.
class PrecisionError : public std::runtime_error {
public:
    PrecisionError(const std::string& what, std::size_t required_level)
        : std::runtime_error(what), required_level_(required_level) {}

    std::size_t required_level() const noexcept { return required_level_; }

private:
    std::size_t required_level_;
};

class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline BigInt floor_mod(const BigInt& a, const BigInt& b) {
    BigInt r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline BigInt floor(const Rational& x) {
    return floor_div(x.get_num(), x.get_den());
}

/// num/den in canonical form (gmpxx leaves two-argument construction unreduced).
inline Rational ratio(const BigInt& num, const BigInt& den) {
    if (den == 0) throw DomainError("zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

/// Fractional part {x} in [0, 1).
inline Rational frac(const Rational& x) {
    Rational r(floor_mod(x.get_num(), x.get_den()), x.get_den());
    r.canonicalize();
    return r;
}

/// Distance to the nearest integer.
inline Rational dist_to_int(const Rational& x) {
    Rational f = frac(x);
    Rational g = 1 - f;
    return f < g ? f : g;
}

inline BigInt lcm(const BigInt& a, const BigInt& b) {
    BigInt r;
    mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline BigInt gcd(const BigInt& a, const BigInt& b) {
    BigInt r;
    mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline BigInt pow2(unsigned long k) {
    BigInt r;
    mpz_ui_pow_ui(r.get_mpz_t(), 2, k);
    return r;
}

inline BigInt from_u64(std::uint64_t v) {
    BigInt r;
    mpz_import(r.get_mpz_t(), 1, -1, sizeof(v), 0, 0, &v);
    return r;
}

inline std::uint64_t to_u64(const BigInt& v) {
    if (v < 0 || mpz_sizeinbase(v.get_mpz_t(), 2) > 64) {
        throw DomainError("value does not fit in 64 bits");
    }
    std::uint64_t out = 0;
    mpz_export(&out, nullptr, -1, sizeof(out), 0, 0, v.get_mpz_t());
    return out;
}

inline std::string to_string(const BigInt& v) { return v.get_str(10); }

inline std::string to_string(const Rational& v) { return v.get_str(10); }

/// Nearest double to a rational of arbitrary size (mpq_get_d truncates, which
/// is fine for the statistical paths that consume these values).
inline double to_double(const Rational& v) { return v.get_d(); }

inline BigInt parse_bigint(std::string_view s) {
    BigInt r;
    if (mpz_set_str(r.get_mpz_t(), std::string(s).c_str(), 10) != 0) {
        throw DomainError("not an integer: " + std::string(s));
    }
    return r;
}

/// Accepts "p/q", an integer, or a plain decimal such as "0.25" (read exactly).
inline Rational parse_rational(std::string_view s) {
    std::string str(s);
    if (str.empty()) throw DomainError("empty rational");
    if (auto slash = str.find('/'); slash != std::string::npos) {
        Rational r(parse_bigint(str.substr(0, slash)), parse_bigint(str.substr(slash + 1)));
        if (r.get_den() == 0) throw DomainError("zero denominator: " + str);
        r.canonicalize();
        return r;
    }
    if (auto dot = str.find('.'); dot != std::string::npos) {
        bool neg = str[0] == '-';
        std::string int_part = str.substr(neg ? 1 : 0, dot - (neg ? 1 : 0));
        std::string frac_part = str.substr(dot + 1);
        if (int_part.empty()) int_part = "0";
        BigInt num = parse_bigint(int_part + frac_part);
        BigInt den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_part.size());
        Rational r(num, den);
        r.canonicalize();
        return neg ? Rational(-r) : r;
    }
    return Rational(parse_bigint(str));
}

}  // namespace lacuna
