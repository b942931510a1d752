#pragma once

// Continued fractions of alpha in (0, 1): partial quotients, convergents,
// distances to the nearest integer, Ostrowski digits, and designed alphas.
//
// Alpha is never stored in floating point. A RationalTruncation fixes a level
// M and uses p_M/q_M in its place; every query below q_{M-1} behaves exactly
// as it would for alpha, and queries beyond that raise PrecisionError.

#include "lacuna/bigint.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace lacuna {

class PartialQuotientSpec {
public:
    using Rule = std::function<std::uint64_t(std::size_t)>;

    PartialQuotientSpec(std::string name, Rule rule, std::size_t max_index)
        : name_(std::move(name)),
          rule_(std::make_shared<Rule>(std::move(rule))),
          max_index_(max_index) {}

    /// a_k = 1 for all k: alpha = (sqrt(5) - 1) / 2.
    static PartialQuotientSpec golden(std::size_t max_index = 1'000'000) {
        return {"golden", [](std::size_t) -> std::uint64_t { return 1; }, max_index};
    }

    /// a_k = 2 for all k: alpha = sqrt(2) - 1.
    static PartialQuotientSpec sqrt2(std::size_t max_index = 1'000'000) {
        return {"sqrt2", [](std::size_t) -> std::uint64_t { return 2; }, max_index};
    }

    /// e - 2 = [0; 1, 2, 1, 1, 4, 1, 1, 6, ...].
    static PartialQuotientSpec e_minus_two(std::size_t max_index = 1'000'000) {
        return {"e",
                [](std::size_t k) -> std::uint64_t {
                    return (k + 1) % 3 == 0 ? 2 * ((k + 1) / 3) : 1;
                },
                max_index};
    }

    /// a_k taken from the list; max_index is the list length.
    static PartialQuotientSpec from_list(std::vector<std::uint64_t> a, std::string name = "list") {
        auto data = std::make_shared<const std::vector<std::uint64_t>>(std::move(a));
        std::size_t n = data->size();
        return {std::move(name), [data](std::size_t k) { return (*data)[k - 1]; }, n};
    }

    /// a_k from the list, then 1 forever.
    static PartialQuotientSpec list_then_ones(std::vector<std::uint64_t> a, std::string name,
                                              std::size_t max_index = 1'000'000) {
        auto data = std::make_shared<const std::vector<std::uint64_t>>(std::move(a));
        return {std::move(name),
                [data](std::size_t k) -> std::uint64_t {
                    return k <= data->size() ? (*data)[k - 1] : 1;
                },
                max_index};
    }

    /// a_{stride*m} = ceil(m^beta) + 1 and 1 elsewhere. With beta = 2 and
    /// stride = 3 the large quotients sit at a_3, a_6, a_9, ...
    static PartialQuotientSpec growth(double beta, std::size_t stride,
                                      std::size_t max_index = 1'000'000) {
        if (stride == 0) throw DomainError("growth rule needs stride >= 1");
        std::ostringstream name;
        name << "growth:beta=" << beta << ",stride=" << stride;
        return {name.str(),
                [beta, stride](std::size_t k) -> std::uint64_t {
                    if (k % stride != 0) return 1;
                    double m = static_cast<double>(k / stride);
                    return static_cast<std::uint64_t>(std::ceil(std::pow(m, beta))) + 1;
                },
                max_index};
    }

    std::uint64_t a(std::size_t k) const {
        if (k == 0) throw DomainError("partial quotients are indexed from 1");
        if (k > max_index_) {
            throw PrecisionError("spec exhausted: a_" + std::to_string(k) + " requested but '" +
                                     name_ + "' only defines indices up to " +
                                     std::to_string(max_index_),
                                 k);
        }
        std::uint64_t v = (*rule_)(k);
        if (v == 0) throw DomainError("partial quotient a_" + std::to_string(k) + " is zero");
        return v;
    }

    std::size_t max_index() const noexcept { return max_index_; }
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
    std::shared_ptr<const Rule> rule_;
    std::size_t max_index_;
};

struct Convergent {
    long index = 0;
    BigInt p;
    BigInt q;
};

/// Convergents 0..n by the three-term recurrence, starting from
/// (p_{-1}, q_{-1}) = (1, 0) and (p_0, q_0) = (0, 1).
inline std::vector<Convergent> convergents(const PartialQuotientSpec& spec, std::size_t n) {
    if (n > spec.max_index()) {
        throw PrecisionError("spec exhausted: convergent " + std::to_string(n) +
                                 " needs a_" + std::to_string(n),
                             n);
    }
    std::vector<Convergent> out;
    out.reserve(n + 1);
    BigInt p_prev = 1, q_prev = 0;
    BigInt p = 0, q = 1;
    out.push_back({0, p, q});
    for (std::size_t k = 1; k <= n; ++k) {
        BigInt a = from_u64(spec.a(k));
        BigInt p_next = a * p + p_prev;
        BigInt q_next = a * q + q_prev;
        p_prev = std::move(p);
        q_prev = std::move(q);
        p = std::move(p_next);
        q = std::move(q_next);
        out.push_back({static_cast<long>(k), p, q});
    }
    return out;
}

/// Alpha replaced by its level-M convergent p_M/q_M.
class RationalTruncation {
public:
    RationalTruncation(PartialQuotientSpec spec, std::size_t level)
        : spec_(std::move(spec)), level_(level) {
        if (level_ < 2) throw DomainError("truncation level must be at least 2");
        conv_ = lacuna::convergents(spec_, level_);
        value_ = Rational(conv_.back().p, conv_.back().q);
        value_.canonicalize();
    }

    std::size_t level() const noexcept { return level_; }
    const PartialQuotientSpec& spec() const noexcept { return spec_; }
    const Rational& value() const noexcept { return value_; }
    const BigInt& alpha_num() const noexcept { return conv_.back().p; }
    const BigInt& alpha_den() const noexcept { return conv_.back().q; }
    const std::vector<Convergent>& convergents() const noexcept { return conv_; }

    const BigInt& p(std::size_t n) const { return at(n).p; }
    const BigInt& q(std::size_t n) const { return at(n).q; }
    std::uint64_t a(std::size_t k) const { return spec_.a(k); }

    /// Exclusive bound q_{M-1} on multiples k and orbit lengths N.
    const BigInt& window() const { return conv_[level_ - 1].q; }

    /// Largest convergent index n whose statements are trusted (n < M - 1).
    std::size_t max_trusted_index() const noexcept { return level_ - 2; }

    void require_in_window(const BigInt& n, const char* what) const {
        if (n >= window()) {
            throw PrecisionError(std::string(what) + " = " + to_string(n) +
                                     " is outside the validity window q_{M-1} = " +
                                     to_string(window()) + "; extend the truncation level M",
                                 level_ + 1);
        }
    }

    void require_trusted_index(std::size_t n) const {
        if (n > max_trusted_index()) {
            throw PrecisionError("index " + std::to_string(n) +
                                     " is not below M - 1 = " + std::to_string(level_ - 1) +
                                     "; extend the truncation level M",
                                 n + 2);
        }
    }

private:
    const Convergent& at(std::size_t n) const {
        if (n > level_) throw PrecisionError("convergent index beyond truncation level", n);
        return conv_[n];
    }

    PartialQuotientSpec spec_;
    std::size_t level_;
    std::vector<Convergent> conv_;
    Rational value_;
};

/// ||k alpha|| as an exact rational, for 1 <= k < q_{M-1}.
inline Rational nearest_integer_distance(const BigInt& k, const RationalTruncation& trunc) {
    if (k < 1) throw DomainError("nearest_integer_distance needs k >= 1");
    trunc.require_in_window(k, "k");
    const BigInt& qm = trunc.alpha_den();
    BigInt r = floor_mod(k * trunc.alpha_num(), qm);
    BigInt s = qm - r;
    Rational d(r < s ? r : s, qm);
    d.canonicalize();
    return d;
}

struct OstrowskiDigits {
    std::vector<BigInt> digits;        // b_0 .. b_m
    std::vector<BigInt> partial_sums;  // N_0 .. N_m, N_l = sum_{k<=l} b_k q_k
    BigInt value;

    std::size_t top() const noexcept { return digits.size() - 1; }

    BigInt digit_sum() const {
        BigInt s = 0;
        for (const auto& b : digits) s += b;
        return s;
    }
};

/// Greedy most-significant-first expansion N = sum b_k q_k.
inline OstrowskiDigits ostrowski_digits(const BigInt& n, const RationalTruncation& trunc) {
    if (n < 1) throw DomainError("ostrowski_digits needs N >= 1");
    const std::size_t level = trunc.level();
    if (n >= trunc.q(level)) {
        throw PrecisionError("N = " + to_string(n) + " needs a denominator above q_M", level + 1);
    }
    std::size_t m = 0;
    for (std::size_t k = 0; k <= level; ++k) {
        if (trunc.q(k) <= n) m = k;
        else break;
    }
    OstrowskiDigits out;
    out.digits.assign(m + 1, BigInt(0));
    BigInt rest = n;
    for (std::size_t k = m + 1; k-- > 0;) {
        out.digits[k] = rest / trunc.q(k);
        rest -= out.digits[k] * trunc.q(k);
    }
    BigInt acc = 0;
    out.partial_sums.reserve(m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
        acc += out.digits[k] * trunc.q(k);
        out.partial_sums.push_back(acc);
    }
    out.value = acc;
    return out;
}

/// Checks 0 <= b_0 < a_1, 0 <= b_k <= a_{k+1}, 1 <= b_m <= a_{m+1}.
inline bool ostrowski_constraints_hold(const OstrowskiDigits& d, const RationalTruncation& trunc) {
    const std::size_t m = d.top();
    for (std::size_t k = 0; k <= m; ++k) {
        BigInt cap = from_u64(trunc.a(k + 1));
        if (d.digits[k] < 0 || d.digits[k] > cap) return false;
        if (k == 0 && m > 0 && d.digits[0] > cap - 1) return false;
    }
    if (m > 0 && d.digits[m] < 1) return false;
    return true;
}

struct DesignedAlpha {
    PartialQuotientSpec spec;
    RationalTruncation trunc;
};

/// Truncates the rule `guard` levels beyond the largest index an experiment
/// will query, so every q_n with n <= needed_index is a genuine denominator.
inline DesignedAlpha design_alpha(const PartialQuotientSpec& rule, std::size_t needed_index,
                                  std::size_t guard) {
    if (guard < 2) throw DomainError("guard must be at least 2 (validity window would be empty)");
    RationalTruncation trunc(rule, needed_index + guard);
    return {rule, std::move(trunc)};
}

/// Designed alpha for the parity-constrained subsequence: for k = 1..count
/// there is an index t_k with q_{t_k} odd, p_{t_k} odd for odd k and even for
/// even k, and a_{t_k+1} = ceil(k^beta) + 1. Filler quotients are 1, which
/// cycles (p, q) mod 2 through all three non-zero classes.
inline PartialQuotientSpec parity_rule(double beta, std::size_t count) {
    std::vector<std::uint64_t> a;
    int pp = 1, qp = 0;  // (p, q) mod 2 at n - 1
    int pc = 0, qc = 1;  // at n
    std::size_t k = 1;
    while (k <= count) {
        bool target = !a.empty() && qc == 1 && pc == static_cast<int>(k % 2);
        std::uint64_t next = 1;
        if (target) {
            next = static_cast<std::uint64_t>(std::ceil(std::pow(static_cast<double>(k), beta))) + 1;
            ++k;
        }
        a.push_back(next);
        int pn = static_cast<int>((next % 2) * pc + pp) % 2;
        int qn = static_cast<int>((next % 2) * qc + qp) % 2;
        pp = pc;
        qp = qc;
        pc = pn;
        qc = qn;
    }
    std::ostringstream name;
    name << "parity:beta=" << beta << ",count=" << count;
    return PartialQuotientSpec::list_then_ones(std::move(a), name.str());
}

/// beta = sum_n b_n q_n alpha mod 1, exactly on the truncation.
inline Rational beta_from_ostrowski(const std::vector<BigInt>& b, const RationalTruncation& trunc) {
    Rational acc = 0;
    for (std::size_t n = 0; n < b.size(); ++n) {
        if (b[n] == 0) continue;
        trunc.require_trusted_index(n);
        acc += Rational(b[n] * trunc.q(n)) * trunc.value();
    }
    return frac(acc);
}

/// "golden", "sqrt2", "e", "list:1,2,3", "growth:beta=2,stride=3",
/// "parity:beta=2,count=40".
inline PartialQuotientSpec parse_alpha_spec(const std::string& text);

inline nlohmann::json to_json(const RationalTruncation& t) {
    nlohmann::json a = nlohmann::json::array();
    for (std::size_t k = 1; k <= t.level(); ++k) a.push_back(t.a(k));
    return {{"rule", t.spec().name()},
            {"level", t.level()},
            {"partial_quotients", a},
            {"p", to_string(t.alpha_num())},
            {"q", to_string(t.alpha_den())}};
}

inline RationalTruncation truncation_from_json(const nlohmann::json& j) {
    auto a = j.at("partial_quotients").get<std::vector<std::uint64_t>>();
    auto level = j.at("level").get<std::size_t>();
    if (a.size() != level) throw DomainError("partial_quotients length differs from level");
    RationalTruncation t(PartialQuotientSpec::from_list(std::move(a), j.at("rule").get<std::string>()),
                         level);
    if (to_string(t.alpha_num()) != j.at("p").get<std::string>() ||
        to_string(t.alpha_den()) != j.at("q").get<std::string>()) {
        throw DomainError("stored p_M/q_M does not match the partial quotients");
    }
    return t;
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

/// "beta=2,stride=3" -> lookup by key.
inline std::string param(const std::string& params, const std::string& key, const std::string& fallback) {
    for (const auto& kv : split(params, ',')) {
        auto eq = kv.find('=');
        if (eq != std::string::npos && kv.substr(0, eq) == key) return kv.substr(eq + 1);
    }
    if (fallback.empty()) throw DomainError("missing parameter '" + key + "'");
    return fallback;
}

}  // namespace detail

inline PartialQuotientSpec parse_alpha_spec(const std::string& text) {
    auto colon = text.find(':');
    std::string kind = text.substr(0, colon);
    std::string params = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (kind == "golden") return PartialQuotientSpec::golden();
    if (kind == "sqrt2") return PartialQuotientSpec::sqrt2();
    if (kind == "e") return PartialQuotientSpec::e_minus_two();
    if (kind == "list") {
        std::vector<std::uint64_t> a;
        for (const auto& s : detail::split(params, ',')) a.push_back(std::stoull(s));
        return PartialQuotientSpec::list_then_ones(std::move(a), text);
    }
    if (kind == "growth") {
        return PartialQuotientSpec::growth(std::stod(detail::param(params, "beta", "2")),
                                           std::stoul(detail::param(params, "stride", "3")));
    }
    if (kind == "parity") {
        return parity_rule(std::stod(detail::param(params, "beta", "2")),
                           std::stoul(detail::param(params, "count", "40")));
    }
    throw DomainError("unknown alpha spec '" + text + "'");
}

}  // namespace lacuna
