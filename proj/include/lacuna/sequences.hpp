#pragma once

// Subsequences of denominators along which normalized ergodic sums become
// Gaussian: growth plans (a_{t_k+1} >= k^beta), parity plans for the vector
// observable, and finite-window certificates for lacunarity and for the
// representation-count condition D_m.

#include "lacuna/bigint.hpp"
#include "lacuna/contfrac.hpp"
#include "lacuna/observables.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace lacuna {

class PlanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SubsequencePlan {
    std::vector<std::size_t> t;  // t_1 .. t_n (stored 0-based: t[k-1] = t_k)
    std::vector<BigInt> q;       // q_{t_k}
    std::vector<BigInt> p;       // p_{t_k}
    std::vector<BigInt> L;       // L_1 .. L_n
    double beta = 2.0;
    bool growth = false;
    bool parity = false;
    bool lacunary = false;  // q_{t_{k+1}} / q_{t_k} >= rho > 1 for all k
    Rational rho;           // exact min ratio (0 for plans with one term)
    std::string spec_name;

    std::size_t size() const noexcept { return t.size(); }
    std::size_t max_index() const { return t.empty() ? 0 : t.back(); }

    /// L_n for n = 0..size(); L_0 = 0.
    BigInt partial_sum(std::size_t n) const { return n == 0 ? BigInt(0) : L.at(n - 1); }
};

namespace detail {

/// a >= k^beta, exactly when beta is an integer.
inline bool meets_growth(std::uint64_t a, std::size_t k, double beta) {
    double rounded = std::round(beta);
    if (std::abs(beta - rounded) < 1e-12 && rounded >= 0) {
        BigInt power;
        mpz_ui_pow_ui(power.get_mpz_t(), k, static_cast<unsigned long>(rounded));
        return from_u64(a) >= power;
    }
    return static_cast<double>(a) >= std::pow(static_cast<double>(k), beta);
}

inline void finish_plan(SubsequencePlan& plan, const PartialQuotientSpec& spec) {
    if (plan.t.empty()) return;
    auto conv = convergents(spec, plan.max_index());
    BigInt acc = 0;
    for (std::size_t idx : plan.t) {
        plan.q.push_back(conv[idx].q);
        plan.p.push_back(conv[idx].p);
        acc += conv[idx].q;
        plan.L.push_back(acc);
    }
    for (std::size_t i = 1; i < plan.q.size(); ++i) {
        Rational r = ratio(plan.q[i], plan.q[i - 1]);
        if (i == 1 || r < plan.rho) plan.rho = r;
    }
    plan.lacunary = plan.q.size() >= 2 && plan.rho > 1;
}

}  // namespace detail

/// Smallest t_1 < t_2 < ... with a_{t_k+1} >= k^beta, scanning indices up to
/// `search_limit` (or the spec's end).
inline SubsequencePlan plan_growth(const PartialQuotientSpec& spec, double beta, std::size_t count,
                                   std::size_t search_limit = 100'000) {
    if (beta <= 1) throw DomainError("plan_growth needs beta > 1");
    SubsequencePlan plan;
    plan.beta = beta;
    plan.spec_name = spec.name();
    std::size_t limit = std::min(search_limit, spec.max_index() - 1);
    std::size_t t = 1;
    for (std::size_t k = 1; k <= count; ++k) {
        while (t <= limit && !detail::meets_growth(spec.a(t + 1), k, beta)) ++t;
        if (t > limit) {
            throw PlanError("insufficient partial quotients: no index t with a_{t+1} >= " + std::to_string(k) +
                            "^beta for term " + std::to_string(k) + " up to index " + std::to_string(limit));
        }
        plan.t.push_back(t);
        ++t;
    }
    plan.growth = true;
    detail::finish_plan(plan, spec);
    return plan;
}

/// Growth plan that also has q_{t_k} odd, p_{t_k} odd for odd k and even for
/// even k; parities follow the recurrence mod 2.
inline SubsequencePlan plan_parity(const PartialQuotientSpec& spec, double beta, std::size_t count,
                                   std::size_t search_limit = 100'000) {
    if (beta <= 1) throw DomainError("plan_parity needs beta > 1");
    SubsequencePlan plan;
    plan.beta = beta;
    plan.spec_name = spec.name();
    std::size_t limit = std::min(search_limit, spec.max_index() - 1);
    int pp = 1, qp = 0, pc = 0, qc = 1;  // (p, q) mod 2 at n - 1 and n, starting at n = 0
    std::ostringstream stream;
    std::size_t n = 0;
    for (std::size_t k = 1; k <= count; ++k) {
        for (;;) {
            if (n >= limit) {
                throw PlanError("parity pattern unavailable for term " + std::to_string(k) +
                                " up to index " + std::to_string(limit) +
                                "; (p, q) mod 2 stream from n = 0: " + stream.str());
            }
            std::uint64_t a_next = spec.a(n + 1);
            bool ok = n >= 1 && qc == 1 && pc == static_cast<int>(k % 2) && detail::meets_growth(a_next, k, beta);
            if (n < 24) stream << "(" << pc << "," << qc << ")";
            // Step to n + 1.
            int an = static_cast<int>(a_next % 2);
            int pn = (an * pc + pp) % 2, qn = (an * qc + qp) % 2;
            pp = pc;
            qp = qc;
            pc = pn;
            qc = qn;
            ++n;
            if (ok) {
                plan.t.push_back(n - 1);
                break;
            }
        }
    }
    plan.growth = true;
    plan.parity = true;
    detail::finish_plan(plan, spec);
    return plan;
}

/// Checks every certificate flag against the stored data from scratch.
inline bool verify_plan(const SubsequencePlan& plan, const PartialQuotientSpec& spec) {
    if (plan.t.empty()) return true;
    auto conv = convergents(spec, plan.max_index());
    BigInt acc = 0;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        std::size_t idx = plan.t[i];
        if (i > 0 && idx <= plan.t[i - 1]) return false;
        if (conv[idx].q != plan.q[i]) return false;
        acc += conv[idx].q;
        if (acc != plan.L[i]) return false;
        if (plan.growth && !detail::meets_growth(spec.a(idx + 1), i + 1, plan.beta)) return false;
        if (plan.lacunary && i > 0 && ratio(plan.q[i], plan.q[i - 1]) < plan.rho) return false;
        if (plan.parity) {
            std::size_t k = i + 1;
            if (!mpz_odd_p(conv[idx].q.get_mpz_t())) return false;
            if ((mpz_odd_p(conv[idx].p.get_mpz_t()) != 0) != (k % 2 == 1)) return false;
        }
    }
    return true;
}

using ParityClass = std::array<int, 2>;                // (p mod 2, q mod 2)
using ParityTriple = std::array<ParityClass, 3>;     // consecutive (n, n+1, n+2)

/// All parity triples [(p_n,q_n), (p_{n+1},q_{n+1}), (p_{n+2},q_{n+2})] that
/// the recurrence allows when a_{n+2} has the given parity.
inline std::set<ParityTriple> parity_triples(bool a_next_even) {
    const std::array<ParityClass, 3> classes{{{0, 1}, {1, 0}, {1, 1}}};
    std::set<ParityTriple> out;
    for (const auto& c0 : classes) {
        for (const auto& c1 : classes) {
            if (c0 == c1) continue;  // consecutive convergents have odd determinant
            int a = a_next_even ? 0 : 1;
            ParityClass c2{(a * c1[0] + c0[0]) % 2, (a * c1[1] + c0[1]) % 2};
            out.insert({c0, c1, c2});
        }
    }
    return out;
}

struct LacunaryCertificate {
    Rational rho;             // min n_{k+1} / n_k over the window
    Rational tail_rho;        // min ratio over the second half of the window
    bool lacunary = false;    // rho >= threshold
    bool superlacunary = false;
};

/// Exact ratio certificate. The superlacunary flag is a finite-window
/// heuristic: ratios in the second half are at least max(4, 2 rho).
inline LacunaryCertificate check_lacunarity(const std::vector<BigInt>& n, const Rational& threshold = Rational(3, 2)) {
    if (n.size() < 2) throw DomainError("check_lacunarity needs at least two terms");
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (n[i] <= 0) throw DomainError("check_lacunarity needs positive terms");
        if (i > 0 && n[i] <= n[i - 1]) throw DomainError("check_lacunarity needs a strictly increasing sequence");
    }
    LacunaryCertificate c;
    const std::size_t half = (n.size() - 1) / 2;
    for (std::size_t i = 0; i + 1 < n.size(); ++i) {
        Rational r = ratio(n[i + 1], n[i]);
        if (i == 0 || r < c.rho) c.rho = r;
        if (i >= half && (i == half || r < c.tail_rho)) c.tail_rho = r;
    }
    c.lacunary = c.rho >= threshold;
    Rational need = std::max(Rational(4), Rational(2 * c.rho));
    c.superlacunary = c.lacunary && n.size() >= 4 && c.tail_rho >= need;
    return c;
}

struct DmReport {
    long m;
    std::size_t window;
    long max_plus;      // max over nu of #{t n_k + s n_l = nu}
    long max_minus;     // max over nu of #{t n_k - s n_l = nu}
    long max_combined;  // both signs together
};

/// Exact representation counts nu = t n_k +- s n_l with 1 <= t, s <= m,
/// k > l, over the first `window` terms; nu = 0 is ignored.
inline DmReport check_dm(const std::vector<BigInt>& n, long m, std::size_t window = 0) {
    if (m < 1) throw DomainError("check_dm needs m >= 1");
    if (window == 0 || window > n.size()) window = n.size();
    std::map<BigInt, long> plus, minus, both;
    for (std::size_t k = 0; k < window; ++k) {
        for (std::size_t l = 0; l < k; ++l) {
            for (long t = 1; t <= m; ++t) {
                for (long s = 1; s <= m; ++s) {
                    BigInt a = n[k] * t + n[l] * s;
                    BigInt b = n[k] * t - n[l] * s;
                    ++plus[a];
                    ++both[a];
                    if (b != 0) {
                        ++minus[b];
                        ++both[b];
                    }
                }
            }
        }
    }
    auto max_of = [](const std::map<BigInt, long>& mp) {
        long best = 0;
        for (const auto& [nu, c] : mp) best = std::max(best, c);
        return best;
    };
    return {m, window, max_of(plus), max_of(minus), max_of(both)};
}

/// (1/n) sum_{k<=n} ||f_hat_{q_{t_k}}||_2^2, computed exactly per term.
inline double nondegeneracy_average(const SubsequencePlan& plan, const StepFunction& f, std::size_t n) {
    if (n == 0 || n > plan.size()) throw DomainError("nondegeneracy_average needs 1 <= n <= plan size");
    Rational acc = 0;
    for (std::size_t k = 0; k < n; ++k) acc += hat_norm_sq_exact(f, plan.q[k]);
    return acc.get_d() / static_cast<double>(n);
}

inline nlohmann::json to_json(const SubsequencePlan& plan) {
    nlohmann::json t = nlohmann::json::array(), l = nlohmann::json::array();
    for (auto idx : plan.t) t.push_back(idx);
    for (const auto& v : plan.L) l.push_back(to_string(v));
    return {{"spec", plan.spec_name}, {"beta", plan.beta},   {"t", t},
            {"L", l},                 {"growth", plan.growth}, {"parity", plan.parity},
            {"lacunary", plan.lacunary}, {"rho", plan.rho.get_str()}};
}

}  // namespace lacuna
