#pragma once

// Monte Carlo checks of the distributional limits: normalized ergodic sums
// along a subsequence plan, Kolmogorov-Smirnov distances, the Erdos-Fortet
// mixture, Gaposhkin's modified sequence, and exact quasi-orthogonality.

#include "lacuna/bigint.hpp"
#include "lacuna/contfrac.hpp"
#include "lacuna/ergosum.hpp"
#include "lacuna/observables.hpp"
#include "lacuna/parallel.hpp"
#include "lacuna/piecewise.hpp"
#include "lacuna/report.hpp"
#include "lacuna/sequences.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace lacuna {

// ---------------------------------------------------------------------------
// Sampling points

struct Sampler {
    enum class Kind { grid, random };
    Kind kind = Kind::random;
    std::uint64_t seed = 0;
    std::size_t count = 20'000;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Uniform integer in [0, bound) from the counter-based stream (seed, index).
inline BigInt random_below(const BigInt& bound, std::uint64_t seed, std::uint64_t index) {
    std::uint64_t state = seed;
    state = splitmix64(state) ^ (index * 0xD1B54A32D192ED03ULL);
    const std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2) + 64;
    BigInt acc = 0;
    for (std::size_t b = 0; b < bits; b += 64) {
        acc <<= 64;
        acc += from_u64(splitmix64(state));
    }
    return acc % bound;
}

}  // namespace detail

/// Numerator of the i-th point m / 2^bits: the midpoint of stratum i for the
/// grid sampler, a uniform point of stratum i for the random sampler.
inline BigInt sample_numerator(const Sampler& s, std::size_t i, unsigned bits) {
    if (s.count == 0) throw DomainError("sampler needs at least one point");
    BigInt scale = pow2(bits);
    BigInt k = from_u64(s.count);
    BigInt idx = from_u64(i);
    if (s.kind == Sampler::Kind::grid) return ((2 * idx + 1) * scale) / (2 * k);
    BigInt lo = (idx * scale) / k, hi = ((idx + 1) * scale) / k;
    if (hi <= lo) throw DomainError("too many strata for the sampler resolution");
    return lo + detail::random_below(hi - lo, s.seed, i);
}

inline Rational sample_point(const Sampler& s, std::size_t i) { return ratio(sample_numerator(s, i, 64), pow2(64)); }

// ---------------------------------------------------------------------------
// Distribution functions and Kolmogorov-Smirnov distances

inline double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

/// t -> int_0^1 Phi(t / (sqrt 2 |cos pi y|)) dy.
inline double mixture_cdf(double t) {
    if (t == 0) return 0.5;
    const double pi = std::numbers::pi;
    auto integrand = [t, pi](double y) {
        double c = std::cos(pi * y);
        if (c <= 0) return t > 0 ? 1.0 : 0.0;
        return normal_cdf(t / (std::numbers::sqrt2 * c));
    };
    return 2 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 0.5, 15, 1e-12);
}

/// sup_t |F_K(t) - F(t)|.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw DomainError("ks_statistic needs samples");
    std::sort(samples.begin(), samples.end());
    const double k = static_cast<double>(samples.size());
    double d = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = cdf(samples[i]);
        d = std::max({d, (i + 1) / k - f, f - i / k});
    }
    return d;
}

/// sup_t |F_A(t) - F_B(t)| for two empirical distributions.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_two_sample needs samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        double t = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == t) ++i;
        while (j < b.size() && b[j] == t) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

struct Moments {
    double mean = 0;
    double variance = 0;  // population variance
    double second = 0;    // mean of squares
};

inline Moments moments(const std::vector<double>& v) {
    Moments m;
    if (v.empty()) return m;
    for (double x : v) {
        m.mean += x;
        m.second += x * x;
    }
    m.mean /= v.size();
    m.second /= v.size();
    for (double x : v) m.variance += (x - m.mean) * (x - m.mean);
    m.variance /= v.size();
    return m;
}

// ---------------------------------------------------------------------------
// Ergodic sums along a plan

struct SampleSet {
    std::vector<double> values;      // S_{L_n} f(x_i) (or a block of the plan)
    std::vector<double> normalized;  // values / norm
    double norm = 0;                 // empirical L2 norm
    double prediction = 0;           // sum_k ||f_hat_{q_{t_k}}||_2^2 over the block
    Sampler sampler;
    std::size_t from = 0, to = 0;
};

/// Samples of S_{L_to} f - S_{L_from} f at the sampler's points, computed
/// exactly as S_{L_to - L_from} f(x + L_from alpha).
inline SampleSet sample_sums(const SubsequencePlan& plan, const StepFunction& f, const RationalTruncation& trunc,
                             const Sampler& sampler, std::size_t to, std::size_t from = 0) {
    if (to > plan.size() || from > to) throw DomainError("sample_sums needs 0 <= from <= to <= plan size");
    const BigInt end = plan.partial_sum(to), start = plan.partial_sum(from);
    trunc.require_in_window(end, "L_n");
    SampleSet out;
    out.sampler = sampler;
    out.from = from;
    out.to = to;
    out.values.assign(sampler.count, 0.0);
    const Rational shift = frac(Rational(start) * trunc.value());
    const BigInt length = end - start;
    parallel_for(sampler.count, [&](std::size_t i) {
        Rational x = sample_point(sampler, i) + shift;
        out.values[i] = ergodic_sum_rational(f, x, length, trunc.alpha_num(), trunc.alpha_den()).get_d();
    });
    Rational pred = 0;
    for (std::size_t k = from; k < to; ++k) pred += hat_norm_sq_exact(f, plan.q[k]);
    out.prediction = pred.get_d();
    out.norm = std::sqrt(moments(out.values).second);
    out.normalized.resize(out.values.size());
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.normalized[i] = out.norm > 0 ? out.values[i] / out.norm : 0.0;
    }
    return out;
}

/// CLT along the plan: KS distance of the normalized sums to N(0, 1) and the
/// ratio of the empirical ||S_{L_n} f||^2 to the hat-norm prediction.
inline ExperimentReport clt_experiment(const SubsequencePlan& plan, const StepFunction& f,
                                       const RationalTruncation& trunc, const Sampler& sampler, std::size_t n,
                                       double ks_tolerance = 0.03, double ratio_tolerance = 0.1) {
    auto s = sample_sums(plan, f, trunc, sampler, n);
    auto m = moments(s.values);
    ExperimentReport r;
    r.name = "clt";
    r.seed = sampler.seed;
    r.plan_hash = config_hash(to_json(plan));
    r.samples = sampler.count;
    r.mean = m.mean;
    r.variance = m.variance;
    r.ks = ks_statistic(s.normalized, normal_cdf);
    r.reference_cdf = "normal(0,1)";
    r.prediction = s.prediction;
    r.statistic = s.prediction > 0 ? m.second / s.prediction : 0.0;
    r.tolerance = ratio_tolerance;
    bool mean_ok = std::abs(m.mean) <= 3 * std::sqrt(m.variance / std::max<std::size_t>(sampler.count, 1)) + 1e-12;
    r.pass = r.ks <= ks_tolerance && std::abs(r.statistic - 1) <= ratio_tolerance;
    r.extra = {{"observable", f.name()},  {"terms", n},           {"ks_tolerance", ks_tolerance},
               {"variance_ratio", r.statistic}, {"mean_within_3se", mean_ok}, {"L_n", to_string(plan.partial_sum(n))}};
    return r;
}

// ---------------------------------------------------------------------------
// Lacunary sums over dyadic points

namespace detail {

/// {mult * m / 2^bits} to double precision.
inline double dyadic_frac(const BigInt& m, unsigned bits, const BigInt& mult) {
    BigInt r = mult * m;
    mpz_fdiv_r_2exp(r.get_mpz_t(), r.get_mpz_t(), bits);
    if (bits > 64) mpz_fdiv_q_2exp(r.get_mpz_t(), r.get_mpz_t(), bits - 64);
    return std::ldexp(r.get_d(), -static_cast<int>(std::min(bits, 64u)));
}

inline double cos2pi(double y) { return std::cos(2 * std::numbers::pi * y); }

/// cos 2 pi y + cos 4 pi y.
inline double erdos_fortet_f(double y) { return cos2pi(y) + cos2pi(2 * y); }

/// (1/sqrt n) sum_{k=1}^n f(n_k x) with n_k = 2^k - [k in mask], x = m / 2^bits.
inline double lacunary_sum(const BigInt& m, unsigned bits, std::size_t n, const std::vector<bool>& minus_one) {
    double acc = 0;
    BigInt mult = 1;
    for (std::size_t k = 1; k <= n; ++k) {
        mult <<= 1;
        BigInt nk = minus_one[k] ? BigInt(mult - 1) : mult;
        acc += erdos_fortet_f(dyadic_frac(m, bits, nk));
    }
    return acc / std::sqrt(static_cast<double>(n));
}

}  // namespace detail

/// sum_{k=1}^n f((2^k - 1) x) minus the telescoped right-hand side
/// cos 2 pi x + cos 2 pi (2^{n+1} - 2) x + 2 cos(pi x) sum_{k=2}^n cos 2 pi (2^k - 3/2) x.
inline double erdos_fortet_identity_residual(const Rational& x, unsigned n) {
    auto phase = [&](const Rational& mult) { return frac(mult * x).get_d(); };
    double lhs = 0;
    for (unsigned k = 1; k <= n; ++k) lhs += detail::erdos_fortet_f(phase(Rational(pow2(k) - 1)));
    double rhs = detail::cos2pi(phase(1)) + detail::cos2pi(phase(Rational(pow2(n + 1) - 2)));
    double inner = 0;
    for (unsigned k = 2; k <= n; ++k) inner += detail::cos2pi(phase(Rational(pow2(k)) - Rational(3, 2)));
    rhs += 2 * std::cos(std::numbers::pi * x.get_d()) * inner;
    return lhs - rhs;
}

/// Normalized sums (1/sqrt n) sum f((2^k - 1) x) against the Gaussian mixture
/// and against the best-fit single normal law.
inline ExperimentReport erdos_fortet_experiment(std::size_t n, const Sampler& sampler, double ks_tolerance = 0.03,
                                                double separation = 0.02) {
    if (n == 0) throw DomainError("erdos_fortet_experiment needs n >= 1");
    const unsigned bits = static_cast<unsigned>(n) + 64;
    std::vector<bool> all(n + 1, true);
    std::vector<double> v(sampler.count);
    parallel_for(sampler.count, [&](std::size_t i) {
        v[i] = detail::lacunary_sum(sample_numerator(sampler, i, bits), bits, n, all);
    });
    auto m = moments(v);
    double sd = std::sqrt(m.variance);
    ExperimentReport r;
    r.name = "erdos-fortet";
    r.seed = sampler.seed;
    r.samples = sampler.count;
    r.mean = m.mean;
    r.variance = m.variance;
    r.ks = ks_statistic(v, mixture_cdf);
    r.reference_cdf = "mixture(sqrt2|cos pi y|)";
    double ks_normal = ks_statistic(v, [&](double t) { return normal_cdf((t - m.mean) / sd); });
    r.prediction = 1.0;  // variance of the mixture
    r.statistic = r.ks;
    r.tolerance = ks_tolerance;
    r.pass = r.ks <= ks_tolerance && ks_normal >= r.ks + separation;
    r.extra = {{"n", n}, {"ks_best_normal", ks_normal}, {"separation", ks_normal - r.ks},
               {"required_separation", separation}};
    return r;
}

/// #({1..n} intersect I_a), I_a = union over m >= 1 of [m^a, m^a + m].
inline std::uint64_t gaposhkin_count(std::uint64_t n, unsigned a) {
    std::uint64_t count = 0;
    for (std::uint64_t m = 1;; ++m) {
        BigInt lo;
        mpz_ui_pow_ui(lo.get_mpz_t(), m, a);
        if (lo > from_u64(n)) break;
        std::uint64_t l = to_u64(lo), h = std::min(n, l + m);
        count += h - l + 1;
    }
    return count;
}

/// n_k = 2^k against q'_k = 2^k - [k in I_a]: exact mismatch count and the
/// KS distance between the two normalized sums over the same points.
inline ExperimentReport gaposhkin_demo(unsigned a, std::size_t n, const Sampler& sampler,
                                       std::uint64_t count_n = 1'000'000, double count_constant = 2.0,
                                       double ks_tolerance = 0.02) {
    if (a < 5) throw DomainError("gaposhkin_demo needs a >= 5");
    const unsigned bits = static_cast<unsigned>(n) + 64;
    std::vector<bool> none(n + 1, false), modified(n + 1, false);
    for (std::uint64_t m = 1;; ++m) {
        double lo = std::pow(static_cast<double>(m), a);
        if (lo > static_cast<double>(n)) break;
        for (std::uint64_t k = static_cast<std::uint64_t>(lo); k <= static_cast<std::uint64_t>(lo) + m && k <= n; ++k) {
            modified[k] = true;
        }
    }
    std::uint64_t mismatches = gaposhkin_count(n, a);
    std::vector<double> plain(sampler.count), changed(sampler.count);
    parallel_for(sampler.count, [&](std::size_t i) {
        BigInt m = sample_numerator(sampler, i, bits);
        plain[i] = detail::lacunary_sum(m, bits, n, none);
        changed[i] = detail::lacunary_sum(m, bits, n, modified);
    });
    double max_diff = 0;
    for (std::size_t i = 0; i < plain.size(); ++i) max_diff = std::max(max_diff, std::abs(plain[i] - changed[i]));
    const double sup_norm = 2.0;
    double triangle = 2 * sup_norm * static_cast<double>(mismatches) / std::sqrt(static_cast<double>(n));
    std::uint64_t big_count = gaposhkin_count(count_n, a);
    double count_bound = count_constant * std::pow(static_cast<double>(count_n), 2.0 / a);
    auto m = moments(changed);
    ExperimentReport r;
    r.name = "gaposhkin";
    r.seed = sampler.seed;
    r.samples = sampler.count;
    r.mean = m.mean;
    r.variance = m.variance;
    r.ks = ks_two_sample(plain, changed);
    r.reference_cdf = "empirical(n_k = 2^k)";
    r.prediction = 0;
    r.statistic = r.ks;
    r.tolerance = ks_tolerance;
    r.pass = r.ks <= ks_tolerance && static_cast<double>(big_count) <= count_bound && max_diff <= triangle + 1e-9;
    r.extra = {{"a", a},
               {"n", n},
               {"mismatches", mismatches},
               {"count_n", count_n},
               {"count", big_count},
               {"count_bound", count_bound},
               {"count_constant", count_constant},
               {"max_abs_difference", max_diff},
               {"triangle_bound", triangle}};
    return r;
}

// ---------------------------------------------------------------------------
// Quasi-orthogonality of dilations

/// x -> f(b x) as a uniform-slope function.
inline UniformSlopeFunction dilate(const StepFunction& f, long b) {
    if (b < 1) throw DomainError("dilate needs b >= 1");
    UniformSlopeFunction out{f.slope() * b, {}};
    for (const auto& j : f.jumps()) {
        for (long i = 0; i < b; ++i) out.jumps.push_back({(j.at + i) / b, j.size});
    }
    return out;
}

inline std::complex<double> fourier_coefficient(const StepFunction& f, const BigInt& r) {
    return fourier_gamma(f, r) / r.get_d();
}

struct ResonanceSum {
    double value;  // int f(l1 x) g(l2 x) dx
    double tail_bound;
    bool exact;
};

/// int f(l1 x) g(l2 x) dx. With d = gcd, a = l2/d, b = l1/d this equals
/// int f(b y) g(a y) dy, computed exactly when (a + b) * #jumps <= cap and
/// otherwise from 2 Re sum_{j<=J} c_{aj}(f) conj(c_{bj}(g)).
inline ResonanceSum dilation_inner_product(const StepFunction& f, const StepFunction& g, const BigInt& l1,
                                           const BigInt& l2, long j_max = 2000, long cap = 20'000) {
    if (l1 < 1 || l2 < 1) throw DomainError("dilations need positive integers");
    BigInt d = gcd(l1, l2);
    BigInt a = l2 / d, b = l1 / d;
    const BigInt work = (a + b) * static_cast<unsigned long>(std::max(f.jumps().size(), g.jumps().size()));
    if (work <= cap) {
        Rational v = inner_product(dilate(f, b.get_si()), dilate(g, a.get_si()));
        return {v.get_d(), 0.0, true};
    }
    double acc = 0;
    for (long j = 1; j <= j_max; ++j) {
        acc += 2 * std::real(fourier_coefficient(f, BigInt(a * j)) * std::conj(fourier_coefficient(g, BigInt(b * j))));
    }
    double tail = 2 * f.fourier_bound() * g.fourier_bound() / (BigInt(a * b).get_d() * static_cast<double>(j_max));
    return {acc, tail, false};
}

/// R(f, t) = (sum_{|r| >= t} |c_r|^2)^{1/2}, from the exact norm minus the
/// low coefficients.
inline double tail_energy(const StepFunction& f, double t, long r_limit = 1'000'000) {
    long below = static_cast<long>(std::ceil(t)) - 1;
    if (below > r_limit) throw DomainError("tail_energy: threshold too large for direct subtraction");
    double acc = f.l2_norm_sq().get_d();
    for (long r = 1; r <= below; ++r) acc -= 2 * std::norm(fourier_coefficient(f, r));
    return std::sqrt(std::max(acc, 0.0));
}

struct QuasiOrthogonality {
    double lhs;  // |int f(l1 x) g(l2 x) dx|
    double rhs;  // R(f, l2 / l1) ||g||_2
    double tail_bound;
    bool holds;
};

inline QuasiOrthogonality quasi_orthogonality_check(const StepFunction& f, const StepFunction& g, const BigInt& l1,
                                                    const BigInt& l2) {
    if (l1 < 1 || l2 < l1) throw DomainError("quasi_orthogonality_check needs l2 >= l1 >= 1");
    auto ip = dilation_inner_product(f, g, l1, l2);
    double rhs = tail_energy(f, ratio(l2, l1).get_d()) * std::sqrt(g.l2_norm_sq().get_d());
    double lhs = std::abs(ip.value);
    return {lhs, rhs, ip.tail_bound, lhs <= rhs * (1 + 1e-12) + 1e-15};
}

/// ||sum_k f_k(n_k .)||^2 / sum_k ||f_k||^2, cross terms from dilation inner products.
inline double lacunary_block_ratio(const std::vector<StepFunction>& fs, const std::vector<BigInt>& n,
                                   double* tail = nullptr) {
    if (fs.size() != n.size() || fs.empty()) throw DomainError("lacunary_block_ratio needs matching nonempty lists");
    double diag = 0, total = 0, tails = 0;
    for (const auto& f : fs) diag += f.l2_norm_sq().get_d();
    total = diag;
    for (std::size_t k = 0; k < fs.size(); ++k) {
        for (std::size_t l = k + 1; l < fs.size(); ++l) {
            auto ip = dilation_inner_product(fs[k], fs[l], n[k], n[l], 500);
            total += 2 * ip.value;
            tails += 2 * ip.tail_bound;
        }
    }
    if (tail) *tail = tails / diag;
    return total / diag;
}

/// Random catalog member (phi0, indicator, double_interval, half_shifted).
inline StepFunction random_catalog_member(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, 3);
    std::uniform_int_distribution<long> num(1, 1023);
    auto param = [&] { return ratio(num(rng), 1024); };
    switch (pick(rng)) {
        case 0: return phi0();
        case 1: return indicator(param());
        case 2: return double_interval(param(), param());
        default: return half_shifted(ratio(num(rng), 2048));
    }
}

/// Block variance for rho-lacunary sequences: for each trial draws `terms`
/// catalog functions and n_{k+1} in [rho n_k, (rho + 1) n_k); reports the
/// smallest and largest ratio ||sum f_k(n_k .)||^2 / sum ||f_k||^2.
inline ExperimentReport block_variance_experiment(std::size_t trials, std::size_t terms, long rho,
                                                  std::uint64_t seed, double floor = 0.5) {
    std::mt19937_64 rng(seed);
    double lo = INFINITY, hi = 0, tail = 0;
    std::vector<double> ratios;
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<StepFunction> fs;
        std::vector<BigInt> n;
        BigInt current = 1;
        for (std::size_t k = 0; k < terms; ++k) {
            fs.push_back(random_catalog_member(rng));
            n.push_back(current);
            BigInt step = detail::random_below(current, rng(), k);
            current = current * rho + step;
        }
        double tl = 0;
        double c = lacunary_block_ratio(fs, n, &tl);
        tail = std::max(tail, tl);
        ratios.push_back(c);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    ExperimentReport r;
    r.name = "block-variance";
    r.seed = seed;
    r.samples = trials;
    r.mean = moments(ratios).mean;
    r.variance = moments(ratios).variance;
    r.reference_cdf = "none";
    r.prediction = 1.0;
    r.statistic = lo;
    r.tolerance = floor;
    r.pass = lo - tail >= floor;
    r.extra = {{"rho", rho}, {"terms", terms}, {"min_ratio", lo}, {"max_ratio", hi}, {"relative_tail", tail}};
    return r;
}

// ---------------------------------------------------------------------------
// Two-dimensional covariance

struct Covariance2 {
    std::array<std::array<double, 2>, 2> c{};
    double directional(double u, double v) const {
        return u * u * c[0][0] + 2 * u * v * c[0][1] + v * v * c[1][1];
    }
};

/// Exact per-term prediction (1/n) sum_k <psi_hat^i_q, psi_hat^j_q>.
inline Covariance2 predicted_covariance(const SubsequencePlan& plan, const VectorObservable& psi, std::size_t n) {
    Covariance2 out;
    for (std::size_t k = 0; k < n; ++k) {
        std::array<UniformSlopeFunction, 2> h{hat_observable(psi.first, plan.q[k]).as_uniform_slope(),
                                              hat_observable(psi.second, plan.q[k]).as_uniform_slope()};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out.c[i][j] += inner_product(h[i], h[j]).get_d();
    }
    for (auto& row : out.c)
        for (auto& v : row) v /= static_cast<double>(n);
    return out;
}

/// Empirical covariance of n^{-1/2} psi_{L_n}; contract: near diag(1/2, 1/2)
/// on a parity-certified plan. Directional variances (u^2 + v^2) / 2.
inline ExperimentReport covariance_2d(const SubsequencePlan& plan, const VectorObservable& psi,
                                      const RationalTruncation& trunc, const Sampler& sampler, std::size_t n,
                                      double entry_tolerance = 0.1, double directional_tolerance = 0.1) {
    if (!plan.parity) throw DomainError("covariance_2d needs a parity-certified plan");
    if (n == 0 || n > plan.size()) throw DomainError("covariance_2d needs 1 <= n <= plan size");
    const BigInt end = plan.partial_sum(n);
    trunc.require_in_window(end, "L_n");
    std::vector<double> s1(sampler.count), s2(sampler.count);
    const double scale = 1 / std::sqrt(static_cast<double>(n));
    parallel_for(sampler.count, [&](std::size_t i) {
        Rational x = sample_point(sampler, i);
        s1[i] = ergodic_sum_rational(psi.first, x, end, trunc.alpha_num(), trunc.alpha_den()).get_d() * scale;
        s2[i] = ergodic_sum_rational(psi.second, x, end, trunc.alpha_num(), trunc.alpha_den()).get_d() * scale;
    });
    auto m1 = moments(s1), m2 = moments(s2);
    Covariance2 cov;
    cov.c[0][0] = m1.variance;
    cov.c[1][1] = m2.variance;
    for (std::size_t i = 0; i < s1.size(); ++i) cov.c[0][1] += (s1[i] - m1.mean) * (s2[i] - m2.mean);
    cov.c[0][1] /= static_cast<double>(s1.size());
    cov.c[1][0] = cov.c[0][1];
    auto pred = predicted_covariance(plan, psi, n);

    bool entries_ok = std::abs(cov.c[0][0] - 0.5) <= entry_tolerance && std::abs(cov.c[1][1] - 0.5) <= entry_tolerance &&
                      std::abs(cov.c[0][1]) <= entry_tolerance;
    double worst_directional = 0;
    nlohmann::json extra{{"terms", n},
                         {"cov11", cov.c[0][0]},
                         {"cov12", cov.c[0][1]},
                         {"cov22", cov.c[1][1]},
                         {"predicted_cov11", pred.c[0][0]},
                         {"predicted_cov12", pred.c[0][1]},
                         {"predicted_cov22", pred.c[1][1]}};
    for (auto [u, v] : std::array<std::pair<double, double>, 3>{{{1, 0}, {0, 1}, {1, 1}}}) {
        double target = (u * u + v * v) / 2;
        double got = cov.directional(u, v);
        double rel = std::abs(got / target - 1);
        worst_directional = std::max(worst_directional, rel);
        std::string key = "directional_" + std::to_string(static_cast<int>(u)) + "_" + std::to_string(static_cast<int>(v));
        extra[key] = got;
    }
    // 1D CLT for the direction (1, 1): KS of the normalized combination. The
    // sums are integers, so each gets a uniform jitter in (-1/2, 1/2) first.
    std::vector<double> comb(s1.size());
    std::uint64_t jitter_state = sampler.seed ^ 0x6a09e667f3bcc909ULL;
    for (std::size_t i = 0; i < s1.size(); ++i) {
        double jitter = static_cast<double>(detail::splitmix64(jitter_state) >> 11) * 0x1.0p-53 - 0.5;
        comb[i] = s1[i] + s2[i] + jitter * scale;
    }
    double sd = std::sqrt(moments(comb).second);
    for (auto& v : comb) v /= sd;

    ExperimentReport r;
    r.name = "covariance-2d";
    r.seed = sampler.seed;
    r.plan_hash = config_hash(to_json(plan));
    r.samples = sampler.count;
    r.mean = m1.mean;
    r.variance = m1.variance;
    r.ks = ks_statistic(comb, normal_cdf);
    r.reference_cdf = "normal(0,1) for psi1 + psi2";
    r.prediction = 0.5;
    r.statistic = worst_directional;
    r.tolerance = directional_tolerance;
    r.pass = entries_ok && worst_directional <= directional_tolerance;
    extra["worst_directional_relative_error"] = worst_directional;
    extra["entries_within_tolerance"] = entries_ok;
    r.extra = std::move(extra);
    return r;
}

}  // namespace lacuna
