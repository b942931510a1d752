#include "lacuna/stats.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lacuna;

namespace {

struct Designed {
    PartialQuotientSpec spec;
    SubsequencePlan plan;
    RationalTruncation trunc;
};

Designed growth_setup(std::size_t terms) {
    auto spec = PartialQuotientSpec::growth(2.0, 3);
    auto plan = plan_growth(spec, 2.0, terms);
    auto d = design_alpha(spec, plan.max_index() + 2, 2);
    return {spec, plan, d.trunc};
}

Sampler random_sampler(std::size_t count, std::uint64_t seed) {
    Sampler s;
    s.count = count;
    s.seed = seed;
    return s;
}

}  // namespace

TEST(Sampler, StratifiedAndDeterministic) {
    auto s = random_sampler(1000, 42);
    for (std::size_t i = 0; i < s.count; ++i) {
        Rational x = sample_point(s, i);
        EXPECT_GE(x, ratio(from_u64(i), 1000));
        EXPECT_LT(x, ratio(from_u64(i + 1), 1000));
        EXPECT_EQ(x, sample_point(s, i));
    }
    auto other = random_sampler(1000, 43);
    int same = 0;
    for (std::size_t i = 0; i < 100; ++i) same += sample_point(s, i) == sample_point(other, i);
    EXPECT_EQ(same, 0);
}

TEST(Sampler, GridUsesMidpoints) {
    Sampler s;
    s.kind = Sampler::Kind::grid;
    s.count = 8;
    for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(sample_point(s, i), ratio(from_u64(2 * i + 1), 16));
}

TEST(NormalCdf, KnownValues) {
    EXPECT_NEAR(normal_cdf(0), 0.5, 1e-16);
    EXPECT_NEAR(normal_cdf(1), 0.8413447460685429, 1e-15);
    EXPECT_NEAR(normal_cdf(-1.96), 0.024997895148220435, 1e-15);
    EXPECT_NEAR(normal_cdf(-8), 6.22096057427178e-16, 1e-28);
}

TEST(MixtureCdf, MatchesMidpointRule) {
    const double pi = std::numbers::pi;
    EXPECT_DOUBLE_EQ(mixture_cdf(0), 0.5);
    for (double t : {-3.0, -1.0, -0.2, 0.3, 1.5, 4.0}) {
        const int m = 200000;
        double acc = 0;
        for (int i = 0; i < m; ++i) {
            double c = std::abs(std::cos(pi * (i + 0.5) / m));
            acc += 0.5 * std::erfc(-t / (std::sqrt(2.0) * c) / std::sqrt(2.0));
        }
        EXPECT_NEAR(mixture_cdf(t), acc / m, 1e-6) << t;
        EXPECT_NEAR(mixture_cdf(t) + mixture_cdf(-t), 1.0, 1e-12);
    }
}

TEST(Ks, SelfTestAgainstSeededNormals) {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> z;
    std::vector<double> v(10000);
    for (auto& x : v) x = z(rng);
    EXPECT_LT(ks_statistic(v, normal_cdf), 0.03);
}

TEST(Ks, ConstantAndTwoPointSamples) {
    EXPECT_GE(ks_statistic(std::vector<double>(100, 0.7), normal_cdf), 0.5);
    std::vector<double> two{-1, 1, -1, 1};
    // Empirical CDF is 1/2 on [-1, 1): the gap is largest just left of 1.
    EXPECT_NEAR(ks_statistic(two, normal_cdf), normal_cdf(1) - 0.5, 1e-15);
    EXPECT_THROW(ks_statistic({}, normal_cdf), DomainError);
}

TEST(Ks, TwoSample) {
    std::vector<double> a{1, 2, 3, 4}, b{5, 6, 7};
    EXPECT_DOUBLE_EQ(ks_two_sample(a, a), 0.0);
    EXPECT_DOUBLE_EQ(ks_two_sample(a, b), 1.0);
    // F_a - F_c peaks at t = 2: 2/4 - 0/2.
    EXPECT_DOUBLE_EQ(ks_two_sample(a, {2.5, 3.5}), 0.5);
    EXPECT_DOUBLE_EQ(ks_two_sample({0, 0, 1}, {0, 1, 1}), 1.0 / 3);
}

TEST(SampleSums, ZeroTermsGiveZero) {
    auto d = growth_setup(5);
    auto s = sample_sums(d.plan, phi0(), d.trunc, random_sampler(50, 1), 0);
    for (double v : s.values) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(s.prediction, 0.0);
}

TEST(SampleSums, AgreeWithOrbitWalk) {
    auto d = growth_setup(3);
    ASSERT_LT(d.plan.L[2], 100000);
    auto f = double_interval(Rational(1, 3), Rational(5, 7));
    auto sampler = random_sampler(40, 9);
    auto s = sample_sums(d.plan, f, d.trunc, sampler, 3);
    for (std::size_t i = 0; i < sampler.count; ++i) {
        auto direct = ergodic_sum_direct(f, sample_point(sampler, i), d.plan.L[2], d.trunc.value());
        EXPECT_DOUBLE_EQ(s.values[i], direct.value.get_d());
    }
}

TEST(SampleSums, CocycleAcrossPlanLength) {
    auto d = growth_setup(12);
    auto f = indicator(Rational(2, 5));
    const BigInt &num = d.trunc.alpha_num(), &den = d.trunc.alpha_den();
    auto sampler = random_sampler(30, 5);
    for (std::size_t n = 0; n + 1 <= d.plan.size(); ++n) {
        for (std::size_t i = 0; i < sampler.count; ++i) {
            Rational x = sample_point(sampler, i);
            Rational whole = ergodic_sum_rational(f, x, d.plan.partial_sum(n + 1), num, den);
            Rational head = ergodic_sum_rational(f, x, d.plan.partial_sum(n), num, den);
            Rational block = ergodic_sum_rational(f, frac(x + Rational(d.plan.partial_sum(n)) * d.trunc.value()),
                                                  d.plan.q[n], num, den);
            EXPECT_EQ(whole, head + block);
        }
    }
}

TEST(SampleSums, VarianceRatioTightensWithTerms) {
    auto d = growth_setup(40);
    auto sampler = random_sampler(8000, 3);
    double prev = INFINITY;
    for (std::size_t n : {10u, 20u, 40u}) {
        auto s = sample_sums(d.plan, phi0(), d.trunc, sampler, n);
        double eps = std::abs(s.norm * s.norm / s.prediction - 1);
        EXPECT_LT(eps, 0.1) << n;
        EXPECT_LT(eps, prev) << n;
        prev = eps;
        auto m = moments(s.values);
        EXPECT_LE(std::abs(m.mean), 3 * std::sqrt(m.variance / sampler.count)) << n;
    }
}

TEST(SampleSums, BlocksAreApproximatelyNormal) {
    auto d = growth_setup(40);
    auto s = sample_sums(d.plan, phi0(), d.trunc, random_sampler(4000, 11), 40, 20);
    EXPECT_NEAR(s.norm * s.norm / s.prediction, 1.0, 0.1);
    EXPECT_LT(ks_statistic(s.normalized, normal_cdf), 0.05);
}

TEST(SampleSums, WindowViolationRaises) {
    auto spec = PartialQuotientSpec::growth(2.0, 3);
    auto plan = plan_growth(spec, 2.0, 10);
    RationalTruncation short_trunc(spec, plan.max_index() - 1);
    EXPECT_THROW(sample_sums(plan, phi0(), short_trunc, random_sampler(10, 0), 10), PrecisionError);
}

TEST(Clt, SmallRunPasses) {
    auto d = growth_setup(40);
    auto r = clt_experiment(d.plan, phi0(), d.trunc, random_sampler(4000, 1), 40);
    EXPECT_LT(r.ks, 0.03);
    EXPECT_NEAR(r.statistic, 1.0, 0.1);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.plan_hash, config_hash(to_json(d.plan)));
}

TEST(ErdosFortet, TelescopedIdentity) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        Rational x = oracle::random_rational(rng, std::uint64_t(1) << 50);
        for (unsigned n = 2; n <= 20; ++n) EXPECT_NEAR(erdos_fortet_identity_residual(x, n), 0.0, 1e-9);
    }
}

TEST(ErdosFortet, DyadicPhasesAreExact) {
    // {(2^k - 1) x} for x = m / 2^bits, against exact rational arithmetic.
    std::mt19937_64 rng(5);
    const unsigned bits = 200;
    for (int trial = 0; trial < 20; ++trial) {
        BigInt m = detail::random_below(pow2(bits), rng(), 0);
        for (unsigned k = 1; k <= 120; ++k) {
            BigInt mult = pow2(k) - 1;
            double expect = frac(ratio(mult * m, pow2(bits))).get_d();
            EXPECT_NEAR(detail::dyadic_frac(m, bits, mult), expect, 1e-15);
        }
    }
}

TEST(ErdosFortet, SmallRunSeparatesFromNormal) {
    auto r = erdos_fortet_experiment(300, random_sampler(4000, 2));
    EXPECT_NEAR(r.variance, 1.0, 0.1);
    EXPECT_LT(r.ks, 0.04);
    EXPECT_GT(r.extra["ks_best_normal"].get<double>(), r.ks);
}

TEST(Gaposhkin, CountMatchesMembershipScan) {
    auto member = [](std::uint64_t k, unsigned a) {
        for (std::uint64_t m = 1;; ++m) {
            double lo = std::pow(static_cast<double>(m), a);
            if (lo > static_cast<double>(k)) return false;
            if (k <= static_cast<std::uint64_t>(lo) + m) return true;
        }
    };
    for (unsigned a : {5u, 6u}) {
        std::uint64_t count = 0;
        for (std::uint64_t k = 1; k <= 20000; ++k) {
            count += member(k, a);
            if (k % 997 == 0 || k == 20000) EXPECT_EQ(gaposhkin_count(k, a), count) << k;
        }
    }
    // sum_{m=1}^{15} (m + 1): 15^5 + 15 <= 10^6 < 16^5.
    EXPECT_EQ(gaposhkin_count(1'000'000, 5), 135u);
    EXPECT_LE(135.0, 2 * std::pow(1e6, 0.4));
}

TEST(Gaposhkin, ModifiedSumsStayClose) {
    auto r = gaposhkin_demo(5, 200, random_sampler(3000, 4));
    EXPECT_LE(r.extra["max_abs_difference"].get<double>(), r.extra["triangle_bound"].get<double>());
    EXPECT_LT(r.ks, 0.03);
    EXPECT_THROW(gaposhkin_demo(4, 100, random_sampler(10, 0)), DomainError);
}

TEST(Dilation, SawtoothCorrelations) {
    // int ({a x} - 1/2)({b x} - 1/2) dx = 1 / (12 a b) for coprime a, b.
    for (long a : {1L, 2L, 3L, 8L}) {
        for (long b : {1L, 5L, 7L, 9L}) {
            if (std::gcd(a, b) != 1) continue;
            auto ip = dilation_inner_product(phi0(), phi0(), BigInt(a), BigInt(b));
            EXPECT_TRUE(ip.exact);
            EXPECT_NEAR(ip.value, 1.0 / (12.0 * a * b), 1e-15);
        }
    }
    auto series = dilation_inner_product(phi0(), phi0(), BigInt(1), BigInt(8), 4000, 0);
    EXPECT_FALSE(series.exact);
    EXPECT_NEAR(series.value, 1.0 / 96, series.tail_bound + 1e-12);
}

TEST(Dilation, ExactAgreesWithResonanceSeries) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        auto f = random_catalog_member(rng), g = random_catalog_member(rng);
        BigInt l1 = static_cast<unsigned long>(1 + rng() % 12), l2 = static_cast<unsigned long>(1 + rng() % 40);
        auto exact = dilation_inner_product(f, g, l1, l2);
        auto series = dilation_inner_product(f, g, l1, l2, 5000, 0);
        ASSERT_TRUE(exact.exact);
        EXPECT_NEAR(exact.value, series.value, series.tail_bound + 1e-9) << f.name() << " " << g.name();
    }
}

TEST(QuasiOrthogonality, EqualDilationsGiveNorm) {
    for (const auto& f : {phi0(), indicator(Rational(1, 3)), half()}) {
        auto c = quasi_orthogonality_check(f, f, BigInt(3), BigInt(3));
        EXPECT_NEAR(c.lhs, f.l2_norm_sq().get_d(), 1e-14);
        EXPECT_NEAR(c.rhs, c.lhs, 1e-12);
        EXPECT_TRUE(c.holds);
    }
    EXPECT_NEAR(tail_energy(phi0(), 1), std::sqrt(1.0 / 12), 1e-15);
}

TEST(QuasiOrthogonality, RandomCatalogPairs) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        auto f = random_catalog_member(rng), g = random_catalog_member(rng);
        unsigned long l1 = 1 + rng() % 50;
        unsigned long l2 = l1 * 2 + rng() % 200;
        auto c = quasi_orthogonality_check(f, g, BigInt(l1), BigInt(l2));
        EXPECT_TRUE(c.holds) << f.name() << " " << g.name() << " " << l1 << " " << l2 << " " << c.lhs << " " << c.rhs;
    }
}

TEST(BlockVariance, RatioSixteenStaysNondegenerate) {
    auto r = block_variance_experiment(4, 8, 16, 12);
    EXPECT_TRUE(r.pass);
    EXPECT_GT(r.extra["min_ratio"].get<double>(), 0.5);
    EXPECT_LT(r.extra["max_ratio"].get<double>(), 1.5);
}

TEST(Covariance, ParityPlanGivesHalfIdentity) {
    auto spec = parity_rule(2.0, 40);
    auto plan = plan_parity(spec, 2.0, 40);
    auto d = design_alpha(spec, plan.max_index() + 2, 2);
    auto psi = billiard_pair(d.trunc.value());
    auto pred = predicted_covariance(plan, psi, 40);
    EXPECT_NEAR(pred.c[0][0], 0.5, 0.05);
    EXPECT_NEAR(pred.c[1][1], 0.5, 0.05);
    EXPECT_NEAR(pred.c[0][1], 0.0, 0.05);
    auto r = covariance_2d(plan, psi, d.trunc, random_sampler(3000, 6), 40);
    EXPECT_TRUE(r.pass) << to_json(r).dump();
    auto growth = growth_setup(10);
    EXPECT_THROW(covariance_2d(growth.plan, psi, growth.trunc, random_sampler(10, 0), 10), DomainError);
}
