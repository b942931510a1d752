#include "lacuna/contfrac.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lacuna;

TEST(Convergents, GoldenGivesFibonacci) {
    auto c = convergents(PartialQuotientSpec::golden(), 6);
    std::vector<int> expected{1, 1, 2, 3, 5, 8, 13};
    for (std::size_t n = 0; n <= 6; ++n) EXPECT_EQ(c[n].q, expected[n]);
}

TEST(Convergents, Sqrt2MinusOneAgainstBisectionBracket) {
    auto c = convergents(PartialQuotientSpec::sqrt2(), 30);
    EXPECT_EQ(c[4].p, 12);
    EXPECT_EQ(c[4].q, 29);
    auto [lo, hi] = oracle::sqrt2_bracket(400);
    for (std::size_t n = 1; n <= 30; ++n) {
        Rational approx = ratio(c[n].p, c[n].q);
        Rational bound = ratio(1, c[n].q * c[n].q);
        // Holds at both ends of the bracket, hence for alpha itself.
        EXPECT_LT(abs(lo - 1 - approx), bound);
        EXPECT_LT(abs(hi - 1 - approx), bound);
    }
}

TEST(Convergents, DeterminantAndMonotonicity) {
    for (auto spec : {PartialQuotientSpec::golden(), PartialQuotientSpec::e_minus_two(),
                      PartialQuotientSpec::growth(2.0, 3), parity_rule(2.0, 10)}) {
        auto c = convergents(spec, 60);
        BigInt p_prev = 1, q_prev = 0;
        for (std::size_t n = 0; n <= 60; ++n) {
            BigInt det = p_prev * c[n].q - c[n].p * q_prev;
            EXPECT_EQ(det, n % 2 == 0 ? 1 : -1) << spec.name() << " n=" << n;
            if (n >= 2) EXPECT_GT(c[n].q, c[n - 1].q);
            p_prev = c[n].p;
            q_prev = c[n].q;
            // Never both even.
            EXPECT_FALSE(mpz_even_p(c[n].p.get_mpz_t()) && mpz_even_p(c[n].q.get_mpz_t()));
        }
    }
}

TEST(Convergents, SpecExhausted) {
    auto spec = PartialQuotientSpec::from_list({1, 2, 3});
    EXPECT_NO_THROW(convergents(spec, 3));
    EXPECT_THROW(convergents(spec, 4), PrecisionError);
}

TEST(Truncation, RejectsTinyLevel) {
    EXPECT_THROW(RationalTruncation(PartialQuotientSpec::golden(), 1), DomainError);
}

TEST(Truncation, AgreesWithEarlierConvergents) {
    RationalTruncation t(PartialQuotientSpec::e_minus_two(), 25);
    for (std::size_t m = 0; m < 25; ++m) {
        Rational diff = abs(t.value() - ratio(t.p(m), t.q(m)));
        EXPECT_LE(diff, ratio(1, t.q(m) * t.q(m + 1)));
    }
}

TEST(NearestIntegerDistance, IdentitiesAtDenominators) {
    RationalTruncation t(PartialQuotientSpec::growth(2.0, 3), 30);
    // From n = 1 on, ||q_n alpha|| = |q_n alpha - p_n| (n = 0 needs a_1 >= 2).
    for (std::size_t n = 1; n + 2 < 30; ++n) {
        Rational dn = nearest_integer_distance(t.q(n), t);
        EXPECT_GE(dn, ratio(1, t.q(n + 1) + t.q(n)));
        EXPECT_LE(dn, ratio(1, t.q(n + 1)));
        EXPECT_GE(dn, ratio(1, 2 * t.q(n + 1)));
        EXPECT_LE(dn, ratio(1, BigInt(t.a(n + 1)) * t.q(n) + t.q(n - 1)));
        if (n + 3 < 30) {
            Rational dn1 = nearest_integer_distance(t.q(n + 1), t);
            EXPECT_EQ(Rational(t.q(n) * dn1 + t.q(n + 1) * dn), Rational(1));
        }
    }
}

TEST(NearestIntegerDistance, SmallMultiplesAreFartherThanPreviousDenominator) {
    RationalTruncation t(PartialQuotientSpec::e_minus_two(), 14);
    for (std::size_t n = 1; n + 2 < 14; ++n) {
        Rational ref = nearest_integer_distance(t.q(n - 1), t);
        for (BigInt k = 1; k < t.q(n); ++k) EXPECT_GE(nearest_integer_distance(k, t), ref);
    }
}

TEST(NearestIntegerDistance, FirstMultipleAndWindow) {
    RationalTruncation t(PartialQuotientSpec::golden(), 20);
    Rational a = t.value();
    EXPECT_EQ(nearest_integer_distance(1, t), a < 1 - a ? a : Rational(1 - a));
    EXPECT_THROW(nearest_integer_distance(t.window(), t), PrecisionError);
    EXPECT_THROW(nearest_integer_distance(0, t), DomainError);
}

TEST(Ostrowski, GoldenTen) {
    RationalTruncation t(PartialQuotientSpec::golden(), 20);
    auto d = ostrowski_digits(10, t);
    EXPECT_EQ(d.value, 10);
    EXPECT_EQ(d.top(), 5u);
    EXPECT_EQ(d.digits[5], 1);
    EXPECT_EQ(d.digits[2], 1);
    EXPECT_EQ(d.digit_sum(), 2);
    EXPECT_TRUE(ostrowski_constraints_hold(d, t));
}

TEST(Ostrowski, DenominatorIsSingleDigit) {
    RationalTruncation t(PartialQuotientSpec::sqrt2(), 20);
    for (std::size_t j = 1; j < 18; ++j) {
        auto d = ostrowski_digits(t.q(j), t);
        EXPECT_EQ(d.digit_sum(), 1);
        EXPECT_EQ(d.digits[j], 1);
    }
}

TEST(Ostrowski, RandomReconstructionAndConstraints) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<long> dist(1, 1'000'000'000);
    for (auto spec : {PartialQuotientSpec::golden(), PartialQuotientSpec::e_minus_two(),
                      PartialQuotientSpec::growth(2.0, 3)}) {
        RationalTruncation t(spec, 60);
        for (int trial = 0; trial < 1000; ++trial) {
            BigInt n = dist(rng);
            auto d = ostrowski_digits(n, t);
            ASSERT_EQ(d.value, n);
            ASSERT_TRUE(ostrowski_constraints_hold(d, t));
            // Greedy digits also satisfy the Markov rule: b_k = a_{k+1} forces b_{k-1} = 0.
            for (std::size_t k = 1; k <= d.top(); ++k) {
                if (d.digits[k] == BigInt(t.a(k + 1))) ASSERT_EQ(d.digits[k - 1], 0);
            }
        }
    }
    EXPECT_THROW(ostrowski_digits(0, RationalTruncation(PartialQuotientSpec::golden(), 5)), DomainError);
}

TEST(Ostrowski, IdentityOnFullRange) {
    RationalTruncation t(PartialQuotientSpec::from_list({2, 1, 3, 1, 4, 2}), 6);
    for (BigInt n = 1; n < t.q(6); ++n) {
        auto d = ostrowski_digits(n, t);
        ASSERT_EQ(d.value, n);
        ASSERT_TRUE(ostrowski_constraints_hold(d, t));
    }
}

TEST(DesignAlpha, GuardAndGolden) {
    EXPECT_THROW(design_alpha(PartialQuotientSpec::golden(), 10, 1), DomainError);
    auto d = design_alpha(PartialQuotientSpec::golden(), 10, 5);
    EXPECT_EQ(d.trunc.level(), 15u);
    EXPECT_EQ(d.trunc.q(10), 89);
}

TEST(DesignAlpha, ParityRuleProducesTargets) {
    auto spec = parity_rule(2.0, 12);
    auto conv = convergents(spec, 200);
    std::size_t k = 1;
    for (std::size_t n = 1; n + 1 < conv.size() && k <= 12; ++n) {
        bool q_odd = mpz_odd_p(conv[n].q.get_mpz_t());
        bool p_odd = mpz_odd_p(conv[n].p.get_mpz_t());
        if (q_odd && p_odd == (k % 2 == 1) && spec.a(n + 1) >= k * k) ++k;
    }
    EXPECT_EQ(k, 13u);
}

TEST(BetaFromOstrowski, TrivialCases) {
    RationalTruncation t(PartialQuotientSpec::golden(), 20);
    EXPECT_EQ(beta_from_ostrowski({}, t), 0);
    EXPECT_EQ(beta_from_ostrowski({BigInt(1)}, t), frac(t.value()));
    std::vector<BigInt> far(25, BigInt(0));
    far[24] = 1;
    EXPECT_THROW(beta_from_ostrowski(far, t), PrecisionError);
}

TEST(BetaFromOstrowski, SparseDigitsGiveSmallDistances) {
    // a_{3m} grows like m^2; digits b_n = 1 at n = 3m - 1 make sum b_n / a_{n+1} finite.
    RationalTruncation t(PartialQuotientSpec::growth(2.0, 3), 64);
    std::vector<BigInt> b(60, BigInt(0));
    for (std::size_t n = 2; n < 60; n += 3) b[n] = 1;
    Rational beta = beta_from_ostrowski(b, t);
    auto dist_q = [&](std::size_t k) { return dist_to_int(Rational(t.q(k)) * beta); };
    // Along the large-quotient slots the distance shrinks below any threshold.
    EXPECT_LT(dist_q(47), Rational(1, 20));
    EXPECT_LT(dist_q(56), dist_q(20));
}

TEST(Serialization, RoundTrip) {
    RationalTruncation t(parity_rule(2.0, 5), 30);
    auto j = to_json(t);
    auto back = truncation_from_json(j);
    EXPECT_EQ(back.value(), t.value());
    j["p"] = "1";
    EXPECT_THROW(truncation_from_json(j), DomainError);
}

TEST(AlphaSpecParsing, KnownForms) {
    EXPECT_EQ(parse_alpha_spec("golden").a(7), 1u);
    EXPECT_EQ(parse_alpha_spec("list:3,4").a(2), 4u);
    EXPECT_EQ(parse_alpha_spec("growth:beta=2,stride=3").a(6), 5u);
    EXPECT_THROW(parse_alpha_spec("pi"), DomainError);
}
