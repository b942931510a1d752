#include "lacuna/billiard.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lacuna;

namespace {

ObstacleParams sample_params() { return ObstacleParams::from_alpha(Rational(2, 5), Rational(3, 4)); }

/// An irrational-looking alpha with a large denominator.
ObstacleParams golden_params() {
    RationalTruncation t(PartialQuotientSpec::golden(), 40);
    return ObstacleParams::from_alpha(t.value(), Rational(9, 10));
}

Rational random_point(std::mt19937_64& rng) { return oracle::random_rational(rng, 1ULL << 40); }

}  // namespace

TEST(Billiard, DisplacementCases) {
    Rational alpha(2, 5);
    EXPECT_EQ(displacement(Rational(1, 10), alpha), (Cell{0, 1}));
    EXPECT_EQ(displacement(Rational(35, 100), alpha), (Cell{1, 0}));
    EXPECT_EQ(displacement(Rational(6, 10), alpha), (Cell{0, -1}));
    EXPECT_EQ(displacement(Rational(9, 10), alpha), (Cell{-1, 0}));
    for (const Rational& b : {Rational(0), Rational(3, 10), Rational(1, 2), Rational(4, 5)}) {
        EXPECT_THROW(displacement(b, alpha), DomainError);
    }
}

TEST(Billiard, ParamsValidation) {
    EXPECT_THROW(ObstacleParams::from_alpha(Rational(1, 2), Rational(11, 10)), DomainError);
    EXPECT_THROW(ObstacleParams::from_alpha(Rational(0), Rational(1, 2)), DomainError);
    auto p = sample_params();
    EXPECT_EQ(p.alpha(), Rational(2, 5));
    EXPECT_EQ(p.scale(), Rational(3, 4));
}

TEST(Billiard, ComponentsAreShiftedHalfFunctions) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        Rational alpha = oracle::random_rational(rng, 997);
        if (alpha == 0) continue;
        auto psi = billiard_displacement(alpha);
        auto pair = billiard_pair(alpha);
        Rational shift = Rational(1, 2) - alpha / 2;
        for (int k = 0; k < 200; ++k) {
            Rational x(k, 200);
            EXPECT_EQ(psi.first.evaluate(x), pair.first.evaluate(x - shift));
            EXPECT_EQ(psi.second.evaluate(x), pair.second.evaluate(x));
        }
    }
}

TEST(Billiard, CellAfterZeroIsOrigin) {
    EXPECT_EQ(cell_after(BigInt(0), Rational(1, 7), sample_params()), (Cell{0, 0}));
}

TEST(Billiard, CellAfterMatchesSkewProduct) {
    std::mt19937_64 rng(11);
    for (const auto& p : {sample_params(), golden_params()}) {
        for (int trial = 0; trial < 8; ++trial) {
            Rational x = random_point(rng);
            BigInt n = static_cast<long>(rng() % 10001);
            auto walked = skew_product_iterate({x, {}}, n, p.alpha());
            EXPECT_EQ(cell_after(n, x, p), walked.z) << to_string(n);
            EXPECT_EQ(walked.x, frac(x + Rational(n) * p.alpha()));
        }
    }
}

TEST(Billiard, CellBoundedAtDenominators) {
    RationalTruncation t(PartialQuotientSpec::growth(2.0, 3), 30);
    std::mt19937_64 rng(2);
    for (std::size_t m = 1; m <= 25; ++m) {
        for (int trial = 0; trial < 20; ++trial) {
            Cell c = cell_after(t.q(m), random_point(rng), t);
            EXPECT_LE(abs(c.i), 2);
            EXPECT_LE(abs(c.j), 2);
        }
    }
}

TEST(Billiard, PiecewiseLinearSumMatchesLoop) {
    std::mt19937_64 rng(8);
    auto p = sample_params();
    auto pieces = hitting_time_pieces(p);
    for (int trial = 0; trial < 20; ++trial) {
        Rational x = random_point(rng);
        Rational alpha = oracle::random_rational(rng, 1009);
        long n = static_cast<long>(rng() % 400);
        Rational direct = 0;
        for (long j = 0; j < n; ++j) direct += hitting_time_scaled(x + j * alpha, p);
        EXPECT_EQ(ergodic_sum_piecewise_linear(pieces, x, BigInt(n), alpha.get_num(), alpha.get_den()), direct);
    }
}

TEST(Billiard, PiecesReproduceHittingTime) {
    std::mt19937_64 rng(9);
    for (const auto& p : {sample_params(), golden_params(), ObstacleParams{Rational(1, 5), Rational(3, 5)}}) {
        auto pieces = hitting_time_pieces(p);
        EXPECT_EQ(pieces.front().start, 0);
        EXPECT_EQ(pieces.back().end, 1);
        for (int k = 0; k < 500; ++k) {
            Rational x = random_point(rng);
            for (const auto& piece : pieces) {
                if (x >= piece.start && x < piece.end) EXPECT_EQ(piece.slope * x + piece.intercept, hitting_time_scaled(x, p));
            }
        }
    }
}

TEST(Billiard, RayTracerAgreesWithExactCells) {
    std::mt19937_64 rng(21);
    for (const auto& p : {sample_params(), golden_params()}) {
        const double a = p.a.get_d(), b = p.b.get_d();
        for (int orbit = 0; orbit < 50; ++orbit) {
            Rational x = random_point(rng);
            auto events = ray_trace(x, p, 200);
            for (std::size_t n = 1; n <= 100; ++n) {
                const auto& e = events[2 * n - 1];
                Cell c = cell_after(BigInt(static_cast<long>(n)), x, p);
                ASSERT_EQ(BigInt(e.cell_i), 2 * c.i) << "orbit " << orbit << " n " << n;
                ASSERT_EQ(BigInt(e.cell_j), 2 * c.j);
                double expect = frac(x + Rational(static_cast<long>(n)) * p.alpha()).get_d();
                double got = decode_state(state_after(e), a, b);
                double gap = std::abs(got - expect);
                EXPECT_LT(std::min(gap, 1 - gap), 1e-9);
            }
        }
    }
}

TEST(Billiard, CellIncrementsAndFlightLengths) {
    std::mt19937_64 rng(4);
    auto p = sample_params();
    const double min_flight = std::numbers::sqrt2 * (1 - std::max(p.a, p.b).get_d());
    for (int orbit = 0; orbit < 20; ++orbit) {
        auto events = ray_trace(random_point(rng), p, 100);
        long pi = 0, pj = 0;
        double pt = 0;
        for (std::size_t k = 1; k < events.size(); k += 2) {
            long di = (events[k].cell_i - pi) / 2, dj = (events[k].cell_j - pj) / 2;
            EXPECT_EQ(std::abs(di) + std::abs(dj), 1);
            pi = events[k].cell_i;
            pj = events[k].cell_j;
        }
        for (const auto& e : events) {
            EXPECT_GE(e.time - pt, min_flight - 1e-9);
            pt = e.time;
        }
    }
}

TEST(Billiard, TracedHittingTimeMatchesFormula) {
    std::mt19937_64 rng(13);
    for (const auto& p : {sample_params(), golden_params()}) {
        for (int k = 0; k < 300; ++k) {
            Rational x = random_point(rng);
            EXPECT_NEAR(ray_trace(x, p, 2)[1].time, hitting_time(x, p), 1e-10);
        }
    }
}

TEST(Billiard, SquareObstaclesAreMirrorSymmetric) {
    ObstacleParams p{Rational(3, 10), Rational(3, 10)};
    std::mt19937_64 rng(17);
    for (int k = 0; k < 200; ++k) {
        Rational x = random_point(rng) / 2;
        EXPECT_EQ(hitting_time_scaled(x, p), hitting_time_scaled(Rational(1, 2) - x, p));
        EXPECT_NEAR(ray_trace(x, p, 2)[1].time, ray_trace(Rational(1, 2) - x, p, 2)[1].time, 1e-10);
    }
}

TEST(Billiard, MeanHittingTimeTwoEstimators) {
    auto p = golden_params();
    const double exact = mean_hitting_time(p);
    std::mt19937_64 rng(23);
    double mc = 0;
    const int starts = 100000;
    for (int k = 0; k < starts; ++k) mc += ray_trace(random_point(rng), p, 2)[1].time;
    mc /= starts;
    EXPECT_NEAR(mc / exact, 1.0, 0.01);
    double grid = 0;
    const int cells = 4096;
    for (int k = 0; k < cells; ++k) grid += hitting_time(Rational(2 * k + 1, 2 * cells), p);
    EXPECT_NEAR(grid / cells / exact, 1.0, 1e-3);
}

TEST(Billiard, CornerHitIsSingular) {
    auto p = sample_params();
    // Leave the top side of the origin obstacle aimed at the lower-left corner of (1, 1).
    RayState st{1 - p.a.get_d() / 2 - (1 - p.b.get_d() / 2) + p.b.get_d() / 2, p.b.get_d() / 2, 0, 0, 1, 1};
    EXPECT_THROW(ray_trace(st, p, 1), SingularOrbit);
}

TEST(Billiard, LogWindowQuotientSumDecays) {
    auto spec = parity_rule(2.0, 40);
    auto table = quotient_window_table(spec, 6);
    ASSERT_EQ(table.size(), 6u);
    EXPECT_LT(table.back(), table.front());
    EXPECT_LT(table.back(), 1.0);
}

TEST(Billiard, CltOnParityPlan) {
    auto spec = parity_rule(2.0, 40);
    auto plan = plan_parity(spec, 2.0, 40);
    auto d = design_alpha(spec, plan.max_index() + 2, 2);
    auto params = ObstacleParams::from_alpha(d.trunc.value(), Rational(4, 5));
    Sampler s{Sampler::Kind::random, 7, 3000};
    Sampler drift{Sampler::Kind::random, 8, 1000};
    auto r = billiard_clt_experiment(params, plan, d.trunc, s, 40, drift);
    EXPECT_TRUE(r.extra["cell_clt_pass"].get<bool>()) << to_json(r).dump();
    EXPECT_GT(r.extra["psi_variance_ratio_10"].get<double>(), 0);
}
