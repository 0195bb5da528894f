#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "xborder/amm.hpp"
#include "xborder/error.hpp"

using namespace xborder;
using namespace xborder::amm;

namespace {

// Frozen from tests/oracles/invariant_oracle.py (60-digit bisection on the
// polynomial form of the invariant).
constexpr double kCrypto3D = 3077966.8407660706326;
constexpr double kCrypto3Dx1e4 = 8403.6081889115692452;
constexpr double kCrypto3Dx1 = 0.83335895280683849067;
constexpr double kStable2D = 949986.93672985796792;
constexpr double kStable2Dx1e4 = 10012.617142341722062;
constexpr double kCrypto2WideD = 4909120.1566231702253;
constexpr double kCrypto2WideDx = 75799.397008197058045;

const std::vector<double> kCrypto3{1e6, 1.2e6, 0.9e6};
const std::vector<double> kStable2{5e5, 4.5e5};
const std::vector<double> kCrypto2Wide{2e6, 3e6};

RateTable day_rates(double eur = 0.935016, double sgd = 1.486957) {
    RateTable r;
    r.set(kEur, eur).set(kSgd, sgd);
    return r;
}

ErrorKind kind_of_throw(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected xborder::Error";
    return ErrorKind::io;
}

} // namespace

TEST(SolveD, MatchesHighPrecisionOracle) {
    EXPECT_NEAR(cryptoswap_solve_d(kCrypto3, 50.0, 1e-8), kCrypto3D, kCrypto3D * 1e-12);
    EXPECT_NEAR(stableswap_solve_d(kStable2, 50.0), kStable2D, kStable2D * 1e-12);
    EXPECT_NEAR(cryptoswap_solve_d(kCrypto2Wide, 100.0, 1e-4), kCrypto2WideD, kCrypto2WideD * 1e-12);
}

TEST(SolveD, BalancedIsExact) {
    for (double x : {1.0, 1e3, 1e8}) {
        for (std::size_t n : {2u, 3u}) {
            const std::vector<double> bal(n, x);
            EXPECT_EQ(cryptoswap_solve_d(bal, 50.0, 1e-8), static_cast<double>(n) * x);
            EXPECT_EQ(stableswap_solve_d(bal, 50.0), static_cast<double>(n) * x);
        }
    }
}

TEST(SolveD, ResidualVanishesAtRoot) {
    const CryptoswapParams p{50.0, 1e-8};
    const double d = solve_d(p, kCrypto3);
    EXPECT_LE(std::abs(invariant_residual(p, kCrypto3, d)), 1e-12 * d);
    EXPECT_GT(invariant_residual(p, kCrypto3, 0.9 * d), 0.0);
    EXPECT_LT(invariant_residual(p, kCrypto3, 1.1 * d), 0.0);
}

TEST(SolveD, BoundedBySumAndGeometricMean) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ratio(0.5, 2.0);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x{1e6 * ratio(rng), 1e6 * ratio(rng), 1e6 * ratio(rng)};
        const double d = cryptoswap_solve_d(x, 50.0, 1e-6);
        const double sum = x[0] + x[1] + x[2];
        const double geo = 3.0 * std::cbrt(x[0] * x[1] * x[2]);
        EXPECT_LE(d, sum * (1 + 1e-12));
        EXPECT_GE(d, geo * (1 - 1e-12));
    }
}

TEST(SolveD, RejectsBadInput) {
    EXPECT_EQ(kind_of_throw([] { cryptoswap_solve_d(std::vector<double>{1.0, -1.0}, 50.0, 1e-8); }),
              ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of_throw([] { cryptoswap_solve_d(std::vector<double>{1.0, 1.0}, 50.0, 1.5); }),
              ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of_throw([] { solve_d(ClmmParams{}, std::vector<double>{1.0, 1.0}); }),
              ErrorKind::invalid_argument);
}

TEST(SolveInputDelta, MatchesHighPrecisionOracle) {
    const CryptoswapParams c3{50.0, 1e-8};
    const double d3 = solve_d(c3, kCrypto3);
    EXPECT_NEAR(solve_input_delta(c3, kCrypto3, d3, 0, 1, 1e4), kCrypto3Dx1e4, kCrypto3Dx1e4 * 1e-10);
    EXPECT_NEAR(solve_input_delta(c3, kCrypto3, d3, 0, 1, 1.0), kCrypto3Dx1, kCrypto3Dx1 * 1e-8);

    const StableswapParams s2{50.0};
    const double ds = solve_d(s2, kStable2);
    EXPECT_NEAR(solve_input_delta(s2, kStable2, ds, 0, 1, 1e4), kStable2Dx1e4, kStable2Dx1e4 * 1e-10);

    const CryptoswapParams wide{100.0, 1e-4};
    const double dw = solve_d(wide, kCrypto2Wide);
    EXPECT_NEAR(solve_input_delta(wide, kCrypto2Wide, dw, 1, 0, 5e4), kCrypto2WideDx, kCrypto2WideDx * 1e-10);
}

TEST(SolveInputDelta, GridSearchOracleBracketsRoot) {
    const CryptoswapParams p{50.0, 1e-8};
    const double d = solve_d(p, kCrypto3);
    for (double dy : {10.0, 5e3, 2e5}) {
        const double dx = solve_input_delta(p, kCrypto3, d, 0, 1, dy);
        // Scan a grid around the constant-product guess for the sign change.
        const double hi = 3.0 * dy;
        const int steps = 20000;
        double prev_delta = 0.0;
        double prev = 0.0;
        bool found = false;
        for (int k = 0; k <= steps && !found; ++k) {
            const double delta = hi * k / steps;
            std::vector<double> y(kCrypto3);
            y[0] += delta;
            y[1] -= dy;
            const double r = invariant_residual(p, y, d);
            if (k > 0 && (prev < 0.0) != (r < 0.0)) {
                EXPECT_GE(dx, prev_delta);
                EXPECT_LE(dx, delta);
                found = true;
            }
            prev = r;
            prev_delta = delta;
        }
        EXPECT_TRUE(found) << dy;
    }
}

TEST(SolveInputDelta, IncreasingAndConvexInOutput) {
    const CryptoswapParams p{50.0, 1e-8};
    const double d = solve_d(p, kCrypto3);
    std::vector<double> dx;
    for (int k = 1; k <= 40; ++k) dx.push_back(solve_input_delta(p, kCrypto3, d, 0, 1, 2e4 * k));
    for (std::size_t i = 1; i < dx.size(); ++i) EXPECT_GT(dx[i], dx[i - 1]);
    for (std::size_t i = 2; i < dx.size(); ++i) EXPECT_GE(dx[i] - 2.0 * dx[i - 1] + dx[i - 2], 0.0);
}

TEST(SolveInputDelta, Homogeneous) {
    const CryptoswapParams p{50.0, 1e-8};
    const double d = solve_d(p, kCrypto3);
    const double dx = solve_input_delta(p, kCrypto3, d, 0, 1, 1e4);
    for (double c : {1e-3, 7.0, 1e4}) {
        std::vector<double> x(kCrypto3);
        for (auto& v : x) v *= c;
        const double dc = solve_d(p, x);
        EXPECT_NEAR(dc, c * d, c * d * 1e-9);
        EXPECT_NEAR(solve_input_delta(p, x, dc, 0, 1, c * 1e4), c * dx, c * dx * 1e-9);
    }
}

TEST(SolveInputDelta, Errors) {
    const CryptoswapParams p{50.0, 1e-8};
    const double d = solve_d(p, kCrypto3);
    EXPECT_EQ(kind_of_throw([&] { solve_input_delta(p, kCrypto3, d, 0, 1, 1.2e6); }),
              ErrorKind::insufficient_liquidity);
    EXPECT_EQ(kind_of_throw([&] { solve_input_delta(p, kCrypto3, d, 1, 1, 1.0); }), ErrorKind::invalid_argument);
    EXPECT_EQ(solve_input_delta(p, kCrypto3, d, 0, 1, 0.0), 0.0);
}

// ---------------------------------------------------------------------------

TEST(Pool, SeededReservesAndValue) {
    const auto rates = day_rates();
    const auto pool = Pool::create("p", CryptoswapParams{}, 1e6, rates.select({kChf, kEur, kSgd}));
    EXPECT_EQ(pool.reserves.amount(kChf), 1e6);
    EXPECT_DOUBLE_EQ(pool.reserves.amount(kEur), 0.935016e6);
    EXPECT_DOUBLE_EQ(pool.reserves.amount(kSgd), 1.486957e6);
    EXPECT_DOUBLE_EQ(pool.value(rates), 3e6);
    for (double v : pool.scaled_balances()) EXPECT_DOUBLE_EQ(v, 1e6);
    EXPECT_TRUE(pool.supports(kEur, kSgd));
    EXPECT_FALSE(pool.supports(kEur, Currency("USD")));
}

TEST(Pool, RejectsMalformed) {
    const auto rates = day_rates();
    EXPECT_EQ(kind_of_throw([&] { Pool::create("p", ClmmParams{}, 1e6, rates.select({kChf, kEur, kSgd})); }),
              ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of_throw([&] { Pool::create("p", CryptoswapParams{}, 1e6, rates.select({kChf, kEur}), 0.02); }),
              ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of_throw([&] { Pool::create("p", CryptoswapParams{}, -1.0, rates.select({kChf, kEur})); }),
              ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of_throw([] { Reserves({{kChf, 1.0}, {kChf, 2.0}}); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of_throw([] { validate(ClmmParams{1.0}); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of_throw([] { validate(StableswapParams{0.0}); }), ErrorKind::invalid_argument);
}

TEST(Swap, CryptoswapPoolMatchesOracle) {
    // 100mn CHF 3-token pool seeded at 0.935016 EUR / 1.486957 SGD per CHF.
    const auto rates = day_rates();
    const auto pool = Pool::create("m", CryptoswapParams{}, 1e8 / 3.0, rates.select({kChf, kEur, kSgd}));
    const double st = rates.cross(kChf, kEur);
    const auto small = swap_exact_out(pool, kChf, kEur, 1e4, st);
    EXPECT_NEAR(small.input_amount, 10695.583234239114429, 1e-7);
    EXPECT_NEAR(small.price_impact_cost, 0.541453345319817, 0.541453345319817 * 1e-6);
    const auto large = swap_exact_out(pool, kChf, kEur, 1e6, st);
    EXPECT_NEAR(large.input_amount, 1104828.1810574238493, 1104828.18 * 1e-11);
    EXPECT_NEAR(large.price_impact_cost, 33032.0265395882, 33032.03 * 1e-9);

    const auto two = Pool::create("c2", CryptoswapParams{}, 1e8 / 12.0, rates.select({kChf, kEur}));
    EXPECT_NEAR(swap_exact_out(two, kChf, kEur, 1e4, st).price_impact_cost, 11.0156636381796, 11.0157 * 1e-7);
}

TEST(Swap, QuoteFieldsConsistent) {
    const auto rates = day_rates();
    const auto pool = Pool::create("m", CryptoswapParams{}, 1e6, rates.select({kChf, kEur}));
    const double st = rates.cross(kChf, kEur);
    const auto q = swap_exact_out(pool, kChf, kEur, 5e3, st);
    EXPECT_EQ(q.output_amount, 5e3);
    EXPECT_DOUBLE_EQ(q.executed_rate, 5e3 / q.input_amount);
    EXPECT_DOUBLE_EQ(q.price_impact_fraction, (q.executed_rate / st) - 1.0);
    EXPECT_LT(q.price_impact_fraction, 0.0);
    EXPECT_GT(q.price_impact_cost, 0.0);
    EXPECT_DOUBLE_EQ(q.reserves_after.amount(kChf), 1e6 + q.input_amount);
    EXPECT_DOUBLE_EQ(q.reserves_after.amount(kEur), pool.reserves.amount(kEur) - 5e3);
    // Fee-free swaps stay on the level set.
    const auto after = apply(pool, q);
    EXPECT_NEAR(solve_d(after.params, after.scaled_balances()), 2e6, 2e6 * 1e-10);
}

TEST(Swap, RoundTripRestoresReserves) {
    const auto rates = day_rates();
    for (const AmmParams& params : {AmmParams{CryptoswapParams{}}, AmmParams{StableswapParams{}},
                                    AmmParams{CryptoswapParams{20.0, 1e-4}}}) {
        const auto pool = Pool::create("p", params, 1e6, rates.select({kChf, kEur, kSgd}));
        const double st = rates.cross(kChf, kEur);
        for (double dy : {1e-2, 1.0, 1e4, 3e5}) {
            const auto there = swap_exact_out(pool, kChf, kEur, dy, st);
            const auto moved = apply(pool, there);
            const auto back = swap_exact_out(moved, kEur, kChf, there.input_amount, 1.0 / st);
            const auto restored = apply(moved, back);
            for (std::size_t i = 0; i < 3; ++i) {
                EXPECT_NEAR(restored.reserves[i].amount, pool.reserves[i].amount, pool.reserves[i].amount * 1e-8);
            }
        }
    }
}

TEST(Swap, Errors) {
    const auto rates = day_rates();
    const auto pool = Pool::create("p", CryptoswapParams{}, 1e6, rates.select({kChf, kEur}));
    EXPECT_EQ(kind_of_throw([&] { swap_exact_out(pool, kChf, kEur, 1e7, 0.9); }), ErrorKind::insufficient_liquidity);
    EXPECT_EQ(kind_of_throw([&] { swap_exact_out(pool, kChf, kEur, 0.0, 0.9); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of_throw([&] { swap_exact_out(pool, kChf, kSgd, 1.0, 0.9); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of_throw([&] { swap_exact_out(pool, kChf, kChf, 1.0, 1.0); }), ErrorKind::invalid_argument);
    EXPECT_EQ(kind_of_throw([&] { swap_exact_out(pool, kChf, kEur, 1.0, -1.0); }), ErrorKind::invalid_argument);
}

TEST(SpotPrice, AlignedWithSeedingRates) {
    const auto rates = day_rates(1.05, 1.46);
    const std::vector<Pool> pools{
        Pool::create("c3", CryptoswapParams{}, 1e8 / 3.0, rates.select({kChf, kEur, kSgd})),
        Pool::create("c2", CryptoswapParams{}, 1e8 / 12.0, rates.select({kChf, kSgd})),
        Pool::create("s2", StableswapParams{}, 1e6, rates.select({kChf, kEur})),
        Pool::create("cl", ClmmParams{}, 1e6, rates.select({kChf, kEur})),
    };
    for (const auto& pool : pools) {
        for (std::size_t i = 1; i < pool.reserves.size(); ++i) {
            const auto& c = pool.reserves[i].currency;
            const double want = rates.cross(kChf, c);
            EXPECT_NEAR(spot_price(pool, kChf, c), want, want * 1e-6) << pool.id << ' ' << c;
        }
    }
}

// ---------------------------------------------------------------------------

TEST(PriceImpact, Fraction) {
    EXPECT_NEAR(price_impact_fraction(10100.0, 10000.0, 1.0), -0.0099009900990099009901, 1e-15);
    EXPECT_EQ(price_impact_fraction(1.0, 2.0, 2.0), 0.0);
    EXPECT_EQ(kind_of_throw([] { price_impact_fraction(0.0, 1.0, 1.0); }), ErrorKind::invalid_argument);
}

TEST(Clmm, ImpactFormula) {
    EXPECT_NEAR(clmm_price_impact(1e5, 8'333'333.0, 1.05, 1.05, 1.2), 0.00099576084925584133296, 1e-17);
}

TEST(Clmm, LinearInOutputAndVanishesAsRangeNarrows) {
    const double unit = clmm_price_impact(1.0, 1e6, 1.0, 1.1, 1.2);
    for (double dy : {3.0, 1e2, 5e4, 9e5}) {
        EXPECT_NEAR(clmm_price_impact(dy, 1e6, 1.0, 1.1, 1.2), dy * unit, dy * unit * 4e-16);
    }
    double prev = clmm_price_impact(1e5, 1e6, 1.0, 1.0, 2.0);
    for (double a : {1.5, 1.2, 1.01, 1.0001, 1.000001, 1.0 + 1e-10}) {
        const double f = clmm_price_impact(1e5, 1e6, 1.0, 1.0, a);
        EXPECT_LT(f, prev);
        prev = f;
    }
    EXPECT_LT(prev, 1e-11);
}

TEST(Clmm, RangeGuard) {
    EXPECT_EQ(kind_of_throw([] { clmm_price_impact(2e6, 1e6, 1.0, 1.0, 1.2); }), ErrorKind::range_exceeded);
    const auto rates = day_rates(1.0, 1.0);
    const auto pool = Pool::create("cl", ClmmParams{}, 1e6, rates.select({kChf, kEur}));
    // Reserve check fires first for trades beyond the pool's EUR.
    EXPECT_EQ(kind_of_throw([&] { swap_exact_out(pool, kChf, kEur, 2e6, 1.0); }),
              ErrorKind::insufficient_liquidity);
    EXPECT_NO_THROW(swap_exact_out(pool, kChf, kEur, 9.9e5, 1.0));
}

TEST(Clmm, SwapAppliesImpactToPayment) {
    const auto rates = day_rates(1.05, 1.46);
    const auto pool = Pool::create("cl", ClmmParams{1.2}, 8'333'333.0, rates.select({kChf, kEur}));
    const auto q = swap_exact_out(pool, kChf, kEur, 1e5, 1.05);
    const double f = clmm_price_impact(1e5, 8'333'333.0, 1.05, 1.05, 1.2);
    EXPECT_DOUBLE_EQ(q.input_amount, (1e5 + f * 1e5) / 1.05);
    EXPECT_NEAR(q.price_impact_cost, f * 1e5, 1e-8);
}

TEST(Clmm, LinearisedImpactAgreesWithExactCurveForSmallTrades) {
    // Virtual constant product for a position holding (n0, S*n0) at price S.
    const double n0 = 1e6;
    const double s = 1.05;
    const double alpha = 1.2;
    for (double dy : {1.0, 1e2, 1e3}) {
        const double dx_exact = clmm_exact_out_input(n0, s * n0, s, alpha, dy);
        const double exact_fraction = s * dx_exact / dy - 1.0;
        const double linear = clmm_price_impact(dy, n0, s, s, alpha);
        const double y_virtual = s * n0 * std::sqrt(alpha) / (std::sqrt(alpha) - 1.0);
        EXPECT_NEAR(exact_fraction, linear, linear * 2.0 * dy / y_virtual + 1e-13) << dy;
    }
    EXPECT_DOUBLE_EQ(clmm_liquidity(n0, s * n0, s, alpha), n0 * std::sqrt(s) / (1.0 - 1.0 / std::sqrt(alpha)));
    EXPECT_EQ(kind_of_throw([&] { clmm_exact_out_input(n0, s * n0, s, alpha, 2.0 * s * n0); }),
              ErrorKind::range_exceeded);
}
