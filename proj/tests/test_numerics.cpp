#include <gtest/gtest.h>

#include <cmath>

#include "xborder/error.hpp"
#include "xborder/numerics.hpp"

using namespace xborder;
using namespace xborder::numerics;

namespace {

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

TEST(Newton, SquareRootOfTwo) {
    const auto r = newton_raphson([](double x) { return x * x - 2.0; }, [](double x) { return 2.0 * x; }, 1.0);
    EXPECT_LE(std::abs(r.residual), RootConfig{}.tolerance_at(r.root));
    EXPECT_NEAR(r.root, std::sqrt(2.0), 1e-10);
    EXPECT_GT(r.iterations, 0);
}

TEST(Newton, ExactStartTakesNoSteps) {
    const auto r = newton_raphson([](double x) { return x - 3.0; }, [](double) { return 1.0; }, 3.0);
    EXPECT_EQ(r.root, 3.0);
    EXPECT_EQ(r.iterations, 0);
}

TEST(Newton, ZeroDerivative) {
    EXPECT_EQ(kind_of_throw([] {
                  newton_raphson([](double x) { return x * x + 1.0; }, [](double) { return 0.0; }, 1.0);
              }),
              ErrorKind::derivative_vanished);
}

TEST(Newton, IterationCap) {
    RootConfig cfg;
    cfg.max_iterations = 3;
    // Cycles between 0 and 1 forever.
    auto f = [](double x) { return x * x * x - 2.0 * x + 2.0; };
    auto df = [](double x) { return 3.0 * x * x - 2.0; };
    EXPECT_EQ(kind_of_throw([&] { newton_raphson(f, df, 0.0, cfg); }), ErrorKind::non_convergence);
}

TEST(Newton, DomainGuardHalvesSteps) {
    // log(x) = -5 from x0 = 1; the first full step goes negative.
    auto f = [](double x) { return std::log(x) + 5.0; };
    auto df = [](double x) { return 1.0 / x; };
    const auto r = newton_raphson(f, df, 1.0, {}, [](double x) { return x > 0.0; });
    EXPECT_NEAR(r.root, std::exp(-5.0), 1e-12);
}

TEST(Bisection, CubeRoot) {
    const auto r = bisection([](double x) { return x * x * x - 10.0; }, 0.0, 10.0);
    EXPECT_NEAR(r.root, std::cbrt(10.0), 1e-9);
}

TEST(Bisection, NoBracket) {
    EXPECT_EQ(kind_of_throw([] { bisection([](double x) { return x * x + 1.0; }, -1.0, 1.0); }),
              ErrorKind::no_bracket);
}

TEST(Bisection, EndpointRoot) {
    const auto r = bisection([](double x) { return x - 2.0; }, 2.0, 5.0);
    EXPECT_EQ(r.root, 2.0);
}

TEST(RootConfig, RejectsNonPositive) {
    RootConfig cfg;
    cfg.rel_tolerance = 0.0;
    EXPECT_EQ(kind_of_throw([&] { cfg.validate(); }), ErrorKind::invalid_argument);
    EXPECT_DOUBLE_EQ(RootConfig{}.tolerance_at(1e6), 1e-6);
    EXPECT_DOUBLE_EQ(RootConfig{}.tolerance_at(0.0), 1e-10);
}
