#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "bbr/quadrature.hpp"

using namespace bbr::quad;

TEST(Gk15, ExactForPolynomials) {
    auto p = [](double x) { return 3.0 * std::pow(x, 20) - x * x + 1.0; };
    const double exact = 3.0 / 21.0 * std::pow(2.0, 21) - 8.0 / 3.0 + 2.0;
    EXPECT_NEAR(gk15(p, 0.0, 2.0).value / exact, 1.0, 1e-14);
}

TEST(Panels, OscillatoryIntegrand) {
    // int_0^100 y (1 - cos(50 y)) dy = 5000 - [y sin(50y)/50 + cos(50y)/2500]_0^100
    const double t = 50.0, Y = 100.0;
    auto f = [t](double y) { return y * (1.0 - std::cos(t * y)); };
    const double exact = Y * Y / 2.0 - (Y * std::sin(t * Y) / t + (std::cos(t * Y) - 1.0) / (t * t));
    const auto r = integrate_panels(f, 0.0, Y, std::numbers::pi / t);
    EXPECT_NEAR(r.value / exact, 1.0, 1e-12);
    EXPECT_GE(r.panels, 1591u);
}

TEST(Panels, EndpointSingularityBisects) {
    auto f = [](double x) { return 1.0 / std::sqrt(x); };
    const auto r = integrate_panels(f, 0.0, 1.0, 1.0, {1e-9, 1e-9, 40});
    EXPECT_NEAR(r.value, 2.0, 1e-7);
    EXPECT_GT(r.evaluations, 15u);
}

TEST(Neumaier, CompensatesCancellation) {
    NeumaierSum s;
    s.add(1.0);
    s.add(1e100);
    s.add(1.0);
    s.add(-1e100);
    EXPECT_EQ(s.value(), 2.0);
}

TEST(Neumaier, OrderIndependentForShards) {
    std::vector<double> xs;
    for (int i = 0; i < 1000; ++i) xs.push_back(std::sin(i) * std::pow(10.0, i % 17 - 8));
    NeumaierSum all;
    for (double x : xs) all.add(x);
    NeumaierSum a, b;
    for (int i = 0; i < 500; ++i) a.add(xs[i]);
    for (int i = 500; i < 1000; ++i) b.add(xs[i]);
    b.add(a);
    EXPECT_NEAR(all.value(), b.value(), 1e-12 * std::abs(all.value()));
}
