#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_support.hpp"
#include "uwrap/density.hpp"
#include "uwrap/error.hpp"
#include "uwrap/transform.hpp"

using namespace uwrap;
using testing_support::make_event;

TEST(Transform, KnownValuesAndSymmetry) {
    MarkerTransform t;
    EXPECT_EQ(t.apply(0.0), 0.0);
    EXPECT_NEAR(t.apply(9.0), 1.0, 1e-15);
    EXPECT_NEAR(t.apply(99.0), 2.0, 1e-15);
    EXPECT_NEAR(t.apply(-9.0), -1.0, 1e-15);
    MarkerTransform wide{10.0};
    EXPECT_NEAR(wide.apply(90.0), 1.0, 1e-15);
}

TEST(Transform, RoundTripAndMonotone) {
    MarkerTransform t{2.5};
    double prev = -INFINITY;
    for (double x = -5000; x <= 5000; x += 37.3) {
        const double y = t.apply(x);
        EXPECT_GT(y, prev);
        EXPECT_NEAR(t.inverse(y), x, 1e-9 * std::max(1.0, std::abs(x)));
        EXPECT_DOUBLE_EQ(t.apply(-x), -y);
        prev = y;
    }
}

TEST(Transform, JsonRoundTrip) {
    MarkerTransform t{3.0};
    EXPECT_EQ(transform_from_json(transform_to_json(t)).offset, 3.0);
    EXPECT_EQ(transform_from_json(json()).offset, 1.0);
    EXPECT_THROW(transform_from_json(json{{"kind", "asinh"}}), Error);
}

TEST(Bandwidth, ScottRule) {
    const std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8};
    // sd with n - 1 denominator is sqrt(6); n^(-1/6) with n = 8 is 2^(-1/2).
    EXPECT_NEAR(scott_bandwidth(v), std::sqrt(6.0) / std::sqrt(2.0), 1e-14);
    EXPECT_EQ(scott_bandwidth({4, 4, 4}), kMinBandwidth);
    EXPECT_EQ(scott_bandwidth({4}), kMinBandwidth);
    EXPECT_EQ(parse_bandwidth_rule("scott"), BandwidthRule::Scott);
    EXPECT_THROW(parse_bandwidth_rule("silverman"), Error);
}

namespace {

Sample random_sample(std::mt19937_64& rng, std::size_t n) {
    Sample s;
    s.sample_id = "S";
    std::normal_distribution<double> a(30, 20), b(500, 300);
    for (std::size_t i = 0; i < n; ++i)
        s.events.push_back(make_event("S", "e" + std::to_string(i), {a(rng), b(rng), std::abs(a(rng))}));
    return s;
}

double direct_density(const DensityModel& m, double tx, double ty) {
    double sum = 0;
    for (std::size_t i = 0; i < m.xs.size(); ++i) {
        const double u = (tx - m.xs[i]) / m.h_x, v = (ty - m.ys[i]) / m.h_y;
        sum += std::exp(-0.5 * (u * u + v * v)) / (2 * std::numbers::pi * m.h_x * m.h_y);
    }
    return sum / static_cast<double>(m.xs.size());
}

}  // namespace

TEST(Density, MatchesDirectSummation) {
    std::mt19937_64 rng(11);
    auto s = random_sample(rng, 400);
    auto m = fit_density(s, {0, 1}, MarkerTransform{});
    for (std::size_t i = 0; i < s.size(); i += 17) {
        const double tx = m.transform.apply(s.events[i].markers[0]);
        const double ty = m.transform.apply(s.events[i].markers[1]);
        EXPECT_NEAR(eval_density(m, s.events[i]), direct_density(m, tx, ty), 1e-12 * direct_density(m, tx, ty));
    }
    EXPECT_EQ(m.eval(1e6, 1e6), 0.0);
}

TEST(Density, IntegratesToOne) {
    std::mt19937_64 rng(5);
    for (int inst = 0; inst < 5; ++inst) {
        auto s = random_sample(rng, 50 + rng() % 450);
        auto m = fit_density(s, {0, 2}, MarkerTransform{});
        auto [xlo, xhi] = std::minmax_element(m.xs.begin(), m.xs.end());
        auto [ylo, yhi] = std::minmax_element(m.ys.begin(), m.ys.end());
        const double x0 = *xlo - 8 * m.h_x, x1 = *xhi + 8 * m.h_x;
        const double y0 = *ylo - 8 * m.h_y, y1 = *yhi + 8 * m.h_y;
        const int nx = 400, ny = 400;
        const double dx = (x1 - x0) / nx, dy = (y1 - y0) / ny;
        double mass = 0;
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) mass += m.eval(x0 + (i + 0.5) * dx, y0 + (j + 0.5) * dy) * dx * dy;
        EXPECT_NEAR(mass, 1.0, 1e-2);
    }
}

TEST(Density, EmptySampleIsDomainError) {
    Sample s;
    try {
        fit_density(s, {0, 1}, MarkerTransform{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Domain);
    }
}

TEST(Density, ConstantMarkerUsesFlooredBandwidth) {
    Sample s;
    for (int i = 0; i < 10; ++i) s.events.push_back(make_event("S", std::to_string(i), {5.0, double(i), 0}));
    auto m = fit_density(s, {0, 1}, MarkerTransform{});
    EXPECT_EQ(m.h_x, kMinBandwidth);
    EXPECT_TRUE(std::isfinite(eval_density(m, s.events[3])));
}
