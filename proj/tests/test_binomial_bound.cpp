#include <gtest/gtest.h>

#include <cmath>

#include "oracles/binomial_oracle.hpp"
#include "uwrap/binomial_bound.hpp"
#include "uwrap/error.hpp"

using uwrap::clopper_pearson_upper;

TEST(BinomialBound, FrozenValues) {
    // Reference values from an independent 50-digit bisection.
    EXPECT_NEAR(clopper_pearson_upper(0, 10, 0.99), 0.36904265551980675, 1e-12);
    EXPECT_NEAR(clopper_pearson_upper(2, 50, 0.99), 0.15770404761479477, 1e-12);
    EXPECT_NEAR(clopper_pearson_upper(3, 70, 0.99), 0.1364494625948275, 1e-12);
    EXPECT_NEAR(clopper_pearson_upper(0, 200, 0.99), 0.022762779044189317, 1e-12);
    EXPECT_NEAR(clopper_pearson_upper(0, 400, 0.99), 0.01144690534306116, 1e-12);
    EXPECT_NEAR(clopper_pearson_upper(1, 100, 0.99), 0.064542732048581642, 1e-12);
    EXPECT_NEAR(clopper_pearson_upper(5, 1000, 0.99), 0.013055421233690194, 1e-12);
}

TEST(BinomialBound, ZeroErrorsClosedForm) {
    for (std::uint64_t n : {1, 2, 7, 50, 200, 1000, 100000})
        for (double c : {0.9, 0.99, 0.999})
            EXPECT_NEAR(clopper_pearson_upper(0, n, c), 1.0 - std::pow(1.0 - c, 1.0 / static_cast<double>(n)), 1e-12)
                << n << " " << c;
}

TEST(BinomialBound, AllErrorsGivesOne) {
    EXPECT_EQ(clopper_pearson_upper(5, 5, 0.99), 1.0);
    EXPECT_EQ(clopper_pearson_upper(1, 1, 0.9), 1.0);
}

TEST(BinomialBound, MatchesSummationOracle) {
    for (std::uint64_t n : {1, 3, 10, 37, 120, 200})
        for (std::uint64_t k = 0; k <= n; k += (n > 40 ? 7 : 1))
            EXPECT_NEAR(clopper_pearson_upper(k, n, 0.99), oracle::upper_bound(k, n, 0.99), 1e-9) << k << "/" << n;
}

TEST(BinomialBound, CdfMatchesOracle) {
    for (std::uint64_t n : {5, 60, 300})
        for (std::uint64_t k = 0; k <= n; k += 3)
            for (double p : {0.001, 0.05, 0.3, 0.77})
                EXPECT_NEAR(uwrap::binomial_cdf(k, n, p), static_cast<double>(oracle::binomial_cdf(k, n, p)), 1e-12);
}

TEST(BinomialBound, MonotoneAndAboveObservedRate) {
    for (std::uint64_t n : {20, 200}) {
        double prev = 0.0;
        for (std::uint64_t k = 0; k <= n; ++k) {
            const double u = clopper_pearson_upper(k, n, 0.99);
            EXPECT_GE(u, static_cast<double>(k) / static_cast<double>(n));
            EXPECT_GT(u, prev);
            EXPECT_LE(u, 1.0);
            prev = u;
        }
    }
    for (std::uint64_t n = 10; n < 400; n += 13)
        EXPECT_GT(clopper_pearson_upper(3, n, 0.99), clopper_pearson_upper(3, n + 1, 0.99));
    EXPECT_LT(clopper_pearson_upper(4, 80, 0.9), clopper_pearson_upper(4, 80, 0.99));
}

TEST(BinomialBound, BoundSatisfiesDefinition) {
    for (std::uint64_t k : {0, 1, 4, 19}) {
        const double u = clopper_pearson_upper(k, 100, 0.99);
        EXPECT_LE(uwrap::binomial_cdf(k, 100, u), 0.01 + 1e-12);
        EXPECT_GT(uwrap::binomial_cdf(k, 100, u - 1e-9), 0.01);
    }
}

TEST(BinomialBound, DomainErrors) {
    auto kind_of = [](auto f) {
        try {
            f();
        } catch (const uwrap::Error& e) {
            return e.kind();
        }
        return uwrap::ErrorKind::Config;
    };
    EXPECT_EQ(kind_of([] { clopper_pearson_upper(0, 0, 0.99); }), uwrap::ErrorKind::Domain);
    EXPECT_EQ(kind_of([] { clopper_pearson_upper(3, 2, 0.99); }), uwrap::ErrorKind::Domain);
    EXPECT_EQ(kind_of([] { clopper_pearson_upper(1, 2, 1.0); }), uwrap::ErrorKind::Domain);
    EXPECT_EQ(kind_of([] { clopper_pearson_upper(1, 2, 0.0); }), uwrap::ErrorKind::Domain);
}
