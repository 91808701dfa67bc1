#include <gtest/gtest.h>

#include <random>

#include "oracles/dbscan_oracle.hpp"
#include "test_support.hpp"
#include "uwrap/dbscan.hpp"
#include "uwrap/error.hpp"

using namespace uwrap;

namespace {

std::vector<std::vector<double>> random_points(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
    std::vector<std::vector<double>> pts;
    std::uniform_int_distribution<int> blob(0, 3);
    std::normal_distribution<double> noise(0, 0.25);
    std::uniform_real_distribution<double> wide(-1, 3);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> p(dim);
        const bool scattered = rng() % 5 == 0;
        const int b = blob(rng);
        for (std::size_t d = 0; d < dim; ++d) p[d] = scattered ? wide(rng) : b * 0.9 * (d % 2 ? 1 : -0.5) + noise(rng);
        // Snap some coordinates to a lattice so exact eps distances occur.
        if (rng() % 7 == 0)
            for (auto& c : p) c = std::round(c * 10) / 10;
        pts.push_back(p);
    }
    return pts;
}

PointSet to_set(const std::vector<std::vector<double>>& pts) {
    PointSet s;
    s.dim = pts.empty() ? 0 : pts[0].size();
    for (const auto& p : pts) s.coords.insert(s.coords.end(), p.begin(), p.end());
    return s;
}

}  // namespace

TEST(Dbscan, MatchesReachabilityOracle) {
    std::mt19937_64 rng(42);
    for (int inst = 0; inst < 60; ++inst) {
        const std::size_t n = 1 + rng() % 300, dim = 1 + rng() % 6;
        const double eps = 0.1 + 0.1 * (rng() % 4);
        const std::size_t min_pts = 1 + rng() % 12;
        auto pts = random_points(rng, n, dim);
        auto got = dbscan(to_set(pts), eps, min_pts);
        auto want = oracle::dbscan(pts, eps, min_pts);
        ASSERT_EQ(got.labels, want) << "instance " << inst << " n=" << n << " dim=" << dim;
    }
}

TEST(Dbscan, BallIsClosedAndContainsThePoint) {
    PointSet s;
    s.dim = 1;
    s.coords = {0.0, 0.5};
    // Distance exactly eps: both points see two neighbours.
    auto r = dbscan(s, 0.5, 2);
    EXPECT_EQ(r.labels, (std::vector<int>{0, 0}));
    EXPECT_EQ(r.cluster_count, 1u);
    // min_pts = 1: every point is core on its own.
    s.coords = {0.0, 5.0, 10.0};
    r = dbscan(s, 0.5, 1);
    EXPECT_EQ(r.labels, (std::vector<int>{0, 1, 2}));
    r = dbscan(s, 0.5, 2);
    EXPECT_EQ(r.labels, (std::vector<int>(3, kNoise)));
}

TEST(Dbscan, BorderJoinsLowestNumberedCluster) {
    PointSet s;
    s.dim = 1;
    // Two dense groups around 0 and 2 and a border point at 1 within eps of one core in each.
    s.coords = {-0.04, -0.03, -0.02, -0.01, 0.0, 1.0, 2.0, 2.01, 2.02, 2.03, 2.04};
    auto r = dbscan(s, 1.0, 5);
    EXPECT_FALSE(r.core[5]);
    EXPECT_TRUE(r.core[4] && r.core[6]);
    EXPECT_EQ(r.labels[5], 0);
    EXPECT_EQ(r.labels[6], 1);
}

TEST(Dbscan, RejectsBadParameters) {
    PointSet s;
    s.dim = 1;
    s.coords = {0.0};
    EXPECT_THROW(dbscan(s, 0.0, 3), Error);
    EXPECT_THROW(dbscan(s, 1.0, 0), Error);
}

TEST(Homogeneity, ClusterShareOfPrediction) {
    auto panel = testing_support::small_panel();
    const auto& spec = panel.cell_type("S");  // gated on (B, C)
    Sample s;
    // Four events at one spot form a cluster; one far event is noise.
    for (int i = 0; i < 4; ++i) s.events.push_back(testing_support::make_event("X", std::to_string(i), {0, 100, 100}));
    s.events.push_back(testing_support::make_event("X", "far", {0, 1e6, 1}));
    std::vector<bool> pred = {true, true, true, false, true};
    auto m = fit_homogeneity(s, pred, spec, MarkerTransform{}, 0.3, 3);
    EXPECT_DOUBLE_EQ(eval_homogeneity(m, 0), 0.75);
    EXPECT_DOUBLE_EQ(eval_homogeneity(m, 3), 0.25);
    EXPECT_EQ(m.cluster[4], kNoise);
    EXPECT_DOUBLE_EQ(eval_homogeneity(m, 4), 1.0);
}

TEST(Homogeneity, ValuesInUnitInterval) {
    std::mt19937_64 rng(9);
    auto panel = testing_support::small_panel();
    auto s = uwrap::generate_sample(testing_support::small_generator(800), 3, 0);
    std::vector<bool> pred(s.size());
    for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = rng() % 3 == 0;
    auto m = fit_homogeneity(s, pred, panel.cell_type("S"), MarkerTransform{}, 0.3, 10);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double h = eval_homogeneity(m, i);
        EXPECT_GE(h, 0.0);
        EXPECT_LE(h, 1.0);
    }
}
