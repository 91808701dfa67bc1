#include <gtest/gtest.h>

#include <random>

#include "oracles/split_oracle.hpp"
#include "uwrap/binomial_bound.hpp"
#include "uwrap/decision_tree.hpp"
#include "uwrap/error.hpp"

using namespace uwrap;

namespace {

struct Data {
    std::vector<std::vector<double>> rows;
    FactorMatrix m;
    std::vector<bool> y;
};

Data make_tree_data(std::mt19937_64& rng, std::size_t n, std::size_t cols, int levels) {
    Data d;
    for (std::size_t c = 0; c < cols; ++c) d.m.names.push_back("f" + std::to_string(c));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> r(cols);
        for (auto& v : r) v = static_cast<double>(rng() % levels) * 0.5;
        const double p = r[0] > 1.0 ? 0.6 : (cols > 1 && r[1] < 0.5 ? 0.3 : 0.05);
        d.y.push_back(std::bernoulli_distribution(p)(rng));
        d.m.values.insert(d.m.values.end(), r.begin(), r.end());
        d.rows.push_back(r);
    }
    d.m.n_rows = n;
    return d;
}

}  // namespace

TEST(DecisionTree, RootSplitMatchesExhaustiveSearch) {
    std::mt19937_64 rng(21);
    for (int inst = 0; inst < 40; ++inst) {
        const std::size_t n = 20 + rng() % 400, cols = 1 + rng() % 4, msl = 1 + rng() % 30;
        auto d = make_tree_data(rng, n, cols, 2 + static_cast<int>(rng() % 9));
        auto tree = fit_tree(d.m, d.y, {1, msl});
        auto want = oracle::best_split(d.rows, d.y, msl);
        if (!want.found) {
            EXPECT_EQ(tree.nodes.size(), 1u);
            continue;
        }
        ASSERT_FALSE(tree.nodes[0].is_leaf) << inst;
        EXPECT_EQ(tree.nodes[0].factor, want.factor) << inst;
        EXPECT_EQ(tree.nodes[0].threshold, want.threshold) << inst;
    }
}

TEST(DecisionTree, LeavesRespectMinimumSizeAndDepth) {
    std::mt19937_64 rng(8);
    auto d = make_tree_data(rng, 5000, 3, 40);
    auto tree = fit_tree(d.m, d.y, {4, 150});
    EXPECT_LE(tree.depth(), 4u);
    std::size_t total = 0;
    for (auto i : tree.leaf_nodes()) {
        EXPECT_GE(tree.nodes[i].stats.n_train, 150u);
        total += tree.nodes[i].stats.n_train;
    }
    EXPECT_EQ(total, 5000u);
    auto ids = tree.leaf_nodes();
    for (std::size_t i = 0; i < ids.size(); ++i) EXPECT_EQ(tree.nodes[ids[i]].leaf_id, static_cast<int>(i));
}

TEST(DecisionTree, RoutingSendsThresholdLeft) {
    FactorMatrix m;
    m.names = {"x"};
    std::vector<bool> y;
    for (int i = 0; i < 10; ++i) {
        m.values.push_back(i);
        y.push_back(i >= 5);
    }
    m.n_rows = 10;
    auto t = fit_tree(m, y, {3, 1});
    ASSERT_FALSE(t.nodes[0].is_leaf);
    EXPECT_EQ(t.nodes[0].threshold, 4.5);
    const double at[] = {4.5}, above[] = {4.6};
    EXPECT_EQ(t.leaf_for(at).stats.k_train, 0u);
    EXPECT_EQ(t.leaf_for(above).stats.k_train, 5u);
    const double wrong[] = {1.0, 2.0};
    EXPECT_THROW(t.route(wrong), Error);
}

TEST(DecisionTree, PureOrDepthZeroGivesSingleLeaf) {
    std::mt19937_64 rng(1);
    auto d = make_tree_data(rng, 300, 2, 5);
    EXPECT_EQ(fit_tree(d.m, d.y, {0, 1}).leaf_count(), 1u);
    std::vector<bool> none(300, false);
    EXPECT_EQ(fit_tree(d.m, none, {8, 1}).leaf_count(), 1u);
    FactorMatrix empty;
    empty.names = {"x"};
    EXPECT_THROW(fit_tree(empty, {}, {}), Error);
}

TEST(DecisionTree, CalibrationCountsAndBounds) {
    std::mt19937_64 rng(4);
    auto train = make_tree_data(rng, 3000, 2, 10);
    auto calib = make_tree_data(rng, 3000, 2, 10);
    auto t = calibrate_tree(fit_tree(train.m, train.y, {3, 100}), calib.m, calib.y, 0.99);
    EXPECT_TRUE(t.calibrated);
    std::size_t n = 0, k = 0;
    for (auto i : t.leaf_nodes()) {
        const auto& s = t.nodes[i].stats;
        n += s.n_calib;
        k += s.k_calib;
        if (s.n_calib) EXPECT_DOUBLE_EQ(s.uncertainty, clopper_pearson_upper(s.k_calib, s.n_calib, 0.99));
        else EXPECT_EQ(s.uncertainty, 1.0);
    }
    EXPECT_EQ(n, 3000u);
    std::size_t all_k = 0;
    for (bool b : calib.y) all_k += b;
    EXPECT_EQ(k, all_k);
}

TEST(DecisionTree, PruningMergesSparseLeaves) {
    std::mt19937_64 rng(6);
    auto train = make_tree_data(rng, 4000, 2, 20);
    auto calib = make_tree_data(rng, 400, 2, 20);
    auto t = calibrate_tree(fit_tree(train.m, train.y, {6, 50}), calib.m, calib.y, 0.99);
    EXPECT_THROW(prune_tree(fit_tree(train.m, train.y, {6, 50}), 10), Error);
    for (std::size_t min : {std::size_t{0}, std::size_t{20}, std::size_t{60}, std::size_t{100000}}) {
        auto p = prune_tree(t, min);
        std::size_t n = 0;
        for (auto i : p.leaf_nodes()) {
            const auto& s = p.nodes[i].stats;
            n += s.n_calib;
            if (p.leaf_count() > 1) EXPECT_GE(s.n_calib, min);
            if (s.n_calib) EXPECT_DOUBLE_EQ(s.uncertainty, clopper_pearson_upper(s.k_calib, s.n_calib, 0.99));
        }
        EXPECT_EQ(n, 400u);
        EXPECT_LE(p.leaf_count(), t.leaf_count());
        if (min == 0) EXPECT_EQ(p.leaf_count(), t.leaf_count());
        if (min == 100000) EXPECT_EQ(p.leaf_count(), 1u);
    }
}

TEST(DecisionTree, JsonRoundTrip) {
    std::mt19937_64 rng(2);
    auto d = make_tree_data(rng, 2000, 3, 15);
    auto t = calibrate_tree(fit_tree(d.m, d.y, {5, 40}), d.m, d.y, 0.95);
    auto back = tree_from_json(tree_to_json(t));
    EXPECT_EQ(tree_to_json(back), tree_to_json(t));
    for (std::size_t i = 0; i < d.m.rows(); i += 13) EXPECT_EQ(back.route(d.m.row(i)), t.route(d.m.row(i)));
    json broken = tree_to_json(t);
    broken["nodes"][0].erase("left");
    if (!t.nodes[0].is_leaf) EXPECT_THROW(tree_from_json(broken), Error);
}
