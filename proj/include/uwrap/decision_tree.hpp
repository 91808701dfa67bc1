#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uwrap/io_util.hpp"
#include "uwrap/quality_factors.hpp"

namespace uwrap {

struct LeafStats {
    std::size_t n_train = 0;
    std::size_t k_train = 0;
    std::size_t n_calib = 0;
    std::size_t k_calib = 0;
    double uncertainty = 1.0;  // vacuous until calibrated
};

struct TreeNode {
    bool is_leaf = true;
    // Internal nodes: value <= threshold goes left, otherwise right.
    std::size_t factor = 0;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    // Leaves.
    std::int32_t leaf_id = -1;
    LeafStats stats;
};

struct TreeParams {
    std::size_t max_depth = 8;
    std::size_t min_samples_leaf = 200;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // root at index 0
    std::size_t arity = 0;
    double confidence = 0.0;  // 0 while uncalibrated
    bool calibrated = false;

    // Index of the leaf node reached by a factor vector.
    std::size_t route(std::span<const double> factors) const;
    const TreeNode& leaf_for(std::span<const double> factors) const { return nodes[route(factors)]; }
    std::vector<std::size_t> leaf_nodes() const;  // leaf_id order
    std::size_t leaf_count() const { return leaf_nodes().size(); }
    std::size_t depth() const;
};

// Greedy CART on weighted Gini impurity. `errors[i]` is true where the DDM was wrong.
// Candidate thresholds are midpoints between consecutive distinct values; ties go to the
// lower factor index, then the lower threshold. Throws training_error on empty input.
DecisionTree fit_tree(const FactorMatrix& factors, const std::vector<bool>& errors, const TreeParams& params);

// Per-leaf (n, k) from the calibration set and the exact upper bound at `confidence`.
DecisionTree calibrate_tree(DecisionTree tree, const FactorMatrix& factors, const std::vector<bool>& errors,
                            double confidence = 0.99);

// Collapses any subtree with a child leaf holding fewer than `min_leaf_calib` calibration
// events into one leaf with summed counts and a recomputed bound, bottom-up.
DecisionTree prune_tree(DecisionTree tree, std::size_t min_leaf_calib);

json tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const json& j);

}  // namespace uwrap
