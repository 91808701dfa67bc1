#include "uwrap/decision_tree.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>

#include "uwrap/binomial_bound.hpp"
#include "uwrap/error.hpp"

namespace uwrap {

std::size_t DecisionTree::route(std::span<const double> factors) const {
    if (factors.size() != arity)
        throw input_error("tree expects " + std::to_string(arity) + " factors, got " + std::to_string(factors.size()));
    std::size_t i = 0;
    while (!nodes[i].is_leaf) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(factors[n.factor] <= n.threshold ? n.left : n.right);
    }
    return i;
}

std::vector<std::size_t> DecisionTree::leaf_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].is_leaf) out.push_back(i);
    std::sort(out.begin(), out.end(), [&](auto a, auto b) { return nodes[a].leaf_id < nodes[b].leaf_id; });
    return out;
}

std::size_t DecisionTree::depth() const {
    std::function<std::size_t(std::size_t)> rec = [&](std::size_t i) -> std::size_t {
        if (nodes[i].is_leaf) return 0;
        return 1 + std::max(rec(nodes[i].left), rec(nodes[i].right));
    };
    return nodes.empty() ? 0 : rec(0);
}

namespace {

// Proportional to n * Gini: k (n - k) / n.
double gini_mass(std::size_t k, std::size_t n) {
    if (n == 0) return 0.0;
    return static_cast<double>(k) * static_cast<double>(n - k) / static_cast<double>(n);
}

double midpoint(double a, double b) {
    double m = a / 2.0 + b / 2.0;
    if (!(m >= a && m < b)) m = a;
    return m;
}

struct Builder {
    const FactorMatrix& x;
    const std::vector<bool>& y;
    const TreeParams& params;
    std::vector<TreeNode> nodes;

    std::int32_t build(std::vector<std::size_t>& idx, std::size_t depth) {
        const std::size_t n = idx.size();
        std::size_t k = 0;
        for (auto i : idx) k += y[i] ? 1 : 0;

        TreeNode node;
        node.stats.n_train = n;
        node.stats.k_train = k;

        const auto msl = std::max<std::size_t>(params.min_samples_leaf, 1);
        bool can_split = depth < params.max_depth && k != 0 && k != n && n >= 2 * msl;

        std::size_t best_factor = 0;
        double best_threshold = 0.0;
        double best_score = gini_mass(k, n);
        bool found = false;

        if (can_split) {
            std::vector<std::size_t> order(idx);
            for (std::size_t f = 0; f < x.cols(); ++f) {
                std::sort(order.begin(), order.end(), [&](auto a, auto b) {
                    double va = x.row(a)[f], vb = x.row(b)[f];
                    return va < vb || (va == vb && a < b);
                });
                std::size_t left_k = 0;
                for (std::size_t p = 0; p + 1 < n; ++p) {
                    left_k += y[order[p]] ? 1 : 0;
                    const double a = x.row(order[p])[f];
                    const double b = x.row(order[p + 1])[f];
                    if (!(a < b)) continue;
                    const std::size_t nl = p + 1, nr = n - nl;
                    if (nl < msl || nr < msl) continue;
                    const double score = gini_mass(left_k, nl) + gini_mass(k - left_k, nr);
                    // Strict improvement keeps the earliest (factor, threshold) on ties.
                    if (score < best_score - 1e-12 * static_cast<double>(n) || (found && score < best_score)) {
                        best_score = score;
                        best_factor = f;
                        best_threshold = midpoint(a, b);
                        found = true;
                    }
                }
            }
        }

        const auto self = static_cast<std::int32_t>(nodes.size());
        nodes.push_back(node);
        if (!found) return self;

        std::vector<std::size_t> left, right;
        for (auto i : idx) (x.row(i)[best_factor] <= best_threshold ? left : right).push_back(i);
        idx.clear();
        idx.shrink_to_fit();
        nodes[self].is_leaf = false;
        nodes[self].factor = best_factor;
        nodes[self].threshold = best_threshold;
        const auto l = build(left, depth + 1);
        const auto r = build(right, depth + 1);
        nodes[self].left = l;
        nodes[self].right = r;
        return self;
    }
};

// Depth-first copy of the reachable nodes with leaf ids renumbered left to right.
DecisionTree compact(const DecisionTree& t) {
    DecisionTree out;
    out.arity = t.arity;
    out.confidence = t.confidence;
    out.calibrated = t.calibrated;
    std::int32_t next_leaf = 0;
    std::function<std::int32_t(std::size_t)> copy = [&](std::size_t i) -> std::int32_t {
        const auto self = static_cast<std::int32_t>(out.nodes.size());
        out.nodes.push_back(t.nodes[i]);
        if (t.nodes[i].is_leaf) {
            out.nodes[self].leaf_id = next_leaf++;
            out.nodes[self].left = out.nodes[self].right = -1;
            return self;
        }
        const auto l = copy(t.nodes[i].left);
        const auto r = copy(t.nodes[i].right);
        out.nodes[self].left = l;
        out.nodes[self].right = r;
        out.nodes[self].leaf_id = -1;
        return self;
    };
    copy(0);
    return out;
}

}  // namespace

DecisionTree fit_tree(const FactorMatrix& factors, const std::vector<bool>& errors, const TreeParams& params) {
    if (factors.rows() == 0) throw training_error("cannot fit a tree on zero events");
    if (errors.size() != factors.rows()) throw input_error("fit_tree: labels not aligned with factor rows");
    Builder b{factors, errors, params, {}};
    std::vector<std::size_t> idx(factors.rows());
    std::iota(idx.begin(), idx.end(), 0);
    b.build(idx, 0);
    DecisionTree t;
    t.nodes = std::move(b.nodes);
    t.arity = factors.cols();
    return compact(t);
}

DecisionTree calibrate_tree(DecisionTree tree, const FactorMatrix& factors, const std::vector<bool>& errors,
                            double confidence) {
    if (factors.rows() == 0) throw domain_error("calibration set is empty");
    if (errors.size() != factors.rows()) throw input_error("calibrate_tree: labels not aligned with factor rows");
    if (factors.cols() != tree.arity) throw input_error("calibrate_tree: factor arity does not match the tree");
    for (auto& n : tree.nodes) n.stats.n_calib = n.stats.k_calib = 0;
    for (std::size_t i = 0; i < factors.rows(); ++i) {
        auto& s = tree.nodes[tree.route(factors.row(i))].stats;
        ++s.n_calib;
        s.k_calib += errors[i] ? 1 : 0;
    }
    for (auto& n : tree.nodes) {
        if (!n.is_leaf) continue;
        n.stats.uncertainty = n.stats.n_calib ? clopper_pearson_upper(n.stats.k_calib, n.stats.n_calib, confidence) : 1.0;
    }
    tree.confidence = confidence;
    tree.calibrated = true;
    return tree;
}

DecisionTree prune_tree(DecisionTree tree, std::size_t min_leaf_calib) {
    if (!tree.calibrated) throw input_error("prune_tree: tree is not calibrated");
    auto merge_into_leaf = [&](std::size_t i) {
        LeafStats sum;
        std::function<void(std::size_t)> acc = [&](std::size_t j) {
            const auto& n = tree.nodes[j];
            if (n.is_leaf) {
                sum.n_train += n.stats.n_train;
                sum.k_train += n.stats.k_train;
                sum.n_calib += n.stats.n_calib;
                sum.k_calib += n.stats.k_calib;
                return;
            }
            acc(n.left);
            acc(n.right);
        };
        acc(i);
        sum.uncertainty = sum.n_calib ? clopper_pearson_upper(sum.k_calib, sum.n_calib, tree.confidence) : 1.0;
        auto& n = tree.nodes[i];
        n.is_leaf = true;
        n.left = n.right = -1;
        n.stats = sum;
    };
    std::function<void(std::size_t)> visit = [&](std::size_t i) {
        if (tree.nodes[i].is_leaf) return;
        visit(tree.nodes[i].left);
        visit(tree.nodes[i].right);
        const auto& l = tree.nodes[tree.nodes[i].left];
        const auto& r = tree.nodes[tree.nodes[i].right];
        if ((l.is_leaf && l.stats.n_calib < min_leaf_calib) || (r.is_leaf && r.stats.n_calib < min_leaf_calib))
            merge_into_leaf(i);
    };
    visit(0);
    return compact(tree);
}

json tree_to_json(const DecisionTree& tree) {
    json nodes = json::array(), leaves = json::array();
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const auto& n = tree.nodes[i];
        if (n.is_leaf) {
            nodes.push_back({{"id", i}, {"leaf", n.leaf_id}});
            leaves.push_back({{"id", n.leaf_id},
                              {"n", n.stats.n_calib},
                              {"k", n.stats.k_calib},
                              {"uncertainty", n.stats.uncertainty},
                              {"n_train", n.stats.n_train},
                              {"k_train", n.stats.k_train}});
        } else {
            nodes.push_back({{"id", i}, {"factor", n.factor}, {"threshold", n.threshold}, {"left", n.left},
                             {"right", n.right}});
        }
    }
    std::sort(leaves.begin(), leaves.end(), [](const json& a, const json& b) { return a["id"] < b["id"]; });
    return {{"arity", tree.arity},
            {"confidence", tree.confidence},
            {"calibrated", tree.calibrated},
            {"nodes", nodes},
            {"leaves", leaves}};
}

DecisionTree tree_from_json(const json& j) {
    DecisionTree t;
    try {
        t.arity = j.at("arity").get<std::size_t>();
        t.confidence = j.value("confidence", 0.0);
        t.calibrated = j.value("calibrated", false);
        std::map<std::int32_t, LeafStats> leaves;
        for (const auto& l : j.at("leaves")) {
            LeafStats s;
            s.n_calib = l.at("n").get<std::size_t>();
            s.k_calib = l.at("k").get<std::size_t>();
            s.uncertainty = l.at("uncertainty").get<double>();
            s.n_train = l.value("n_train", std::size_t{0});
            s.k_train = l.value("k_train", std::size_t{0});
            leaves[l.at("id").get<std::int32_t>()] = s;
        }
        const auto& nodes = j.at("nodes");
        t.nodes.resize(nodes.size());
        for (const auto& nj : nodes) {
            auto id = nj.at("id").get<std::size_t>();
            if (id >= t.nodes.size()) throw schema_error("tree node id out of range");
            auto& n = t.nodes[id];
            if (nj.contains("leaf")) {
                n.is_leaf = true;
                n.leaf_id = nj["leaf"].get<std::int32_t>();
                auto it = leaves.find(n.leaf_id);
                if (it == leaves.end()) throw schema_error("tree references a missing leaf");
                n.stats = it->second;
            } else {
                n.is_leaf = false;
                n.factor = nj.at("factor").get<std::size_t>();
                n.threshold = nj.at("threshold").get<double>();
                n.left = nj.at("left").get<std::int32_t>();
                n.right = nj.at("right").get<std::int32_t>();
                if (n.factor >= t.arity || n.left <= static_cast<std::int32_t>(id) ||
                    n.right <= static_cast<std::int32_t>(id) || n.left >= static_cast<std::int32_t>(nodes.size()) ||
                    n.right >= static_cast<std::int32_t>(nodes.size()))
                    throw schema_error("malformed tree node");
            }
        }
        if (t.nodes.empty()) throw schema_error("tree has no nodes");
    } catch (const json::exception& e) {
        throw schema_error(std::string("invalid tree JSON: ") + e.what());
    }
    return t;
}

}  // namespace uwrap
