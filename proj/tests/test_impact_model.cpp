#include <gtest/gtest.h>

#include "test_support.hpp"
#include "uwrap/binomial_bound.hpp"
#include "uwrap/error.hpp"
#include "uwrap/impact_model.hpp"

using namespace uwrap;

namespace {

// Thresholds one marker in transformed space; deliberately imperfect on the demo mixture.
class ThresholdPredictor : public Predictor {
public:
    ThresholdPredictor(std::string ct, std::size_t marker, double t) : ct_(std::move(ct)), marker_(marker), t_(t) {}
    bool predict(const Event& e) const override { return MarkerTransform{}.apply(e.markers[marker_]) >= t_; }
    const std::string& cell_type() const override { return ct_; }

private:
    std::string ct_;
    std::size_t marker_;
    double t_;
};

struct Fixture {
    Dataset data = generate_dataset(testing_support::small_generator(1500), {3, 3, 2}, 17);
    std::shared_ptr<const Predictor> r = std::make_shared<ThresholdPredictor>("R", 0, 1.8);
    std::shared_ptr<const Predictor> s = std::make_shared<ThresholdPredictor>("S", 2, 2.0);
};

VariantConfig make_variant(Variant v, bool outcome, ImpactKind k = ImpactKind::Default) {
    VariantConfig c;
    c.variant = v;
    c.include_outcome = outcome;
    c.impact_kind = k;
    return c;
}

}  // namespace

TEST(ImpactModel, DepthZeroIsNaiveBinomialBound) {
    Fixture f;
    BuildOptions opt;
    opt.tree.max_depth = 0;
    auto w = build_wrapper(make_variant(Variant::Baseline, false), f.r, f.data.samples_in(Split::Train),
                           f.data.samples_in(Split::Calibration), f.data.panel, "R", opt);
    std::size_t n = 0, k = 0;
    for (const auto* s : f.data.samples_in(Split::Calibration)) {
        auto err = prediction_errors(*s, predict_sample(*f.r, *s), "R");
        n += err.size();
        k += static_cast<std::size_t>(std::count(err.begin(), err.end(), true));
    }
    ASSERT_GT(k, 0u);
    const double expected = clopper_pearson_upper(k, n, 0.99);
    for (const auto& e : wrapper_apply(w, *f.data.samples_in(Split::Test)[0])) {
        EXPECT_EQ(e.uncertainty, expected);
        EXPECT_EQ(e.certainty, 1.0 - expected);
    }
}

TEST(ImpactModel, DefaultMinLeafCalibBySpec) {
    auto p = testing_support::small_panel();
    EXPECT_EQ(default_min_leaf_calib(p.cell_type("R")), 200u);
    EXPECT_EQ(default_min_leaf_calib(p.cell_type("S")), 50u);
}

TEST(ImpactModel, EstimatesAreLeafBoundsAndPrunedLeavesAreLarge) {
    Fixture f;
    auto w = build_wrapper(make_variant(Variant::Basic, true), f.r, f.data.samples_in(Split::Train),
                           f.data.samples_in(Split::Calibration), f.data.panel, "R");
    EXPECT_EQ(w.min_leaf_calib, 200u);
    const auto& tree = w.impact.trees.at(0);
    if (tree.leaf_count() > 1)
        for (auto i : tree.leaf_nodes()) EXPECT_GE(tree.nodes[i].stats.n_calib, 200u);
    auto est = wrapper_apply(w, *f.data.samples_in(Split::Test)[0]);
    ASSERT_EQ(est.size(), 1500u);
    for (const auto& e : est) {
        EXPECT_GE(e.uncertainty, 0.0);
        EXPECT_LE(e.uncertainty, 1.0);
        EXPECT_DOUBLE_EQ(e.uncertainty + e.certainty, 1.0);
        const auto& leaf = tree.nodes[tree.leaf_nodes().at(e.leaf_id)];
        EXPECT_EQ(e.uncertainty, leaf.stats.uncertainty);
        ASSERT_TRUE(e.scope_flag.has_value());
    }
}

TEST(ImpactModel, CategoryBasedUsesTreePerPrediction) {
    Fixture f;
    auto w = build_wrapper(make_variant(Variant::Percentile, false, ImpactKind::CategoryBased), f.r,
                           f.data.samples_in(Split::Train), f.data.samples_in(Split::Calibration), f.data.panel, "R");
    ASSERT_EQ(w.impact.kind, ImpactKind::CategoryBased);
    ASSERT_EQ(w.impact.trees.size(), 2u);
    EXPECT_EQ(w.leaf_counts.size(), 2u);
    for (const auto& e : wrapper_apply(w, *f.data.samples_in(Split::Test)[1])) EXPECT_EQ(e.tree, e.prediction ? 1u : 0u);
}

TEST(ImpactModel, CategoryFallsBackWhenOneSideIsEmpty) {
    Fixture f;
    auto always = std::make_shared<ThresholdPredictor>("R", 0, -1e9);
    auto w = build_wrapper(make_variant(Variant::Basic, false, ImpactKind::CategoryBased), always,
                           f.data.samples_in(Split::Train), f.data.samples_in(Split::Calibration), f.data.panel, "R");
    EXPECT_EQ(w.impact.kind, ImpactKind::Default);
    EXPECT_EQ(w.impact.trees.size(), 1u);
}

TEST(ImpactModel, SubtypeUsesParentPopulation) {
    Fixture f;
    auto w = build_wrapper(make_variant(Variant::Combined, true), f.s, f.data.samples_in(Split::Train),
                           f.data.samples_in(Split::Calibration), f.data.panel, "S");
    EXPECT_EQ(w.min_leaf_calib, 50u);
    EXPECT_EQ(w.impact.factor_names,
              (std::vector<std::string>{"marker_B", "marker_C", "density_B_C", "homogeneity", "outcome"}));
    const auto& test = *f.data.samples_in(Split::Test)[0];
    auto pop = parent_population(test, f.data.panel.cell_type("S"), SubtypeBasis::GroundTruth, nullptr);
    for (const auto& e : pop.events) EXPECT_TRUE(*e.label("R"));
    EXPECT_LT(pop.size(), test.size());
    auto by_pred = parent_population(test, f.data.panel.cell_type("S"), SubtypeBasis::ParentPrediction, f.r.get());
    for (const auto& e : by_pred.events) EXPECT_TRUE(f.r->predict(e));
    EXPECT_THROW(parent_population(test, f.data.panel.cell_type("S"), SubtypeBasis::ParentPrediction, nullptr), Error);
    EXPECT_EQ(parent_population(test, f.data.panel.cell_type("R"), SubtypeBasis::GroundTruth, nullptr).size(),
              test.size());
}

TEST(ImpactModel, JsonRoundTripReproducesEstimates) {
    Fixture f;
    auto w = build_wrapper(make_variant(Variant::Density, false, ImpactKind::CategoryBased), f.r,
                           f.data.samples_in(Split::Train), f.data.samples_in(Split::Calibration), f.data.panel, "R");
    const auto j = wrapper_to_json(w);
    auto back = wrapper_from_json(j);
    EXPECT_EQ(wrapper_to_json(back), j);
    EXPECT_THROW(wrapper_apply(back, *f.data.samples_in(Split::Test)[0]), Error);
    back.ddm = f.r;
    const auto& test = *f.data.samples_in(Split::Test)[0];
    auto a = wrapper_apply(w, test), b = wrapper_apply(back, test);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].uncertainty, b[i].uncertainty);
        EXPECT_EQ(a[i].leaf_id, b[i].leaf_id);
    }
    json bad = j;
    bad["impact_model"]["trees"].erase(1);
    EXPECT_THROW(wrapper_from_json(bad), Error);
}

TEST(ImpactModel, ScopeRanges) {
    std::vector<Event> ev = {testing_support::make_event("X", "a", {0, 10}), testing_support::make_event("X", "b", {4, 20})};
    auto r = fit_scope_ranges(ev, 0.25);
    EXPECT_FALSE(scope_check(r, testing_support::make_event("X", "c", {5, 12})));
    EXPECT_TRUE(scope_check(r, testing_support::make_event("X", "c", {5.01, 12})));
    EXPECT_TRUE(scope_check(r, testing_support::make_event("X", "c", {1, 7.4})));
    EXPECT_THROW(scope_check(r, testing_support::make_event("X", "c", {1})), Error);
}

TEST(ImpactModel, PredictionErrorsNeedLabels) {
    Sample s;
    s.events = {testing_support::make_event("X", "a", {0, 0, 0}, {{"R", true}}),
                testing_support::make_event("X", "b", {0, 0, 0})};
    EXPECT_THROW(prediction_errors(s, {true, true}, "R"), Error);
    s.events.pop_back();
    EXPECT_EQ(prediction_errors(s, {false}, "R"), std::vector<bool>{true});
}
