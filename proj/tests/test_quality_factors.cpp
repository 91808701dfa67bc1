#include <gtest/gtest.h>

#include "test_support.hpp"
#include "uwrap/error.hpp"
#include "uwrap/quality_factors.hpp"

using namespace uwrap;
using testing_support::make_event;
using testing_support::small_panel;

namespace {

Sample four_events() {
    Sample s;
    s.sample_id = "X";
    s.events = {make_event("X", "a", {1, 10, 5}), make_event("X", "b", {2, 20, 5}), make_event("X", "c", {2, 30, 6}),
                make_event("X", "d", {3, 40, 7})};
    return s;
}

VariantConfig variant(Variant v, bool outcome = false, ImpactKind k = ImpactKind::Default) {
    VariantConfig c;
    c.variant = v;
    c.include_outcome = outcome;
    c.impact_kind = k;
    return c;
}

}  // namespace

TEST(QualityFactors, MarkerFactorsAreRawGatedIntensities) {
    auto p = small_panel();
    auto e = make_event("X", "a", {1.5, -2.0, 300});
    EXPECT_EQ(marker_factors(e, p.cell_type("R")), (std::vector<double>{1.5, -2.0}));
    EXPECT_EQ(marker_factors(e, p.cell_type("S")), (std::vector<double>{-2.0, 300}));
}

TEST(QualityFactors, PercentileUsesMidRanks) {
    auto p = small_panel();
    auto s = four_events();
    // Marker A values 1, 2, 2, 3: the tied value sits at (1 + 0.5 * 2) / 4.
    EXPECT_DOUBLE_EQ(percentile_factors(s, 0, p.cell_type("R"))[0], 0.125);
    EXPECT_DOUBLE_EQ(percentile_factors(s, 1, p.cell_type("R"))[0], 0.5);
    EXPECT_DOUBLE_EQ(percentile_factors(s, 2, p.cell_type("R"))[0], 0.5);
    EXPECT_DOUBLE_EQ(percentile_factors(s, 3, p.cell_type("R"))[0], 0.875);
    Sample one;
    one.events = {make_event("X", "a", {4, 4, 4})};
    EXPECT_DOUBLE_EQ(percentile_factors(one, 0, p.cell_type("R"))[0], 0.5);
}

TEST(QualityFactors, OutcomeFactor) {
    EXPECT_EQ(outcome_factor(true), 1.0);
    EXPECT_EQ(outcome_factor(false), 0.0);
}

TEST(QualityFactors, ColumnsPerVariant) {
    auto p = small_panel();
    auto s = four_events();
    std::vector<bool> pred = {true, false, true, true};
    auto names = [&](const VariantConfig& v, const char* ct) {
        return assemble_factors(v, s, pred, p, p.cell_type(ct)).names;
    };
    using V = std::vector<std::string>;
    EXPECT_EQ(names(variant(Variant::Baseline), "R"), (V{"marker_A", "marker_B"}));
    EXPECT_EQ(names(variant(Variant::Basic, true), "R"), (V{"marker_A", "marker_B", "outcome"}));
    EXPECT_EQ(names(variant(Variant::Percentile, false, ImpactKind::CategoryBased), "R"),
              (V{"marker_A", "marker_B", "percentile_A", "percentile_B"}));
    EXPECT_EQ(names(variant(Variant::Density, true), "S"), (V{"marker_B", "marker_C", "density_B_C", "outcome"}));
    EXPECT_EQ(names(variant(Variant::Homogeneity, true), "S"), (V{"marker_B", "marker_C", "homogeneity", "outcome"}));
    EXPECT_EQ(names(variant(Variant::Combined, true), "S"),
              (V{"marker_B", "marker_C", "density_B_C", "homogeneity", "outcome"}));
    // Root types have no homogeneity factor unless asked for, so combined reduces to density.
    EXPECT_EQ(names(variant(Variant::Combined, true), "R"), (V{"marker_A", "marker_B", "density_A_B", "outcome"}));
    auto forced = variant(Variant::Combined);
    forced.params.homogeneity = true;
    EXPECT_EQ(names(forced, "R"), (V{"marker_A", "marker_B", "density_A_B", "homogeneity"}));
}

TEST(QualityFactors, MatrixRowsFollowEvents) {
    auto p = small_panel();
    auto s = four_events();
    std::vector<bool> pred = {true, false, true, true};
    auto m = assemble_factors(variant(Variant::Percentile, true), s, pred, p, p.cell_type("R"));
    ASSERT_EQ(m.rows(), 4u);
    EXPECT_EQ(m.row(3)[0], 3.0);
    EXPECT_EQ(m.row(3)[1], 40.0);
    EXPECT_DOUBLE_EQ(m.row(3)[2], 0.875);
    EXPECT_EQ(m.row(1)[4], 0.0);
    EXPECT_EQ(m.row(2)[4], 1.0);
}

TEST(QualityFactors, HomogeneityOnRootIsConfigError) {
    auto p = small_panel();
    auto s = four_events();
    try {
        assemble_factors(variant(Variant::Homogeneity), s, {true, true, true, true}, p, p.cell_type("R"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
}

TEST(QualityFactors, VariantValidation) {
    EXPECT_THROW(variant(Variant::Baseline, true).validate(), Error);
    EXPECT_THROW(variant(Variant::Basic, true, ImpactKind::CategoryBased).validate(), Error);
    EXPECT_NO_THROW(variant(Variant::Density, false, ImpactKind::CategoryBased).validate());
    EXPECT_THROW(parse_variant("magic"), Error);
    EXPECT_EQ(parse_variant("combined"), Variant::Combined);
}

TEST(QualityFactors, VariantLabelsAndJson) {
    EXPECT_EQ(variant(Variant::Basic, true).label(), "basic+outcome");
    EXPECT_EQ(variant(Variant::Density, false, ImpactKind::CategoryBased).label(), "density/category");
    EXPECT_EQ(variant(Variant::Baseline).label(), "baseline");
    auto v = variant(Variant::Combined, true);
    v.params.dbscan_eps = 0.45;
    v.params.homogeneity = false;
    auto back = variant_config_from_json(variant_config_to_json(v));
    EXPECT_EQ(back.variant, Variant::Combined);
    EXPECT_TRUE(back.include_outcome);
    EXPECT_EQ(back.params.dbscan_eps, 0.45);
    EXPECT_EQ(back.params.homogeneity, std::optional<bool>(false));
}

TEST(QualityFactors, AppendRowsChecksColumns) {
    FactorMatrix a, b;
    a.names = {"x"};
    b.names = {"y"};
    b.values = {1};
    b.n_rows = 1;
    FactorMatrix empty;
    empty.append_rows(b);
    EXPECT_EQ(empty.names, b.names);
    EXPECT_THROW(a.append_rows(b), Error);
}
