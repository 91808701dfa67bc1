#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uwrap/data_model.hpp"
#include "uwrap/ddm.hpp"
#include "uwrap/decision_tree.hpp"
#include "uwrap/quality_factors.hpp"

namespace uwrap {

// Range-based scope stub: per-marker training min/max.
struct ScopeRanges {
    std::vector<double> min;
    std::vector<double> max;
    double tolerance = 0.0;  // fraction of the span added on each side
};

ScopeRanges fit_scope_ranges(const std::vector<const Sample*>& train, double tolerance = 0.0);
ScopeRanges fit_scope_ranges(std::span<const Event> events, double tolerance = 0.0);
// True when any marker lies outside [min - tol * span, max + tol * span].
bool scope_check(const ScopeRanges& ranges, const Event& event);

struct QualityImpactModel {
    ImpactKind kind = ImpactKind::Default;
    std::vector<DecisionTree> trees;  // default: {all}; category-based: {predicted negative, predicted positive}
    std::vector<std::string> factor_names;

    std::size_t tree_index(bool prediction) const {
        return kind == ImpactKind::CategoryBased ? (prediction ? 1 : 0) : 0;
    }
};

struct UncertaintyEstimate {
    std::string event_id;
    bool prediction = false;
    double uncertainty = 1.0;
    double certainty = 0.0;
    std::size_t tree = 0;
    std::int32_t leaf_id = -1;
    std::optional<bool> scope_flag;
};

struct UncertaintyWrapper {
    std::string cell_type;
    Panel panel;
    VariantConfig variant;
    QualityImpactModel impact;
    std::optional<ScopeRanges> scope;
    double confidence = 0.99;
    std::size_t min_leaf_calib = 0;
    std::string ddm_ref;
    std::shared_ptr<const Predictor> ddm;

    // Leaf counts per tree before and after pruning (diagnostics only).
    std::vector<std::pair<std::size_t, std::size_t>> leaf_counts;

    const CellTypeSpec& spec() const { return panel.cell_type(cell_type); }
};

enum class SubtypeBasis { GroundTruth, ParentPrediction };

SubtypeBasis parse_subtype_basis(std::string_view s);
std::string_view to_string(SubtypeBasis b);

struct BuildOptions {
    TreeParams tree;
    double confidence = 0.99;
    // Unset: 200 for root cell types, 50 for subtypes.
    std::optional<std::size_t> min_leaf_calib;
    SubtypeBasis subtype_basis = SubtypeBasis::GroundTruth;
    double scope_tolerance = 0.0;
    bool fit_scope = true;
};

std::size_t default_min_leaf_calib(const CellTypeSpec& spec);

// Events of `sample` belonging to the parent population of `spec` (all events for a root type).
// GroundTruth uses the parent label; ParentPrediction asks `parent_ddm`.
Sample parent_population(const Sample& sample, const CellTypeSpec& spec, SubtypeBasis basis,
                         const Predictor* parent_ddm);

// Per-event DDM error indicator (prediction != label); throws schema_error on a missing label.
std::vector<bool> prediction_errors(const Sample& sample, const std::vector<bool>& predictions,
                                    const std::string& cell_type);

UncertaintyWrapper build_wrapper(const VariantConfig& variant, std::shared_ptr<const Predictor> ddm,
                                 const std::vector<const Sample*>& train, const std::vector<const Sample*>& calib,
                                 const Panel& panel, const std::string& cell_type, const BuildOptions& options = {},
                                 const Predictor* parent_ddm = nullptr);

// Predicts, fits the sample-context factors on `sample`, and routes every event.
std::vector<UncertaintyEstimate> wrapper_apply(const UncertaintyWrapper& wrapper, const Sample& sample);

json wrapper_to_json(const UncertaintyWrapper& wrapper);
// The returned wrapper has no DDM attached; set `ddm` before applying it.
UncertaintyWrapper wrapper_from_json(const json& j);

}  // namespace uwrap
