#include "uwrap/impact_model.hpp"

#include <algorithm>
#include <iostream>
#include <limits>

#include "uwrap/error.hpp"

namespace uwrap {

namespace {

void widen(ScopeRanges& r, const Event& e) {
    if (r.min.empty()) {
        r.min = e.markers;
        r.max = e.markers;
        return;
    }
    if (e.markers.size() != r.min.size()) throw input_error("scope ranges: inconsistent marker counts");
    for (std::size_t i = 0; i < e.markers.size(); ++i) {
        r.min[i] = std::min(r.min[i], e.markers[i]);
        r.max[i] = std::max(r.max[i], e.markers[i]);
    }
}

FactorMatrix select_rows(const FactorMatrix& m, const std::vector<std::size_t>& rows) {
    FactorMatrix out;
    out.names = m.names;
    out.n_rows = rows.size();
    out.values.reserve(rows.size() * m.cols());
    for (auto r : rows) {
        auto row = m.row(r);
        out.values.insert(out.values.end(), row.begin(), row.end());
    }
    return out;
}

template <class T>
std::vector<T> select(const std::vector<T>& v, const std::vector<std::size_t>& rows) {
    std::vector<T> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(v[r]);
    return out;
}

struct FactorData {
    FactorMatrix factors;
    std::vector<bool> errors;
    std::vector<bool> predictions;
};

FactorData collect(const std::vector<const Sample*>& samples, const UncertaintyWrapper& w, SubtypeBasis basis,
                   const Predictor* parent_ddm) {
    FactorData d;
    const auto& spec = w.spec();
    for (const auto* s : samples) {
        auto pop = parent_population(*s, spec, basis, parent_ddm);
        auto preds = predict_sample(*w.ddm, pop);
        auto errs = prediction_errors(pop, preds, w.cell_type);
        auto f = assemble_factors(w.variant, pop, preds, w.panel, spec);
        if (d.factors.n_rows == 0 && d.factors.names.empty()) d.factors.names = f.names;
        d.factors.append_rows(f);
        d.errors.insert(d.errors.end(), errs.begin(), errs.end());
        d.predictions.insert(d.predictions.end(), preds.begin(), preds.end());
    }
    return d;
}

DecisionTree build_tree(const FactorMatrix& tf, const std::vector<bool>& te, const FactorMatrix& cf,
                        const std::vector<bool>& ce, const BuildOptions& opt, std::size_t min_leaf,
                        std::vector<std::pair<std::size_t, std::size_t>>& counts) {
    auto tree = calibrate_tree(fit_tree(tf, te, opt.tree), cf, ce, opt.confidence);
    const auto before = tree.leaf_count();
    tree = prune_tree(std::move(tree), min_leaf);
    counts.emplace_back(before, tree.leaf_count());
    return tree;
}

json scope_to_json(const ScopeRanges& r) { return {{"min", r.min}, {"max", r.max}, {"tolerance", r.tolerance}}; }

}  // namespace

ScopeRanges fit_scope_ranges(const std::vector<const Sample*>& train, double tolerance) {
    ScopeRanges r;
    r.tolerance = tolerance;
    for (const auto* s : train)
        for (const auto& e : s->events) widen(r, e);
    return r;
}

ScopeRanges fit_scope_ranges(std::span<const Event> events, double tolerance) {
    ScopeRanges r;
    r.tolerance = tolerance;
    for (const auto& e : events) widen(r, e);
    return r;
}

bool scope_check(const ScopeRanges& r, const Event& e) {
    if (r.min.empty()) return false;
    if (e.markers.size() != r.min.size()) throw input_error("scope check: marker count mismatch");
    for (std::size_t i = 0; i < e.markers.size(); ++i) {
        const double slack = r.tolerance * (r.max[i] - r.min[i]);
        if (e.markers[i] < r.min[i] - slack || e.markers[i] > r.max[i] + slack) return true;
    }
    return false;
}

SubtypeBasis parse_subtype_basis(std::string_view s) {
    if (s == "ground_truth") return SubtypeBasis::GroundTruth;
    if (s == "parent_prediction") return SubtypeBasis::ParentPrediction;
    throw config_error("unknown subtype basis '" + std::string(s) + "'");
}

std::string_view to_string(SubtypeBasis b) {
    return b == SubtypeBasis::GroundTruth ? "ground_truth" : "parent_prediction";
}

std::size_t default_min_leaf_calib(const CellTypeSpec& spec) { return spec.parent ? 50 : 200; }

Sample parent_population(const Sample& sample, const CellTypeSpec& spec, SubtypeBasis basis,
                         const Predictor* parent_ddm) {
    if (!spec.parent) return sample;
    if (basis == SubtypeBasis::ParentPrediction && !parent_ddm)
        throw config_error("subtype " + spec.name + " needs the parent DDM to select its events");
    Sample out;
    out.sample_id = sample.sample_id;
    for (const auto& e : sample.events) {
        bool member = false;
        if (basis == SubtypeBasis::GroundTruth) {
            auto lab = e.label(*spec.parent);
            if (!lab) throw schema_error("event " + e.event_id + " has no " + *spec.parent + " label");
            member = *lab;
        } else {
            member = parent_ddm->predict(e);
        }
        if (member) out.events.push_back(e);
    }
    return out;
}

std::vector<bool> prediction_errors(const Sample& sample, const std::vector<bool>& predictions,
                                    const std::string& cell_type) {
    if (predictions.size() != sample.size()) throw input_error("predictions not aligned with sample events");
    std::vector<bool> errs(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        auto lab = sample.events[i].label(cell_type);
        if (!lab) throw schema_error("event " + sample.events[i].event_id + " has no " + cell_type + " label");
        errs[i] = predictions[i] != *lab;
    }
    return errs;
}

UncertaintyWrapper build_wrapper(const VariantConfig& variant, std::shared_ptr<const Predictor> ddm,
                                 const std::vector<const Sample*>& train, const std::vector<const Sample*>& calib,
                                 const Panel& panel, const std::string& cell_type, const BuildOptions& options,
                                 const Predictor* parent_ddm) {
    variant.validate();
    if (!ddm) throw input_error("build_wrapper: no DDM given");
    if (train.empty() || calib.empty()) throw input_error("build_wrapper: training and calibration splits must be nonempty");

    UncertaintyWrapper w;
    w.cell_type = cell_type;
    w.panel = panel;
    w.variant = variant;
    w.confidence = options.confidence;
    w.ddm = std::move(ddm);
    const auto& spec = w.spec();
    w.min_leaf_calib = options.min_leaf_calib.value_or(default_min_leaf_calib(spec));

    auto tr = collect(train, w, options.subtype_basis, parent_ddm);
    auto ca = collect(calib, w, options.subtype_basis, parent_ddm);
    if (tr.factors.rows() == 0 || ca.factors.rows() == 0)
        throw input_error("build_wrapper: no " + cell_type + " training or calibration events after selection");
    w.impact.factor_names = tr.factors.names;

    auto kind = variant.impact_kind;
    std::vector<std::size_t> parts[2][2];  // [train/calib][negative/positive]
    if (kind == ImpactKind::CategoryBased) {
        for (std::size_t i = 0; i < tr.predictions.size(); ++i) parts[0][tr.predictions[i] ? 1 : 0].push_back(i);
        for (std::size_t i = 0; i < ca.predictions.size(); ++i) parts[1][ca.predictions[i] ? 1 : 0].push_back(i);
        for (auto& side : parts)
            for (auto& p : side)
                if (p.empty()) kind = ImpactKind::Default;
        if (kind == ImpactKind::Default)
            std::clog << "warning: " << cell_type << " " << variant.label()
                      << ": a prediction category has no events; falling back to the default impact model\n";
    }
    w.impact.kind = kind;
    if (kind == ImpactKind::Default) {
        w.impact.trees.push_back(
            build_tree(tr.factors, tr.errors, ca.factors, ca.errors, options, w.min_leaf_calib, w.leaf_counts));
    } else {
        for (int c = 0; c < 2; ++c)
            w.impact.trees.push_back(build_tree(select_rows(tr.factors, parts[0][c]), select(tr.errors, parts[0][c]),
                                                select_rows(ca.factors, parts[1][c]), select(ca.errors, parts[1][c]),
                                                options, w.min_leaf_calib, w.leaf_counts));
    }

    if (options.fit_scope) {
        std::vector<const Sample*> pops;
        std::vector<Sample> storage;
        storage.reserve(train.size());
        for (const auto* s : train) storage.push_back(parent_population(*s, spec, options.subtype_basis, parent_ddm));
        for (const auto& s : storage) pops.push_back(&s);
        w.scope = fit_scope_ranges(pops, options.scope_tolerance);
    }
    return w;
}

std::vector<UncertaintyEstimate> wrapper_apply(const UncertaintyWrapper& w, const Sample& sample) {
    if (!w.ddm) throw input_error("wrapper for " + w.cell_type + " has no DDM attached");
    for (const auto& e : sample.events)
        if (e.markers.size() != w.panel.marker_count())
            throw input_error("event " + e.event_id + " has " + std::to_string(e.markers.size()) +
                              " markers; the wrapper panel has " + std::to_string(w.panel.marker_count()));
    auto preds = predict_sample(*w.ddm, sample);
    auto factors = assemble_factors(w.variant, sample, preds, w.panel, w.spec());
    std::vector<UncertaintyEstimate> out(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        auto& est = out[i];
        est.event_id = sample.events[i].event_id;
        est.prediction = preds[i];
        est.tree = w.impact.tree_index(preds[i]);
        const auto& tree = w.impact.trees.at(est.tree);
        const auto& leaf = tree.leaf_for(factors.row(i));
        est.leaf_id = leaf.leaf_id;
        est.uncertainty = std::clamp(leaf.stats.uncertainty, 0.0, 1.0);
        est.certainty = 1.0 - est.uncertainty;
        if (w.scope) est.scope_flag = scope_check(*w.scope, sample.events[i]);
    }
    return out;
}

json wrapper_to_json(const UncertaintyWrapper& w) {
    json trees = json::array();
    for (std::size_t t = 0; t < w.impact.trees.size(); ++t) {
        auto tj = tree_to_json(w.impact.trees[t]);
        tj["category"] = w.impact.kind == ImpactKind::Default ? "all" : (t == 0 ? "negative" : "positive");
        trees.push_back(std::move(tj));
    }
    json counts = json::array();
    for (const auto& [before, after] : w.leaf_counts) counts.push_back({{"before", before}, {"after", after}});
    return {{"cell_type", w.cell_type},
            {"variant", variant_config_to_json(w.variant)},
            {"impact_model",
             {{"kind", to_string(w.impact.kind)}, {"factor_names", w.impact.factor_names}, {"trees", trees}}},
            {"scope_ranges", w.scope ? scope_to_json(*w.scope) : json(nullptr)},
            {"ddm_ref", w.ddm_ref},
            {"confidence", w.confidence},
            {"min_leaf_calib", w.min_leaf_calib},
            {"leaf_counts", counts},
            {"panel", panel_to_json(w.panel)}};
}

UncertaintyWrapper wrapper_from_json(const json& j) {
    UncertaintyWrapper w;
    try {
        w.cell_type = j.at("cell_type").get<std::string>();
        w.panel = panel_from_json(j.at("panel"));
        w.panel.cell_type(w.cell_type);
        w.variant = variant_config_from_json(j.at("variant"));
        const auto& im = j.at("impact_model");
        w.impact.kind = parse_impact_kind(im.at("kind").get<std::string>());
        w.impact.factor_names = im.at("factor_names").get<std::vector<std::string>>();
        for (const auto& t : im.at("trees")) w.impact.trees.push_back(tree_from_json(t));
        const std::size_t expected = w.impact.kind == ImpactKind::Default ? 1 : 2;
        if (w.impact.trees.size() != expected) throw schema_error("impact model has the wrong number of trees");
        for (const auto& t : w.impact.trees)
            if (t.arity != w.impact.factor_names.size()) throw schema_error("tree arity does not match factor names");
        if (!j.at("scope_ranges").is_null()) {
            ScopeRanges r;
            r.min = j["scope_ranges"].at("min").get<std::vector<double>>();
            r.max = j["scope_ranges"].at("max").get<std::vector<double>>();
            r.tolerance = j["scope_ranges"].value("tolerance", 0.0);
            w.scope = r;
        }
        w.ddm_ref = j.value("ddm_ref", std::string());
        w.confidence = j.at("confidence").get<double>();
        w.min_leaf_calib = j.value("min_leaf_calib", std::size_t{0});
        for (const auto& c : j.value("leaf_counts", json::array()))
            w.leaf_counts.emplace_back(c.at("before").get<std::size_t>(), c.at("after").get<std::size_t>());
    } catch (const json::exception& e) {
        throw schema_error(std::string("invalid wrapper JSON: ") + e.what());
    }
    return w;
}

}  // namespace uwrap
