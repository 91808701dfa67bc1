#include "uwrap/quality_factors.hpp"

#include <algorithm>

#include "uwrap/dbscan.hpp"
#include "uwrap/error.hpp"

namespace uwrap {

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::Baseline: return "baseline";
        case Variant::Basic: return "basic";
        case Variant::Percentile: return "percentile";
        case Variant::Density: return "density";
        case Variant::Homogeneity: return "homogeneity";
        case Variant::Combined: return "combined";
    }
    return "basic";
}

Variant parse_variant(std::string_view s) {
    for (auto v : {Variant::Baseline, Variant::Basic, Variant::Percentile, Variant::Density, Variant::Homogeneity,
                   Variant::Combined})
        if (to_string(v) == s) return v;
    throw config_error("unknown variant '" + std::string(s) + "'");
}

std::string_view to_string(ImpactKind k) { return k == ImpactKind::Default ? "default" : "category_based"; }

ImpactKind parse_impact_kind(std::string_view s) {
    if (s == "default") return ImpactKind::Default;
    if (s == "category_based") return ImpactKind::CategoryBased;
    throw config_error("unknown impact model kind '" + std::string(s) + "'");
}

void VariantConfig::validate() const {
    if (variant == Variant::Baseline && (include_outcome || impact_kind != ImpactKind::Default))
        throw config_error("the baseline variant uses the default impact model without the outcome factor");
    if (impact_kind == ImpactKind::CategoryBased && include_outcome)
        throw config_error("category-based impact models do not take the outcome factor");
    if (!(params.dbscan_eps > 0.0) || params.dbscan_min_pts < 1) throw config_error("invalid DBSCAN parameters");
}

std::string VariantConfig::label() const {
    std::string s(to_string(variant));
    if (include_outcome) s += "+outcome";
    if (impact_kind == ImpactKind::CategoryBased) s += "/category";
    return s;
}

json variant_config_to_json(const VariantConfig& v) {
    return {{"variant", to_string(v.variant)},
            {"include_outcome", v.include_outcome},
            {"impact_model_kind", to_string(v.impact_kind)},
            {"params",
             {{"transform", transform_to_json(v.params.transform)},
              {"dbscan_eps", v.params.dbscan_eps},
              {"dbscan_min_pts", v.params.dbscan_min_pts},
              {"kde_bandwidth", to_string(v.params.bandwidth)},
              {"homogeneity", v.params.homogeneity ? json(*v.params.homogeneity) : json(nullptr)}}}};
}

VariantConfig variant_config_from_json(const json& j) {
    VariantConfig v;
    try {
        v.variant = parse_variant(j.at("variant").get<std::string>());
        v.include_outcome = j.value("include_outcome", false);
        v.impact_kind = parse_impact_kind(j.value("impact_model_kind", std::string("default")));
        if (j.contains("params")) {
            const auto& p = j["params"];
            v.params.transform = transform_from_json(p.value("transform", json()));
            v.params.dbscan_eps = p.value("dbscan_eps", v.params.dbscan_eps);
            v.params.dbscan_min_pts = p.value("dbscan_min_pts", v.params.dbscan_min_pts);
            v.params.bandwidth = parse_bandwidth_rule(p.value("kde_bandwidth", std::string("scott")));
            if (p.contains("homogeneity") && !p["homogeneity"].is_null())
                v.params.homogeneity = p["homogeneity"].get<bool>();
        }
    } catch (const json::exception& e) {
        throw config_error(std::string("invalid variant config: ") + e.what());
    }
    v.validate();
    return v;
}

void FactorMatrix::append_rows(const FactorMatrix& other) {
    if (n_rows == 0 && names.empty()) names = other.names;
    if (other.names != names) throw input_error("factor matrices have different columns");
    values.insert(values.end(), other.values.begin(), other.values.end());
    n_rows += other.n_rows;
}

std::vector<double> marker_factors(const Event& event, const CellTypeSpec& spec) {
    std::vector<double> out;
    for (auto m : gated_markers(spec)) out.push_back(event.markers.at(m));
    return out;
}

namespace {

struct PercentileModel {
    std::vector<std::vector<double>> sorted;  // per gated marker

    PercentileModel(const Sample& sample, const std::vector<std::size_t>& markers) {
        for (auto m : markers) {
            std::vector<double> v;
            v.reserve(sample.size());
            for (const auto& e : sample.events) v.push_back(e.markers.at(m));
            std::sort(v.begin(), v.end());
            sorted.push_back(std::move(v));
        }
    }

    double rank(std::size_t k, double value) const {
        const auto& v = sorted[k];
        auto lo = std::lower_bound(v.begin(), v.end(), value);
        auto hi = std::upper_bound(lo, v.end(), value);
        const double less = static_cast<double>(lo - v.begin());
        const double equal = static_cast<double>(hi - lo);
        return (less + 0.5 * equal) / static_cast<double>(v.size());
    }
};

using Column = std::vector<double>;

struct ColumnSet {
    std::vector<std::string> names;
    std::vector<Column> columns;

    void add(std::string name, Column c) {
        names.push_back(std::move(name));
        columns.push_back(std::move(c));
    }

    FactorMatrix to_matrix(std::size_t rows) && {
        FactorMatrix m;
        m.names = std::move(names);
        m.n_rows = rows;
        m.values.resize(rows * m.names.size());
        for (std::size_t c = 0; c < columns.size(); ++c)
            for (std::size_t r = 0; r < rows; ++r) m.values[r * m.names.size() + c] = columns[c][r];
        return m;
    }
};

void add_marker_columns(ColumnSet& cs, const Sample& sample, const Panel& panel, const CellTypeSpec& spec) {
    for (auto m : gated_markers(spec)) {
        Column c;
        c.reserve(sample.size());
        for (const auto& e : sample.events) c.push_back(e.markers.at(m));
        cs.add("marker_" + panel.marker_names.at(m), std::move(c));
    }
}

void add_percentile_columns(ColumnSet& cs, const Sample& sample, const Panel& panel, const CellTypeSpec& spec) {
    auto markers = gated_markers(spec);
    if (sample.events.empty()) {
        for (auto m : markers) cs.add("percentile_" + panel.marker_names.at(m), {});
        return;
    }
    PercentileModel pm(sample, markers);
    for (std::size_t k = 0; k < markers.size(); ++k) {
        Column c;
        c.reserve(sample.size());
        for (const auto& e : sample.events) c.push_back(pm.rank(k, e.markers[markers[k]]));
        cs.add("percentile_" + panel.marker_names.at(markers[k]), std::move(c));
    }
}

void add_density_columns(ColumnSet& cs, const Sample& sample, const Panel& panel, const CellTypeSpec& spec,
                         const FactorParams& params) {
    for (const auto& pair : spec.gating_pairs) {
        auto name = "density_" + panel.marker_names.at(pair.first) + "_" + panel.marker_names.at(pair.second);
        Column c;
        if (!sample.events.empty()) {
            auto dm = fit_density(sample, pair, params.transform, params.bandwidth);
            c.reserve(sample.size());
            for (const auto& e : sample.events) c.push_back(eval_density(dm, e));
        }
        cs.add(std::move(name), std::move(c));
    }
}

void add_homogeneity_column(ColumnSet& cs, const Sample& sample, const std::vector<bool>& predictions,
                            const CellTypeSpec& spec, const FactorParams& params) {
    auto hm = fit_homogeneity(sample, predictions, spec, params.transform, params.dbscan_eps, params.dbscan_min_pts);
    Column c(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) c[i] = eval_homogeneity(hm, i);
    cs.add("homogeneity", std::move(c));
}

void add_outcome_column(ColumnSet& cs, const std::vector<bool>& predictions) {
    Column c;
    c.reserve(predictions.size());
    for (bool p : predictions) c.push_back(outcome_factor(p));
    cs.add("outcome", std::move(c));
}

}  // namespace

std::vector<double> percentile_factors(const Sample& sample, std::size_t event_index, const CellTypeSpec& spec) {
    if (sample.events.empty()) throw domain_error("percentile needs a nonempty sample");
    auto markers = gated_markers(spec);
    PercentileModel pm(sample, markers);
    const auto& e = sample.events.at(event_index);
    std::vector<double> out;
    for (std::size_t k = 0; k < markers.size(); ++k) out.push_back(pm.rank(k, e.markers.at(markers[k])));
    return out;
}

double outcome_factor(bool prediction) { return prediction ? 1.0 : 0.0; }

bool homogeneity_enabled(const FactorParams& params, const CellTypeSpec& spec) {
    return params.homogeneity.value_or(spec.parent.has_value());
}

FactorMatrix assemble_factors(const VariantConfig& variant, const Sample& sample, const std::vector<bool>& predictions,
                              const Panel& panel, const CellTypeSpec& spec) {
    variant.validate();
    if (predictions.size() != sample.size())
        throw input_error("assemble_factors: " + std::to_string(predictions.size()) + " predictions for " +
                          std::to_string(sample.size()) + " events");
    const bool homog = homogeneity_enabled(variant.params, spec);
    if (variant.variant == Variant::Homogeneity && !homog)
        throw config_error("homogeneity factors are disabled for cell type " + spec.name);

    ColumnSet cs;
    add_marker_columns(cs, sample, panel, spec);
    switch (variant.variant) {
        case Variant::Baseline:
        case Variant::Basic: break;
        case Variant::Percentile: add_percentile_columns(cs, sample, panel, spec); break;
        case Variant::Density: add_density_columns(cs, sample, panel, spec, variant.params); break;
        case Variant::Homogeneity: add_homogeneity_column(cs, sample, predictions, spec, variant.params); break;
        case Variant::Combined:
            add_density_columns(cs, sample, panel, spec, variant.params);
            if (homog) add_homogeneity_column(cs, sample, predictions, spec, variant.params);
            break;
    }
    if (variant.include_outcome) add_outcome_column(cs, predictions);
    return std::move(cs).to_matrix(sample.size());
}

FactorMatrix assemble_inspection_factors(const FactorParams& params, const Sample& sample,
                                         const std::vector<bool>& predictions, const Panel& panel,
                                         const CellTypeSpec& spec) {
    if (predictions.size() != sample.size()) throw input_error("inspection factors: predictions not aligned");
    ColumnSet cs;
    add_marker_columns(cs, sample, panel, spec);
    add_percentile_columns(cs, sample, panel, spec);
    add_density_columns(cs, sample, panel, spec, params);
    add_homogeneity_column(cs, sample, predictions, spec, params);
    add_outcome_column(cs, predictions);
    return std::move(cs).to_matrix(sample.size());
}

}  // namespace uwrap
