#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uwrap/data_model.hpp"
#include "uwrap/density.hpp"
#include "uwrap/transform.hpp"

namespace uwrap {

enum class Variant { Baseline, Basic, Percentile, Density, Homogeneity, Combined };
enum class ImpactKind { Default, CategoryBased };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);  // throws config_error
std::string_view to_string(ImpactKind k);
ImpactKind parse_impact_kind(std::string_view s);

struct FactorParams {
    MarkerTransform transform;
    double dbscan_eps = 0.3;
    std::size_t dbscan_min_pts = 20;
    BandwidthRule bandwidth = BandwidthRule::Scott;
    // Unset: enabled for subtypes only.
    std::optional<bool> homogeneity;
};

struct VariantConfig {
    Variant variant = Variant::Basic;
    bool include_outcome = false;
    ImpactKind impact_kind = ImpactKind::Default;
    FactorParams params;

    void validate() const;
    // e.g. "basic", "basic+outcome", "density/category"
    std::string label() const;
};

json variant_config_to_json(const VariantConfig& v);
VariantConfig variant_config_from_json(const json& j);

// Row-major per-event factor values with named columns.
struct FactorMatrix {
    std::vector<std::string> names;
    std::vector<double> values;
    std::size_t n_rows = 0;

    std::size_t cols() const { return names.size(); }
    std::size_t rows() const { return n_rows; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * cols(), cols()}; }
    // Column names must match unless this matrix is empty.
    void append_rows(const FactorMatrix& other);
};

// Raw intensities of the distinct gated markers, panel order.
std::vector<double> marker_factors(const Event& event, const CellTypeSpec& spec);

// Mid-rank percentile (less + 0.5 * equal) / n of each gated marker within the sample.
std::vector<double> percentile_factors(const Sample& sample, std::size_t event_index, const CellTypeSpec& spec);

double outcome_factor(bool prediction);

bool homogeneity_enabled(const FactorParams& params, const CellTypeSpec& spec);

// Fits the sample-context models (density, homogeneity, percentile) on `sample` itself.
FactorMatrix assemble_factors(const VariantConfig& variant, const Sample& sample, const std::vector<bool>& predictions,
                              const Panel& panel, const CellTypeSpec& spec);

// Every factor family (marker, percentile, density, homogeneity, outcome) for inspection dumps.
FactorMatrix assemble_inspection_factors(const FactorParams& params, const Sample& sample,
                                         const std::vector<bool>& predictions, const Panel& panel,
                                         const CellTypeSpec& spec);

}  // namespace uwrap
