#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uwrap/impact_model.hpp"

namespace uwrap {

enum class RatioBasis { AllEvents, ParentBounds };

struct PopulationBounds {
    std::string sample_id;
    std::string cell_type;
    std::size_t count_pred = 0;
    double count_min = 0.0;
    double count_max = 0.0;
    double ratio_pred = 0.0;
    double ratio_min = 0.0;
    double ratio_max = 0.0;
    RatioBasis basis = RatioBasis::AllEvents;
    std::optional<double> ratio_true;
    std::optional<bool> inside;
};

// |L|_min = sum of certainties over predicted positives,
// |L|_max = |L_p| + sum of uncertainties over predicted negatives; ratios over |E|.
PopulationBounds lymphocyte_bounds(std::span<const UncertaintyEstimate> estimates, std::size_t total_events);

// `subtype` holds one estimate per predicted-positive event of `parent`, in the same order.
// |C|_min = sum over predicted C of cert_C * cert_L;
// |C|_max = |C_p| + sum unc_C over predicted L but not C + sum unc_L over predicted not L;
// ratios are [|C|_min / |L|_max, |C|_max / |L|_min], the upper one clamped at 1.
PopulationBounds subtype_bounds(std::span<const UncertaintyEstimate> parent, std::span<const UncertaintyEstimate> subtype,
                                const PopulationBounds& parent_bounds);

// One record per (test sample, wrapped cell type), panel order within a sample. Subtypes are
// applied to the events their parent wrapper predicts positive. Ground truth, when present,
// fills ratio_true / inside.
std::vector<PopulationBounds> dataset_bounds(const std::map<std::string, const UncertaintyWrapper*>& wrappers,
                                             const std::vector<const Sample*>& test, const Panel& panel);

struct CoverageSummary {
    std::size_t records = 0;
    std::size_t with_truth = 0;
    std::size_t inside = 0;
    double rate() const { return with_truth ? static_cast<double>(inside) / static_cast<double>(with_truth) : 0.0; }
};

// Keyed by cell type; the "" key holds the total.
std::map<std::string, CoverageSummary> summarize_coverage(const std::vector<PopulationBounds>& bounds);

std::string format_bounds_csv(const std::vector<PopulationBounds>& bounds);

}  // namespace uwrap
