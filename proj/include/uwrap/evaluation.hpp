#pragma once

#include <span>
#include <string>
#include <vector>

#include "uwrap/impact_model.hpp"

namespace uwrap {

struct CalibrationBin {
    double predicted = 0.0;  // predicted uncertainty of the bin (mean within the bin)
    std::size_t n = 0;
    double observed = 0.0;   // observed error rate
};

struct BrierReport {
    std::size_t n = 0;
    double brier = 0.0;
    double variance = 0.0;
    double resolution = 0.0;
    double unspecificity = 0.0;  // variance - resolution
    double unreliability = 0.0;
    double overconfidence = 0.0;  // unreliability mass where predicted < observed
    // brier - (variance - resolution + unreliability); zero for exact binning.
    double residual = 0.0;
    std::vector<CalibrationBin> bins;
};

struct BinningOptions {
    enum class Mode { Exact, FixedWidth } mode = Mode::Exact;
    double width = 0.01;
};

// Mean of (p_i - o_i)^2 with o_i = 1 where the DDM was wrong. Throws domain_error on empty input.
double brier_score(std::span<const double> uncertainties, const std::vector<bool>& errors);

BrierReport brier_decomposition(std::span<const double> uncertainties, const std::vector<bool>& errors,
                                const BinningOptions& binning = {});

double overconfidence(std::span<const double> uncertainties, const std::vector<bool>& errors);

struct ComparisonRow {
    std::string cell_type;
    std::string variant;  // VariantConfig::label()
    ImpactKind kind = ImpactKind::Default;
    BrierReport report;
};

// Root cell types are scored on all test events, subtypes on the ground-truth parent subset.
// All wrappers must share one cell type.
std::vector<ComparisonRow> compare_variants(const std::vector<const UncertaintyWrapper*>& wrappers,
                                            const std::vector<const Sample*>& test);

std::string format_comparison_csv(const std::vector<ComparisonRow>& rows);
std::string format_comparison_text(const std::vector<ComparisonRow>& rows);

}  // namespace uwrap
