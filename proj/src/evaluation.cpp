#include "uwrap/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "uwrap/error.hpp"

namespace uwrap {

namespace {

void check_inputs(std::span<const double> p, const std::vector<bool>& o) {
    if (p.empty()) throw domain_error("Brier score of an empty set");
    if (p.size() != o.size()) throw input_error("uncertainties and errors differ in length");
}

}  // namespace

double brier_score(std::span<const double> p, const std::vector<bool>& o) {
    check_inputs(p, o);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - (o[i] ? 1.0 : 0.0);
        s += d * d;
    }
    return s / static_cast<double>(p.size());
}

BrierReport brier_decomposition(std::span<const double> p, const std::vector<bool>& o, const BinningOptions& binning) {
    check_inputs(p, o);
    if (binning.mode == BinningOptions::Mode::FixedWidth && !(binning.width > 0.0))
        throw config_error("bin width must be positive");
    struct Acc {
        std::size_t n = 0, k = 0;
        double p_sum = 0.0;
    };
    // Keyed by the exact value, or by the fixed-width bin index.
    std::map<double, Acc> bins;
    std::size_t errors = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double key = p[i];
        if (binning.mode == BinningOptions::Mode::FixedWidth) key = std::floor(p[i] / binning.width);
        auto& a = bins[key];
        ++a.n;
        a.k += o[i] ? 1 : 0;
        a.p_sum += p[i];
        errors += o[i] ? 1 : 0;
    }

    BrierReport r;
    r.n = p.size();
    const double N = static_cast<double>(r.n);
    const double obar = static_cast<double>(errors) / N;
    r.brier = brier_score(p, o);
    r.variance = obar * (1.0 - obar);
    for (const auto& [key, a] : bins) {
        CalibrationBin b;
        b.n = a.n;
        b.predicted = binning.mode == BinningOptions::Mode::Exact ? key : a.p_sum / static_cast<double>(a.n);
        b.observed = static_cast<double>(a.k) / static_cast<double>(a.n);
        const double w = static_cast<double>(a.n) / N;
        r.resolution += w * (b.observed - obar) * (b.observed - obar);
        const double gap = (b.predicted - b.observed) * (b.predicted - b.observed);
        r.unreliability += w * gap;
        if (b.predicted < b.observed) r.overconfidence += w * gap;
        r.bins.push_back(b);
    }
    r.unspecificity = r.variance - r.resolution;
    r.residual = r.brier - (r.variance - r.resolution + r.unreliability);
    return r;
}

double overconfidence(std::span<const double> p, const std::vector<bool>& o) {
    return brier_decomposition(p, o).overconfidence;
}

std::vector<ComparisonRow> compare_variants(const std::vector<const UncertaintyWrapper*>& wrappers,
                                            const std::vector<const Sample*>& test) {
    std::vector<ComparisonRow> rows;
    if (wrappers.empty()) return rows;
    const auto& ct = wrappers.front()->cell_type;
    for (const auto* w : wrappers)
        if (w->cell_type != ct) throw input_error("compare_variants: wrappers for different cell types");
    if (test.empty()) throw input_error("compare_variants: no test samples");

    // Evaluation basis is fixed per cell type, so it can be shared across wrappers.
    std::vector<Sample> basis;
    basis.reserve(test.size());
    for (const auto* s : test)
        basis.push_back(parent_population(*s, wrappers.front()->spec(), SubtypeBasis::GroundTruth, nullptr));

    for (const auto* w : wrappers) {
        std::vector<double> unc;
        std::vector<bool> err;
        for (const auto& s : basis) {
            auto est = wrapper_apply(*w, s);
            std::vector<bool> preds;
            preds.reserve(est.size());
            for (const auto& e : est) {
                unc.push_back(e.uncertainty);
                preds.push_back(e.prediction);
            }
            auto e = prediction_errors(s, preds, ct);
            err.insert(err.end(), e.begin(), e.end());
        }
        rows.push_back({ct, w->variant.label(), w->impact.kind, brier_decomposition(unc, err)});
    }
    return rows;
}

namespace {

std::string fixed5(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.5f", v);
    return buf;
}

}  // namespace

std::string format_comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::string out = "cell_type,variant,impact_model,events,brier,variance,unspecificity,unreliability,overconfidence\n";
    for (const auto& r : rows) {
        out += r.cell_type + "," + r.variant + "," + std::string(to_string(r.kind)) + "," + std::to_string(r.report.n);
        for (double v : {r.report.brier, r.report.variance, r.report.unspecificity, r.report.unreliability,
                         r.report.overconfidence})
            out += "," + format_double(v);
        out += '\n';
    }
    return out;
}

std::string format_comparison_text(const std::vector<ComparisonRow>& rows) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-6s %-24s %9s %9s %9s %9s %9s\n", "Type", "Variant", "Brier", "Variance",
                  "Unspec.", "Unreliab.", "Overconf.");
    out += buf;
    for (const auto& r : rows) {
        auto name = r.variant + (r.kind == ImpactKind::CategoryBased ? " *" : "");
        std::snprintf(buf, sizeof(buf), "%-6s %-24s %9s %9s %9s %9s %9s\n", r.cell_type.c_str(), name.c_str(),
                      fixed5(r.report.brier).c_str(), fixed5(r.report.variance).c_str(),
                      fixed5(r.report.unspecificity).c_str(), fixed5(r.report.unreliability).c_str(),
                      fixed5(r.report.overconfidence).c_str());
        out += buf;
    }
    out += "* category-based quality impact model\n";
    return out;
}

}  // namespace uwrap
