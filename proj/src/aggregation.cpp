#include "uwrap/aggregation.hpp"

#include <algorithm>

#include "uwrap/error.hpp"

namespace uwrap {

PopulationBounds lymphocyte_bounds(std::span<const UncertaintyEstimate> est, std::size_t total_events) {
    if (total_events == 0) throw domain_error("population bounds need at least one event");
    if (est.size() != total_events) throw input_error("estimates do not cover all events of the sample");
    PopulationBounds b;
    double cert_pos = 0.0, unc_neg = 0.0;
    for (const auto& e : est) {
        if (e.prediction) {
            ++b.count_pred;
            cert_pos += e.certainty;
        } else {
            unc_neg += e.uncertainty;
        }
    }
    const double n = static_cast<double>(total_events);
    b.count_min = cert_pos;
    b.count_max = static_cast<double>(b.count_pred) + unc_neg;
    b.ratio_pred = static_cast<double>(b.count_pred) / n;
    b.ratio_min = b.count_min / n;
    b.ratio_max = std::min(1.0, b.count_max / n);
    b.basis = RatioBasis::AllEvents;
    return b;
}

PopulationBounds subtype_bounds(std::span<const UncertaintyEstimate> parent, std::span<const UncertaintyEstimate> sub,
                                const PopulationBounds& pb) {
    PopulationBounds b;
    b.sample_id = pb.sample_id;
    b.basis = RatioBasis::ParentBounds;
    double lower = 0.0, unc_sub_neg = 0.0, unc_parent_neg = 0.0;
    std::size_t cursor = 0;
    for (const auto& p : parent) {
        if (!p.prediction) {
            unc_parent_neg += p.uncertainty;
            continue;
        }
        if (cursor >= sub.size() || sub[cursor].event_id != p.event_id)
            throw input_error("subtype estimates must cover exactly the parent's predicted-positive events");
        const auto& c = sub[cursor++];
        if (c.prediction) {
            ++b.count_pred;
            lower += c.certainty * p.certainty;
        } else {
            unc_sub_neg += c.uncertainty;
        }
    }
    if (cursor != sub.size()) throw input_error("subtype estimates include events the parent predicts negative");
    b.count_min = lower;
    b.count_max = static_cast<double>(b.count_pred) + unc_sub_neg + unc_parent_neg;
    b.ratio_pred = pb.count_pred ? static_cast<double>(b.count_pred) / static_cast<double>(pb.count_pred) : 0.0;
    b.ratio_min = pb.count_max > 0.0 ? b.count_min / pb.count_max : 0.0;
    b.ratio_max = pb.count_min > 0.0 ? std::min(1.0, b.count_max / pb.count_min) : 1.0;
    return b;
}

namespace {

Sample predicted_subset(const Sample& s, const std::vector<UncertaintyEstimate>& est) {
    Sample out;
    out.sample_id = s.sample_id;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (est[i].prediction) out.events.push_back(s.events[i]);
    return out;
}

std::optional<std::size_t> count_label(const Sample& s, const std::string& ct) {
    std::size_t n = 0;
    for (const auto& e : s.events) {
        auto l = e.label(ct);
        if (!l) return std::nullopt;
        n += *l ? 1 : 0;
    }
    return n;
}

void annotate_truth(PopulationBounds& b, std::optional<double> truth) {
    if (!truth) return;
    b.ratio_true = truth;
    constexpr double tol = 1e-12;
    b.inside = *truth >= b.ratio_min - tol && *truth <= b.ratio_max + tol;
}

}  // namespace

std::vector<PopulationBounds> dataset_bounds(const std::map<std::string, const UncertaintyWrapper*>& wrappers,
                                             const std::vector<const Sample*>& test, const Panel& panel) {
    for (const auto& [ct, w] : wrappers) {
        const auto& spec = panel.cell_type(ct);
        if (!spec.parent) continue;
        const auto& parent = panel.cell_type(*spec.parent);
        if (parent.parent) throw config_error("population bounds support one subtype level only (" + ct + ")");
        if (!wrappers.count(*spec.parent))
            throw config_error("subtype " + ct + " requested without a wrapper for " + *spec.parent);
    }
    std::vector<PopulationBounds> out;
    for (const auto* s : test) {
        if (s->events.empty()) throw domain_error("sample " + s->sample_id + " has no events");
        std::map<std::string, std::pair<std::vector<UncertaintyEstimate>, PopulationBounds>> roots;
        for (const auto& spec : panel.cell_types) {
            auto it = wrappers.find(spec.name);
            if (it == wrappers.end() || spec.parent) continue;
            auto est = wrapper_apply(*it->second, *s);
            auto b = lymphocyte_bounds(est, s->size());
            b.sample_id = s->sample_id;
            b.cell_type = spec.name;
            if (auto n = count_label(*s, spec.name))
                annotate_truth(b, static_cast<double>(*n) / static_cast<double>(s->size()));
            roots[spec.name] = {std::move(est), b};
        }
        for (const auto& spec : panel.cell_types) {
            auto it = wrappers.find(spec.name);
            if (it == wrappers.end()) continue;
            if (!spec.parent) {
                out.push_back(roots.at(spec.name).second);
                continue;
            }
            const auto& [parent_est, parent_bounds] = roots.at(*spec.parent);
            auto subset = predicted_subset(*s, parent_est);
            auto est = wrapper_apply(*it->second, subset);
            auto b = subtype_bounds(parent_est, est, parent_bounds);
            b.cell_type = spec.name;
            auto n_parent = count_label(*s, *spec.parent);
            auto n_child = count_label(*s, spec.name);
            if (n_parent && n_child)
                annotate_truth(b, *n_parent ? static_cast<double>(*n_child) / static_cast<double>(*n_parent) : 0.0);
            out.push_back(b);
        }
    }
    return out;
}

std::map<std::string, CoverageSummary> summarize_coverage(const std::vector<PopulationBounds>& bounds) {
    std::map<std::string, CoverageSummary> m;
    for (const auto& b : bounds) {
        for (const auto* key : {&b.cell_type, static_cast<const std::string*>(nullptr)}) {
            auto& c = m[key ? *key : std::string()];
            ++c.records;
            if (b.inside) {
                ++c.with_truth;
                c.inside += *b.inside ? 1 : 0;
            }
        }
    }
    return m;
}

std::string format_bounds_csv(const std::vector<PopulationBounds>& bounds) {
    const bool truth = !bounds.empty() && std::all_of(bounds.begin(), bounds.end(), [](const auto& b) {
        return b.ratio_true.has_value();
    });
    std::string out = "sample_id,cell_type,ratio_pred,ratio_min,ratio_max";
    if (truth) out += ",ratio_true,inside";
    out += '\n';
    for (const auto& b : bounds) {
        out += b.sample_id + "," + b.cell_type + "," + format_double(b.ratio_pred) + "," + format_double(b.ratio_min) +
               "," + format_double(b.ratio_max);
        if (truth) out += "," + format_double(*b.ratio_true) + (*b.inside ? ",1" : ",0");
        out += '\n';
    }
    return out;
}

}  // namespace uwrap
